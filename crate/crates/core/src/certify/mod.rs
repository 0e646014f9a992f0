//! Mode-stability certificates: quasi-solution defects, imaginary-axis
//! bounds, Phragmén–Lindelöf premises, the closing induction and the
//! exclusion arguments, assembled into a re-checkable JSON record.

pub mod axis;
mod premises;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::crat::rat_serde;
use crate::algebra::roots::quadratic_roots_exact;
use crate::algebra::{
    parse_birat, quadratic_roots, rat_to_string, AlgebraError, BiRatFunc, CRat, Field, FmtVar, Poly, Rat, RatFunc, RatFuncL, Ring,
};
use crate::fuchsian::registry;
use crate::recurrence::{derive_recurrence, RecurrenceError, RecurrenceSystem};
use crate::transform::{default_chain, verify_chain, ChainScript, TransformError};

pub use axis::{
    recheck_axis, verify_axis_bound, AxisRecord, AxisStatus, AxisTask, Budget, Chart, Leaf, LeafKind, LineCheck, Scope,
    UniformCheck, Witness,
};
pub use premises::{family_premises, pl_premises, FamilyPremise, PremiseRecord};

pub const CERTIFICATE_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("unknown problem {0:?}")]
    UnknownProblem(String),
    #[error("identity fails: {0}")]
    Mismatch(String),
    #[error("bound violated at n = {}, t ≈ {}: |f|² = {}", .0.n, .0.t_approx, .0.abs_sq)]
    BoundViolated(Box<Witness>),
    #[error("inconclusive (margin {margin}): {detail}")]
    Inconclusive { margin: f64, detail: String },
    #[error("pole in the closed right half-plane at {0}")]
    PoleInHalfPlane(String),
    #[error("induction fails with slack {0}")]
    InductionFails(String),
    #[error("certificate rejected: {0}")]
    Rejected(String),
    #[error(transparent)]
    Chain(#[from] TransformError),
    #[error(transparent)]
    Recurrence(#[from] RecurrenceError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

fn nconst(n: i64) -> RatFuncL {
    RatFuncL::constant(CRat::int(n))
}

fn rat_i(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// The approximate ratio sequence `r̃_n(λ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiSolution {
    pub expression: String,
    pub r: BiRatFunc,
}

impl QuasiSolution {
    pub fn parse(expression: &str) -> Result<Self, AlgebraError> {
        Ok(QuasiSolution { expression: expression.into(), r: parse_birat(expression, "n")? })
    }
    pub fn at(&self, n: i64) -> Result<RatFuncL, AlgebraError> {
        self.r.eval(&nconst(n))
    }
    /// `r̃_{n+1}` as a function of `n`.
    pub fn shifted(&self) -> BiRatFunc {
        let n1 = RatFunc::x().add(&BiRatFunc::one());
        self.r.compose(&n1)
    }
    /// Exact `lim_{n→∞} r̃_n`, if finite.
    pub fn limit(&self) -> Option<RatFuncL> {
        limit_in_n(&self.r)
    }
}

fn limit_in_n(f: &BiRatFunc) -> Option<RatFuncL> {
    let (dn, dd) = (f.num().deg_i(), f.den().deg_i());
    if f.is_zero() || dn < dd {
        Some(RatFuncL::zero())
    } else if dn == dd {
        Some(f.num().lead().div(&f.den().lead()))
    } else {
        None
    }
}

/// `r_n(λ)` from the recurrence, `n ≥ start + 1`.
pub fn ratio_at(rec: &RecurrenceSystem, n: i64) -> Result<RatFuncL, CertifyError> {
    if rec.init[1].is_zero() {
        return Err(CertifyError::Mismatch("initial ratio undefined".into()));
    }
    let lift = |c: &CRat| RatFuncL::constant(c.clone());
    let mut k = rec.start;
    let mut r = rec.a_n(k)?.add(&rec.b_n(k)?.mul(&lift(&rec.init[0]).div(&lift(&rec.init[1]))));
    while k + 1 < n {
        k += 1;
        if r.is_zero() {
            return Err(CertifyError::Mismatch(format!("r_{k} vanishes identically")));
        }
        r = rec.a_n(k)?.add(&rec.b_n(k)?.div(&r));
    }
    Ok(r)
}

/// `δ_n = r_n/r̃_n − 1`.
pub fn delta_at(rec: &RecurrenceSystem, q: &QuasiSolution, n: i64) -> Result<RatFuncL, CertifyError> {
    Ok(ratio_at(rec, n)?.div(&q.at(n)?).sub(&RatFuncL::one()))
}

/// Defects of the quasi-solution: `δ₁`, and `ε_n`, `C_n` as functions of `(n, λ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Defects {
    pub delta1: RatFuncL,
    pub eps: BiRatFunc,
    pub c: BiRatFunc,
}

pub fn defects(rec: &RecurrenceSystem, q: &QuasiSolution) -> Result<Defects, CertifyError> {
    let next = q.shifted();
    let prod = q.r.mul(&next);
    let eps = rec.a.mul(&q.r).add(&rec.b).div(&prod).sub(&BiRatFunc::one());
    let c = rec.b.div(&prod);
    Ok(Defects { delta1: delta_at(rec, q, 1)?, eps, c })
}

/// `(δ₁, ε_n, C_n)` at a fixed `n ≥ 1`.
pub fn delta_eps_c(rec: &RecurrenceSystem, q: &QuasiSolution, n: i64) -> Result<(RatFuncL, RatFuncL, RatFuncL), CertifyError> {
    let d = defects(rec, q)?;
    Ok((d.delta1, d.eps.eval(&nconst(n))?, d.c.eval(&nconst(n))?))
}

/// `δ_{n+1} = ε_n − C_n δ_n/(1 + δ_n)` as exact identities in λ for `n = 1..=n_max`.
pub fn delta_recursion_identity(rec: &RecurrenceSystem, q: &QuasiSolution, n_max: i64) -> Result<Vec<i64>, CertifyError> {
    let d = defects(rec, q)?;
    let mut delta = delta_at(rec, q, 1)?;
    let mut r = ratio_at(rec, 1)?;
    let mut checked = Vec::new();
    for n in 1..=n_max {
        r = rec.a_n(n)?.add(&rec.b_n(n)?.div(&r));
        let lhs = r.div(&q.at(n + 1)?).sub(&RatFuncL::one());
        let (e, c) = (d.eps.eval(&nconst(n))?, d.c.eval(&nconst(n))?);
        let rhs = e.sub(&c.mul(&delta).div(&RatFuncL::one().add(&delta)));
        if lhs != rhs {
            return Err(CertifyError::Mismatch(format!("δ recursion at n = {n}")));
        }
        checked.push(n);
        delta = lhs;
    }
    Ok(checked)
}

// ---------------------------------------------------------------------------
// Bounds and the closing induction

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(with = "rat_serde")]
    pub delta: Rat,
    #[serde(with = "rat_serde")]
    pub eps: Rat,
    #[serde(with = "rat_serde")]
    pub c: Rat,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { delta: rat_i(1, 3), eps: rat_i(1, 12), c: rat_i(1, 2) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InductionRecord {
    /// `M_ε + M_C M_δ/(1 − M_δ)`.
    pub lhs: String,
    pub rhs: String,
    pub slack: String,
    pub holds: bool,
}

/// `|δ_n| ≤ M_δ ⇒ |δ_{n+1}| ≤ M_ε + M_C M_δ/(1 − M_δ) ≤ M_δ`, exactly.
pub fn closing_induction(b: &Bounds) -> Result<InductionRecord, CertifyError> {
    if b.delta >= Rat::one() || b.delta.is_negative() {
        return Err(CertifyError::InductionFails("M_δ must lie in [0, 1)".into()));
    }
    let lhs = &b.eps + &b.c * &b.delta / (Rat::one() - &b.delta);
    let slack = &b.delta - &lhs;
    let rec = InductionRecord {
        lhs: rat_to_string(&lhs),
        rhs: rat_to_string(&b.delta),
        slack: rat_to_string(&slack),
        holds: !slack.is_negative(),
    };
    if rec.holds {
        Ok(rec)
    } else {
        Err(CertifyError::InductionFails(rec.slack))
    }
}

// ---------------------------------------------------------------------------
// Quasi-solution zero-freeness

/// Coefficients of `λ^k` as polynomials in `n`.
fn lambda_coeffs(parts: &[Poly<CRat>]) -> Vec<Poly<CRat>> {
    let deg = parts.iter().map(|p| p.coeffs().len()).max().unwrap_or(0);
    (0..deg).map(|k| Poly::new(parts.iter().map(|p| p.coeff(k)).collect())).collect()
}

/// `p(n) > 0` for every real `n ≥ n_min`: real coefficients, nonnegative in
/// `m = n − n_min`, with a positive constant term.
fn positive_from(p: &Poly<CRat>, n_min: i64) -> bool {
    let q = p.taylor_shift(&CRat::int(n_min));
    !q.is_zero()
        && q.coeffs().iter().all(|c| c.is_real() && !c.re.is_negative())
        && q.coeff(0).re.is_positive()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootCheck {
    pub n: i64,
    /// Largest real part among the numerator roots in λ.
    #[serde(with = "crate::algebra::hexf")]
    pub max_re: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiRecord {
    pub expression: String,
    pub limit: String,
    /// Numerator has degree ≤ 2 in λ with coefficients positive for all `n ≥ 1`.
    pub numerator_positive: bool,
    pub denominator_positive: bool,
    pub roots: Vec<RootCheck>,
    pub zero_free: bool,
}

/// `r̃_n(λ) ≠ 0` for `n ≥ 1`, `Re λ ≥ 0`, and `r̃_n → 1`.
pub fn quasi_zero_free(q: &QuasiSolution, n_check: i64) -> Result<QuasiRecord, CertifyError> {
    let (num, den) = axis::bivariate_parts(&q.r);
    let sign_fix = |cs: Vec<Poly<CRat>>| -> Vec<Poly<CRat>> {
        let neg = cs.last().is_some_and(|p| p.eval(&CRat::one()).re.is_negative());
        if neg {
            cs.iter().map(|p| p.neg()).collect()
        } else {
            cs
        }
    };
    let nl = sign_fix(lambda_coeffs(&num));
    let dl = sign_fix(lambda_coeffs(&den));
    let numerator_positive = (1..=3).contains(&nl.len()) && nl.iter().all(|p| positive_from(p, 1));
    let denominator_positive = dl.len() == 1 && positive_from(&dl[0], 1);
    let mut roots = Vec::new();
    for n in 1..=n_check {
        let p = q.at(n)?;
        let z = p.num();
        let (max_re, exact) = match z.degree() {
            Some(2) => match quadratic_roots(z)? {
                crate::algebra::QuadraticRoots::Exact(a, b) => {
                    (a.re.clone().max(b.re.clone()).to_f64_lossy(), true)
                }
                r => (r.approx().iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max), false),
            },
            Some(1) => ((z.coeff(0).neg().div(&z.coeff(1))).re.to_f64_lossy(), true),
            _ => (f64::NEG_INFINITY, true),
        };
        roots.push(RootCheck { n, max_re, exact });
    }
    let limit = q.limit();
    let limit_one = limit.as_ref().is_some_and(|l| l.is_one());
    let zero_free = numerator_positive && denominator_positive && roots.iter().all(|r| r.max_re < 0.0) && limit_one;
    Ok(QuasiRecord {
        expression: q.expression.clone(),
        limit: limit.map(|l| l.fmt_var("λ")).unwrap_or_else(|| "∞".into()),
        numerator_positive,
        denominator_positive,
        roots,
        zero_free,
    })
}

trait LossyF64 {
    fn to_f64_lossy(&self) -> f64;
}

impl LossyF64 for Rat {
    fn to_f64_lossy(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

// ---------------------------------------------------------------------------
// Poincaré dichotomy and polynomial solutions

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventualBound {
    pub radius: String,
    /// For `|λ| ≤ radius`, `n ≥ threshold`: `|r_n − 1| < |1 − z₂|`.
    pub threshold: u64,
    pub bound: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyRecord {
    pub a_limit: String,
    pub b_limit: String,
    pub roots: [String; 2],
    pub quasi_limit: String,
    pub excluded_root: String,
    pub eventual: Vec<EventualBound>,
    pub holds: bool,
}

/// `sup_{n ≥ N} |p(n)/q(n)|` bound for `deg p < deg q`; `None` if the
/// denominator bound is not yet positive at `N`.
fn decay_bound(p: &Poly<CRat>, q: &Poly<CRat>, n: &Rat) -> Option<Rat> {
    let abs = |c: &CRat| c.re.abs() + c.im.abs();
    let (dp, dq) = (p.degree()?, q.degree()?);
    if dp >= dq {
        return None;
    }
    let top: Rat = p.coeffs().iter().enumerate().map(|(j, c)| abs(c) * n.pow(j as i32 - dp as i32)).sum();
    let lead = q.lead();
    let lead_low = lead.re.abs().max(lead.im.abs());
    let rest: Rat = q.coeffs()[..dq].iter().enumerate().map(|(j, c)| abs(c) * n.pow(j as i32 - dq as i32)).sum();
    let low = lead_low - rest;
    if !low.is_positive() {
        return None;
    }
    Some(top / low * n.pow(dp as i32 - dq as i32))
}

/// `Σ_k sup_{n ≥ N}|c_k(n)| R^k` where `r̃_n − 1 = Σ_k c_k(n) λ^k`.
fn quasi_defect_bound(q: &QuasiSolution, n: u64, radius: &Rat) -> Option<Rat> {
    let (num, den) = axis::bivariate_parts(&q.r.sub(&BiRatFunc::one()));
    let nl = lambda_coeffs(&num);
    let dl = lambda_coeffs(&den);
    if dl.len() != 1 {
        return None;
    }
    let nr = Rat::from_integer(BigInt::from(n));
    let mut total = Rat::zero();
    for (k, p) in nl.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        total += decay_bound(p, &dl[0], &nr)? * radius.pow(k as i32);
    }
    Some(total)
}

/// Smallest `N > n0` with `(E(N)(1 + M_δ) + M_δ)² < gap²`, `E` the defect bound.
fn eventual_threshold(q: &QuasiSolution, n0: u64, radius: &Rat, m_delta: &Rat, gap_sq: &Rat) -> Option<(u64, Rat)> {
    let ok = |n: u64| -> Option<Rat> {
        let e = quasi_defect_bound(q, n, radius)?;
        let total = &e * (Rat::one() + m_delta) + m_delta;
        (&(&total * &total) < gap_sq).then_some(total)
    };
    let mut hi = n0 + 1;
    while ok(hi).is_none() {
        hi = hi.checked_mul(2)?;
        if hi > 1 << 40 {
            return None;
        }
    }
    let mut lo = n0;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ok(hi).map(|b| (hi, b))
}

pub fn dichotomy(rec: &RecurrenceSystem, q: &QuasiSolution, b: &Bounds, n0: u64) -> Result<DichotomyRecord, CertifyError> {
    let (la, lb) = rec.limits().ok_or_else(|| CertifyError::Mismatch("A_n or B_n unbounded".into()))?;
    let (ca, cb) = (la.as_constant(), lb.as_constant());
    let (Some(ca), Some(cb)) = (ca, cb) else {
        return Err(CertifyError::Mismatch("limits of A_n, B_n depend on λ".into()));
    };
    // z² − A z − B
    let chr = Poly::new(vec![cb.neg(), ca.neg(), CRat::one()]);
    let (z1, z2) = quadratic_roots_exact(&chr)?.ok_or_else(|| CertifyError::Mismatch("characteristic roots irrational".into()))?;
    let limit = q.limit().and_then(|l| l.as_constant());
    let one = CRat::one();
    let (target, other) = if z1 == one { (z1, z2) } else { (z2, z1) };
    let gap = other.sub(&target).norm_sqr();
    let mut eventual = Vec::new();
    let mut holds = target == one && limit.as_ref() == Some(&one) && target != other;
    if holds {
        // |r_n − 1| ≤ |r̃_n − 1|(1 + M_δ) + M_δ, compared with |z₂ − 1|
        for radius in [1i64, 10, 100, 1000] {
            let r = Rat::from_integer(BigInt::from(radius));
            match eventual_threshold(q, n0, &r, &b.delta, &gap) {
                Some((n, bound)) => eventual.push(EventualBound { radius: radius.to_string(), threshold: n, bound: rat_to_string(&bound) }),
                None => holds = false,
            }
        }
    }
    Ok(DichotomyRecord {
        a_limit: la.fmt_var("λ"),
        b_limit: lb.fmt_var("λ"),
        roots: [target.to_string(), other.to_string()],
        quasi_limit: limit.map(|l| l.to_string()).unwrap_or_else(|| "?".into()),
        excluded_root: other.to_string(),
        eventual,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyExclusionRecord {
    /// Zeros of `B_n` in λ as functions of `n`.
    pub b_zeros: Vec<String>,
    /// Smallest `n` with `B_n` multiplying a nonzero coefficient.
    pub n_min: i64,
    pub holds: bool,
}

/// A terminating series `a_N ≠ 0 = a_{N+1} = a_{N+2}` with `N > start` needs
/// `B_{N+1}(λ) = 0`; check every zero of `B_n` in λ is `α + βn` with negative
/// real part for `n ≥ start + 2`.
pub fn polynomial_exclusion(rec: &RecurrenceSystem) -> Result<PolyExclusionRecord, CertifyError> {
    let (num, _) = axis::bivariate_parts(&rec.b);
    let by_lambda: Vec<RatFuncL> = lambda_coeffs(&num).into_iter().map(RatFunc::from_poly).collect();
    let p: Poly<RatFuncL> = Poly::new(by_lambda);
    let roots: Vec<RatFuncL> = match p.degree() {
        Some(1) => vec![p.coeff(0).neg().div(&p.coeff(1))],
        Some(2) => match quadratic_roots_exact(&p)? {
            Some((a, b)) => vec![a, b],
            None => Vec::new(),
        },
        _ => Vec::new(),
    };
    let n_min = rec.start + 2;
    let ok_root = |r: &RatFuncL| -> bool {
        if !r.is_poly() || r.num().deg_i() > 1 {
            return false;
        }
        let (alpha, beta) = (r.num().coeff(0), r.num().coeff(1));
        !beta.re.is_positive() && alpha.add(&beta.scale_i64(n_min)).re.is_negative()
    };
    let holds = !roots.is_empty() && roots.iter().all(ok_root);
    Ok(PolyExclusionRecord { b_zeros: roots.iter().map(|r| r.fmt_var("n")).collect(), n_min, holds })
}

// ---------------------------------------------------------------------------
// Problems and certificates

/// A registered stability problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub name: &'static str,
    pub chain: ChainScript,
    pub heun: &'static str,
    pub a_display: &'static str,
    pub b_display: &'static str,
    pub quasi: &'static str,
    /// λ where the series argument degenerates; covered by shooting.
    pub excluded: &'static [i64],
}

pub const PROBLEMS: &[&str] = &["wavemaps-corotational"];

pub fn problem(name: &str) -> Option<Problem> {
    match name {
        "wavemaps-corotational" => Some(Problem {
            name: "wavemaps-corotational",
            chain: default_chain(),
            heun: "specssHeun",
            a_display: "(12n^2 + (8λ + 56)n + λ^2 + 20λ + 56)/(8n^2 + 52n + 72)",
            b_display: "-(4n^2 + (4λ + 12)n + λ^2 + 6λ + 8)/(8n^2 + 52n + 72)",
            quasi: "λ^2/(8n^2 + 33n + 28) + 5λ/(5n + 16) + (5n + 6)/(5n + 13)",
            excluded: &[0, 1],
        }),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub bounds: Bounds,
    pub n0: u64,
    pub budget: Budget,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { bounds: Bounds::default(), n0: 32, budget: Budget::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub start: String,
    pub stages: Vec<String>,
    pub identities: usize,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceRecord {
    pub equation: String,
    pub a: String,
    pub b: String,
    pub start: i64,
    pub matches_display: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub lambda: String,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum Verdict {
    #[serde(rename = "MODE_STABLE")]
    ModeStable,
    #[serde(rename = "FAILED")]
    Failed { stage: String, detail: String },
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::ModeStable => write!(f, "MODE_STABLE"),
            Verdict::Failed { stage, .. } => write!(f, "FAILED({stage})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub version: u32,
    pub problem: String,
    pub options: CertifyOptions,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chain: Option<ChainRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub recurrence: Option<RecurrenceRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub quasi_solution: Option<QuasiRecord>,
    #[serde(default)]
    pub tasks: Vec<AxisRecord>,
    #[serde(default)]
    pub pl_premises: Vec<PremiseRecord>,
    #[serde(default)]
    pub pl_families: Vec<FamilyPremise>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub induction: Option<InductionRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dichotomy: Option<DichotomyRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub polynomial_exclusion: Option<PolyExclusionRecord>,
    #[serde(default)]
    pub excluded_lambdas: Vec<Exclusion>,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn is_stable(&self) -> bool {
        self.verdict == Verdict::ModeStable
    }
}

/// Everything derived from the problem definition, shared by certify and recheck.
struct Setup {
    rec: RecurrenceSystem,
    quasi: QuasiSolution,
    defects: Defects,
}

fn recurrence_record(p: &Problem) -> Result<(RecurrenceRecord, RecurrenceSystem), CertifyError> {
    let heun = registry::equation(p.heun).ok_or_else(|| CertifyError::UnknownProblem(p.heun.into()))?;
    let rec = derive_recurrence(&heun)?;
    let a = parse_birat(p.a_display, "n")?;
    let b = parse_birat(p.b_display, "n")?;
    let r = RecurrenceRecord {
        equation: p.heun.into(),
        a: crate::fuchsian::fmt_bi(&rec.a, "n"),
        b: crate::fuchsian::fmt_bi(&rec.b, "n"),
        start: rec.start,
        matches_display: rec.a == a && rec.b == b,
    };
    Ok((r, rec))
}

fn tasks_for(setup: &Setup, opts: &CertifyOptions) -> Vec<AxisTask> {
    let b = &opts.bounds;
    vec![
        AxisTask { name: "delta_1".into(), f: RatFunc::constant(setup.defects.delta1.clone()), bound: b.delta.clone(), scope: Scope::Single { n: 1 } },
        AxisTask { name: "eps_n".into(), f: setup.defects.eps.clone(), bound: b.eps.clone(), scope: Scope::AllFrom { n_min: 1, n0: opts.n0 } },
        AxisTask { name: "C_n".into(), f: setup.defects.c.clone(), bound: b.c.clone(), scope: Scope::AllFrom { n_min: 1, n0: opts.n0 } },
    ]
}

/// Individual PL premise targets: `δ₁` and `ε_n`, `C_n` for small `n`.
const PL_SAMPLE_N: &[i64] = &[1, 2, 3, 5, 8];

fn premise_targets(setup: &Setup, b: &Bounds) -> Result<Vec<(String, RatFuncL, Rat)>, CertifyError> {
    let mut out = vec![("delta_1".to_string(), setup.defects.delta1.clone(), b.delta.clone())];
    for &n in PL_SAMPLE_N {
        out.push((format!("eps_{n}"), setup.defects.eps.eval(&nconst(n))?, b.eps.clone()));
        out.push((format!("C_{n}"), setup.defects.c.eval(&nconst(n))?, b.c.clone()));
    }
    Ok(out)
}

fn fail(cert: &mut Certificate, stage: &str, detail: String) {
    cert.verdict = Verdict::Failed { stage: stage.into(), detail };
}

pub fn certify_mode_stability(name: &str) -> Result<Certificate, CertifyError> {
    certify_with(name, &CertifyOptions::default())
}

/// Run every stage in order; the first failing stage fixes the verdict.
pub fn certify_with(name: &str, opts: &CertifyOptions) -> Result<Certificate, CertifyError> {
    let p = problem(name).ok_or_else(|| CertifyError::UnknownProblem(name.into()))?;
    let mut cert = Certificate {
        version: CERTIFICATE_VERSION,
        problem: name.into(),
        options: opts.clone(),
        chain: None,
        recurrence: None,
        quasi_solution: None,
        tasks: Vec::new(),
        pl_premises: Vec::new(),
        pl_families: Vec::new(),
        induction: None,
        dichotomy: None,
        polynomial_exclusion: None,
        excluded_lambdas: Vec::new(),
        verdict: Verdict::ModeStable,
    };

    let chain = match verify_chain(&p.chain) {
        Ok(rep) => ChainRecord {
            start: rep.start,
            stages: rep.stages.iter().map(|s| s.expect.clone()).collect(),
            identities: rep.identities.len(),
            verified: rep.verified,
        },
        Err(e) => {
            fail(&mut cert, "chain", e.to_string());
            return Ok(cert);
        }
    };
    cert.chain = Some(chain);

    let (rr, rec) = recurrence_record(&p)?;
    let matches = rr.matches_display;
    cert.recurrence = Some(rr);
    if !matches {
        fail(&mut cert, "recurrence", "derived recurrence differs from the registered one".into());
        return Ok(cert);
    }

    let quasi = QuasiSolution::parse(p.quasi)?;
    let qr = quasi_zero_free(&quasi, opts.n0 as i64 + 1)?;
    let zero_free = qr.zero_free;
    cert.quasi_solution = Some(qr);
    if !zero_free {
        fail(&mut cert, "quasi_solution", "zero-freeness or limit check failed".into());
        return Ok(cert);
    }
    delta_recursion_identity(&rec, &quasi, 3)?;
    let setup = Setup { defects: defects(&rec, &quasi)?, rec, quasi };

    for task in tasks_for(&setup, opts) {
        let r = verify_axis_bound(&task, opts.budget);
        let status = r.status.clone();
        cert.tasks.push(r);
        match status {
            AxisStatus::Verified => {}
            AxisStatus::BoundViolated { witness } => {
                let v = witness.value.as_ref().map(|v| format!(" = {v}")).unwrap_or_default();
                fail(&mut cert, "axis_bounds", format!("{}: |f(it)|² = {} at t ≈ {}{v}", task.name, witness.abs_sq, witness.t_approx));
                return Ok(cert);
            }
            AxisStatus::Inconclusive { detail, .. } => {
                fail(&mut cert, "axis_bounds", format!("{}: inconclusive: {detail}", task.name));
                return Ok(cert);
            }
        }
    }

    for (name, f, m) in premise_targets(&setup, &opts.bounds)? {
        match pl_premises(&name, &f, Some(&m)) {
            Ok(r) => cert.pl_premises.push(r),
            Err(e) => {
                fail(&mut cert, "pl_premises", format!("{name}: {e}"));
                return Ok(cert);
            }
        }
    }
    for (name, f) in [("eps_n", &setup.defects.eps), ("C_n", &setup.defects.c)] {
        let r = family_premises(name, f, &setup.quasi)?;
        let ok = r.holds;
        cert.pl_families.push(r);
        if !ok {
            fail(&mut cert, "pl_premises", format!("{name}: denominator not controlled by the quasi-solution"));
            return Ok(cert);
        }
    }

    match closing_induction(&opts.bounds) {
        Ok(r) => cert.induction = Some(r),
        Err(CertifyError::InductionFails(slack)) => {
            let lhs = &opts.bounds.eps + &opts.bounds.c * &opts.bounds.delta / (Rat::one() - &opts.bounds.delta);
            cert.induction = Some(InductionRecord {
                lhs: rat_to_string(&lhs),
                rhs: rat_to_string(&opts.bounds.delta),
                slack: slack.clone(),
                holds: false,
            });
            fail(&mut cert, "induction", format!("slack {slack}"));
            return Ok(cert);
        }
        Err(e) => return Err(e),
    }

    let d = dichotomy(&setup.rec, &setup.quasi, &opts.bounds, opts.n0)?;
    let ok = d.holds;
    cert.dichotomy = Some(d);
    if !ok {
        fail(&mut cert, "dichotomy", "limit 1/2 of the ratio sequence not excluded".into());
        return Ok(cert);
    }

    let pe = polynomial_exclusion(&setup.rec)?;
    let ok = pe.holds;
    cert.polynomial_exclusion = Some(pe);
    if !ok {
        fail(&mut cert, "polynomial_exclusion", "B_n may vanish for Re λ ≥ 0".into());
        return Ok(cert);
    }

    cert.excluded_lambdas = p
        .excluded
        .iter()
        .map(|l| Exclusion { lambda: l.to_string(), status: "EXCLUDED_FROM_SERIES_CERT".into() })
        .collect();
    Ok(cert)
}

/// Summary of a successful recheck.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecheckReport {
    pub problem: String,
    pub verdict: String,
    pub leaves: usize,
    pub records: usize,
}

fn reject<T>(msg: impl Into<String>) -> Result<T, CertifyError> {
    Err(CertifyError::Rejected(msg.into()))
}

/// Re-validate a certificate from its own data and the problem definition.
/// Every stored record is recomputed and compared; leaf boxes are
/// re-enclosed, not re-searched.
pub fn recheck(cert: &Certificate) -> Result<RecheckReport, CertifyError> {
    if cert.version != CERTIFICATE_VERSION {
        return reject(format!("unsupported version {}", cert.version));
    }
    let p = problem(&cert.problem).ok_or_else(|| CertifyError::UnknownProblem(cert.problem.clone()))?;
    let opts = &cert.options;
    let mut records = 0;

    let Some(chain) = &cert.chain else {
        return match &cert.verdict {
            Verdict::Failed { stage, .. } if stage == "chain" => Ok(summary(cert, 0, 0)),
            _ => reject("chain record missing"),
        };
    };
    let rep = verify_chain(&p.chain)?;
    let want = ChainRecord {
        start: rep.start,
        stages: rep.stages.iter().map(|s| s.expect.clone()).collect(),
        identities: rep.identities.len(),
        verified: rep.verified,
    };
    if *chain != want {
        return reject("chain record does not reproduce");
    }
    records += 1;

    let (rr, rec) = recurrence_record(&p)?;
    if cert.recurrence.as_ref() != Some(&rr) {
        return reject("recurrence record does not reproduce");
    }
    records += 1;
    let quasi = QuasiSolution::parse(p.quasi)?;
    let qr = quasi_zero_free(&quasi, opts.n0 as i64 + 1)?;
    if cert.quasi_solution.as_ref() != Some(&qr) {
        return reject("quasi-solution record does not reproduce");
    }
    records += 1;
    let setup = Setup { defects: defects(&rec, &quasi)?, rec, quasi };

    let tasks = tasks_for(&setup, opts);
    let mut leaves = 0;
    for (i, r) in cert.tasks.iter().enumerate() {
        let task = tasks.get(i).ok_or_else(|| CertifyError::Rejected("extra task record".into()))?;
        match &r.status {
            AxisStatus::Verified => {
                recheck_axis(task, r, opts.budget).map_err(CertifyError::Rejected)?;
                leaves += r.lines.iter().map(|l| l.leaves.len()).sum::<usize>()
                    + r.uniform.iter().map(|u| u.leaves.len()).sum::<usize>();
            }
            AxisStatus::BoundViolated { witness } => {
                let abs_sq = crate::algebra::parse_rat(&witness.abs_sq)?;
                if abs_sq <= &task.bound * &task.bound {
                    return reject(format!("{}: witness does not exceed the bound", r.target));
                }
                let fresh = verify_axis_bound(task, opts.budget);
                if fresh != *r {
                    return reject(format!("{}: violation record does not reproduce", r.target));
                }
            }
            AxisStatus::Inconclusive { .. } => {}
        }
        records += 1;
    }

    let premise_want: Vec<PremiseRecord> = if cert.pl_premises.is_empty() {
        Vec::new()
    } else {
        premise_targets(&setup, &opts.bounds)?
            .iter()
            .take(cert.pl_premises.len())
            .map(|(n, f, m)| pl_premises(n, f, Some(m)))
            .collect::<Result<_, _>>()?
    };
    if cert.pl_premises != premise_want {
        return reject("PL premise records do not reproduce");
    }
    records += cert.pl_premises.len();
    for fam in &cert.pl_families {
        let f = match fam.target.as_str() {
            "eps_n" => &setup.defects.eps,
            "C_n" => &setup.defects.c,
            _ => return reject("unknown family premise"),
        };
        if family_premises(&fam.target, f, &setup.quasi)? != *fam {
            return reject("family premise record does not reproduce");
        }
        records += 1;
    }

    if let Some(ind) = &cert.induction {
        let lhs = &opts.bounds.eps + &opts.bounds.c * &opts.bounds.delta / (Rat::one() - &opts.bounds.delta);
        let slack = &opts.bounds.delta - &lhs;
        if ind.lhs != rat_to_string(&lhs) || ind.slack != rat_to_string(&slack) || ind.holds != !slack.is_negative() {
            return reject("induction record does not reproduce");
        }
        records += 1;
    }
    if let Some(d) = &cert.dichotomy {
        if *d != dichotomy(&setup.rec, &setup.quasi, &opts.bounds, opts.n0)? {
            return reject("dichotomy record does not reproduce");
        }
        records += 1;
    }
    if let Some(pe) = &cert.polynomial_exclusion {
        if *pe != polynomial_exclusion(&setup.rec)? {
            return reject("polynomial exclusion record does not reproduce");
        }
        records += 1;
    }

    let complete = chain.verified
        && cert.recurrence.as_ref().is_some_and(|r| r.matches_display)
        && cert.quasi_solution.as_ref().is_some_and(|q| q.zero_free)
        && cert.tasks.len() == tasks.len()
        && cert.tasks.iter().all(|t| t.verified())
        && !cert.pl_premises.is_empty()
        && cert.pl_premises.iter().all(|r| r.holds)
        && cert.pl_families.len() == 2
        && cert.pl_families.iter().all(|r| r.holds)
        && cert.induction.as_ref().is_some_and(|r| r.holds)
        && cert.dichotomy.as_ref().is_some_and(|r| r.holds)
        && cert.polynomial_exclusion.as_ref().is_some_and(|r| r.holds);
    match (&cert.verdict, complete) {
        (Verdict::ModeStable, true) => Ok(summary(cert, leaves, records)),
        (Verdict::ModeStable, false) => reject("verdict MODE_STABLE without every record verified"),
        (Verdict::Failed { .. }, true) => reject("verdict FAILED although every record verifies"),
        (Verdict::Failed { .. }, false) => Ok(summary(cert, leaves, records)),
    }
}

fn summary(cert: &Certificate, leaves: usize, records: usize) -> RecheckReport {
    RecheckReport { problem: cert.problem.clone(), verdict: cert.verdict.to_string(), leaves, records }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rf_i, ratfunc_eval};

    fn setup() -> (RecurrenceSystem, QuasiSolution) {
        let p = problem("wavemaps-corotational").unwrap();
        let (_, rec) = recurrence_record(&p).unwrap();
        (rec, QuasiSolution::parse(p.quasi).unwrap())
    }

    #[test]
    fn delta_one_at_zero() {
        let (rec, q) = setup();
        assert_eq!(ratio_at(&rec, 1).unwrap().eval(&CRat::int(0)).unwrap(), CRat::frac(14, 27));
        assert_eq!(q.at(1).unwrap().eval(&CRat::int(0)).unwrap(), CRat::frac(11, 18));
        let (d1, e1, _) = delta_eps_c(&rec, &q, 1).unwrap();
        assert_eq!(ratfunc_eval(&d1, &CRat::int(0)).unwrap(), CRat::frac(-5, 33));
        let e = ratfunc_eval(&e1, &CRat::int(0)).unwrap();
        assert!(e.is_real() && e.re.abs() <= rat_i(1, 12), "{e}");
    }

    #[test]
    fn c_limit_is_minus_half() {
        let (rec, q) = setup();
        let d = defects(&rec, &q).unwrap();
        assert_eq!(limit_in_n(&d.c), Some(rf_i(&[-1], &[2])));
        assert_eq!(limit_in_n(&d.eps), Some(RatFuncL::zero()));
        assert_eq!(q.limit(), Some(RatFuncL::one()));
    }

    #[test]
    fn recursion_identity() {
        let (rec, q) = setup();
        assert_eq!(delta_recursion_identity(&rec, &q, 6).unwrap().len(), 6);
        // n = 5, λ = i evaluated independently
        let i = CRat::i();
        let d5 = delta_at(&rec, &q, 5).unwrap().eval(&i).unwrap();
        let d6 = delta_at(&rec, &q, 6).unwrap().eval(&i).unwrap();
        let (_, e5, c5) = delta_eps_c(&rec, &q, 5).unwrap();
        let (e5, c5) = (e5.eval(&i).unwrap(), c5.eval(&i).unwrap());
        assert_eq!(d6, e5.sub(&c5.mul(&d5).div(&CRat::one().add(&d5))));
    }

    #[test]
    fn induction_examples() {
        let b = |d: (i64, i64), e: (i64, i64), c: (i64, i64)| Bounds { delta: rat_i(d.0, d.1), eps: rat_i(e.0, e.1), c: rat_i(c.0, c.1) };
        let r = closing_induction(&b((1, 3), (1, 12), (1, 2))).unwrap();
        assert_eq!((r.lhs.as_str(), r.slack.as_str()), ("1/3", "0"));
        assert_eq!(closing_induction(&b((1, 3), (1, 12), (1, 4))).unwrap().slack, "1/8");
        assert_eq!(closing_induction(&b((1, 3), (1, 6), (1, 2))), Err(CertifyError::InductionFails("-1/12".into())));
    }

    #[test]
    fn quasi_solution_zero_free() {
        let (_, q) = setup();
        let r = quasi_zero_free(&q, 8).unwrap();
        assert!(r.zero_free, "{r:?}");
        assert_eq!(r.limit, "1");
        let bad = QuasiSolution::parse("(λ - 2)/(n + 1) + 1").unwrap();
        assert!(!quasi_zero_free(&bad, 4).unwrap().zero_free);
    }

    #[test]
    fn dichotomy_and_polynomials() {
        let (rec, q) = setup();
        let d = dichotomy(&rec, &q, &Bounds::default(), 32).unwrap();
        assert!(d.holds, "{d:?}");
        assert_eq!(d.roots, ["1".to_string(), "1/2".to_string()]);
        assert!(d.eventual.windows(2).all(|w| w[0].threshold <= w[1].threshold));
        let pe = polynomial_exclusion(&rec).unwrap();
        assert!(pe.holds);
        let mut z = pe.b_zeros.clone();
        z.sort();
        assert_eq!(z, vec!["-2*n - 2".to_string(), "-2*n - 4".to_string()]);
    }

    #[test]
    fn unknown_problem() {
        assert!(matches!(certify_mode_stability("nope"), Err(CertifyError::UnknownProblem(_))));
    }
}
