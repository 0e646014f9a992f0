//! Three-term coefficient recurrences of Frobenius series at a regular
//! singular point, ratio sequences and their Poincaré classification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::roots::numeric_roots;
use crate::algebra::{specialize, AlgebraError, BiRatFunc, CRat, Field, Poly, RatFunc, RatFuncL, Ring};
use crate::fuchsian::{indicial, FuchsError, ParamODE, Point};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecurrenceError {
    #[error("not of Heun form: {0}")]
    NotHeunForm(String),
    #[error("floating overflow at index {0}")]
    Overflow(usize),
    #[error("|z₁| = |z₂|: Poincaré's theorem does not apply")]
    HypothesisViolation,
    #[error("leading coefficient vanishes at n = {0}")]
    SingularIndex(i64),
    #[error(transparent)]
    Fuchs(#[from] FuchsError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Evaluation mode of coefficient runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

/// `a_{n+2} = A_n a_{n+1} + B_n a_n` for `n ≥ start`, with `a_start` and
/// `a_{start+1}` given. `A`, `B` are rational in `n` with coefficients in `Q(i)(λ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceSystem {
    pub a: BiRatFunc,
    pub b: BiRatFunc,
    pub start: i64,
    pub init: [CRat; 2],
}

/// Values of a sequence in either mode.
#[derive(Clone, Debug, PartialEq)]
pub enum Values {
    Exact(Vec<CRat>),
    Float { values: Vec<Complex64>, errors: Vec<f64> },
}

impl Values {
    pub fn to_c64(&self) -> Vec<Complex64> {
        match self {
            Values::Exact(v) => v.iter().map(|c| c.to_c64()).collect(),
            Values::Float { values, .. } => values.clone(),
        }
    }
}

fn nconst(n: i64) -> RatFuncL {
    RatFuncL::constant(CRat::int(n))
}

/// Falling factorial `(x)(x−1)…(x−d+1)` with `x = n + off` as a polynomial in `n`.
fn falling(off: &RatFuncL, d: usize) -> Poly<RatFuncL> {
    let mut acc = Poly::constant(RatFuncL::one());
    for i in 0..d {
        let c = off.sub(&nconst(i as i64));
        acc = acc.mul(&Poly::new(vec![c, RatFuncL::one()]));
    }
    acc
}

/// Derive the recurrence of the Frobenius series at `z = 0` (top exponent)
/// from an equation whose cleared form has index span at most two.
pub fn derive_recurrence(heun: &ParamODE) -> Result<RecurrenceSystem, RecurrenceError> {
    let data = indicial(heun, &Point::int(0)).map_err(|e| RecurrenceError::NotHeunForm(e.to_string()))?;
    let (top, _) = data.exponents.clone().ok_or_else(|| RecurrenceError::NotHeunForm("exponents not rational in λ".into()))?;
    let sigma = top.clone();
    // D = lcm of denominators
    let (dp, dq) = (heun.p.den(), heun.q.den());
    let g = dp.gcd(dq);
    let d = dp.mul(dq).exact_div(&g);
    let dr = BiRatFunc::from_poly(d.clone());
    let pp = heun.p.mul(&dr);
    let qq = heun.q.mul(&dr);
    if !pp.is_poly() || !qq.is_poly() {
        return Err(RecurrenceError::NotHeunForm("coefficients do not clear".into()));
    }
    let pp = pp.num().scale(&pp.den().lead().inv());
    let qq = qq.num().scale(&qq.den().lead().inv());
    let terms: [(usize, &Poly<RatFuncL>); 3] = [(2, &d), (1, &pp), (0, &qq)];
    let mut shifts = Vec::new();
    for (deriv, t) in &terms {
        for (j, c) in t.coeffs().iter().enumerate() {
            if !c.is_zero() {
                shifts.push(*deriv as i64 - j as i64);
            }
        }
    }
    let smax = *shifts.iter().max().ok_or_else(|| RecurrenceError::NotHeunForm("zero equation".into()))?;
    let smin = *shifts.iter().min().unwrap();
    if smax - smin > 2 {
        return Err(RecurrenceError::NotHeunForm(format!("index span {} exceeds 2", smax - smin)));
    }
    // c[t] multiplies a_{n+2−t}; a term of shift s feeds t = smax − s
    let mut c = vec![Poly::<RatFuncL>::zero(); 3];
    for (deriv, t) in &terms {
        for (j, cj) in t.coeffs().iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            let s = *deriv as i64 - j as i64;
            let k_off = 2 - smax + s;
            let off = nconst(k_off).add(&sigma);
            c[(smax - s) as usize] = c[(smax - s) as usize].add(&falling(&off, *deriv).scale(cj));
        }
    }
    let lead = BiRatFunc::from_poly(c[0].clone());
    let a = BiRatFunc::from_poly(c[1].clone()).div(&lead).neg();
    let b = BiRatFunc::from_poly(c[2].clone()).div(&lead).neg();
    let rec = RecurrenceSystem {
        a,
        b,
        start: -1,
        init: [CRat::zero(), CRat::one()],
    };
    if let Some(n) = rec.singular_index() {
        return Err(RecurrenceError::SingularIndex(n));
    }
    Ok(rec)
}

impl RecurrenceSystem {
    /// Constant-coefficient system started at `n = 0` from `(a₀, a₁)`.
    pub fn constant(a: RatFuncL, b: RatFuncL, a0: CRat, a1: CRat) -> Self {
        RecurrenceSystem { a: RatFunc::constant(a), b: RatFunc::constant(b), start: 0, init: [a0, a1] }
    }
    /// First index `n ≥ start` where a denominator vanishes identically in λ
    /// (checked over integers up to the largest rational root).
    pub fn singular_index(&self) -> Option<i64> {
        let den = self.a.den().mul(self.b.den());
        let c: Vec<Complex64> = den.coeffs().iter().map(|c| c.num().map(|x| x.to_c64()).eval(&Complex64::new(0.7, 0.3))).collect();
        if c.iter().all(|x| x.norm() == 0.0) {
            return None;
        }
        for r in crate::algebra::roots::numeric_roots_c64(&c) {
            let k = r.re.round() as i64;
            if (r - Complex64::new(k as f64, 0.0)).norm() < 1e-6 && k >= self.start && den.eval(&nconst(k)).is_zero() {
                return Some(k);
            }
        }
        None
    }
    /// `A_n`, `B_n` specialized to λ as rational functions of `n`.
    pub fn at(&self, lambda: &CRat) -> Result<(RatFunc<CRat>, RatFunc<CRat>), RecurrenceError> {
        Ok((specialize(&self.a, lambda)?, specialize(&self.b, lambda)?))
    }
    /// `A_n(λ)` as a rational function of λ.
    pub fn a_n(&self, n: i64) -> Result<RatFuncL, RecurrenceError> {
        Ok(self.a.eval(&nconst(n))?)
    }
    pub fn b_n(&self, n: i64) -> Result<RatFuncL, RecurrenceError> {
        Ok(self.b.eval(&nconst(n))?)
    }
    /// Limits of `A_n`, `B_n` as `n → ∞`, when both are finite.
    pub fn limits(&self) -> Option<(RatFuncL, RatFuncL)> {
        let lim = |f: &BiRatFunc| -> Option<RatFuncL> {
            let (dn, dd) = (f.num().deg_i(), f.den().deg_i());
            if f.is_zero() {
                Some(RatFuncL::zero())
            } else if dn < dd {
                Some(RatFuncL::zero())
            } else if dn == dd {
                Some(f.num().lead().div(&f.den().lead()))
            } else {
                None
            }
        };
        Some((lim(&self.a)?, lim(&self.b)?))
    }

    fn c64_parts(&self, lambda: Complex64) -> [Vec<Complex64>; 4] {
        let ev = |p: &Poly<RatFuncL>| -> Vec<Complex64> {
            p.coeffs()
                .iter()
                .map(|c| c.num().map(|x| x.to_c64()).eval(&lambda) / c.den().map(|x| x.to_c64()).eval(&lambda))
                .collect()
        };
        [ev(self.a.num()), ev(self.a.den()), ev(self.b.num()), ev(self.b.den())]
    }
}

fn horner(c: &[Complex64], x: f64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * x + a)
}

/// `(A_n, B_n)` at fixed λ, exact or float.
enum Stepper {
    Exact(RatFunc<CRat>, RatFunc<CRat>),
    Float([Vec<Complex64>; 4]),
}

impl Stepper {
    fn new(rec: &RecurrenceSystem, lambda: &CRat, mode: Mode) -> Result<Self, RecurrenceError> {
        Ok(match mode {
            Mode::Exact => {
                let (a, b) = rec.at(lambda)?;
                Stepper::Exact(a, b)
            }
            Mode::Float => Stepper::Float(rec.c64_parts(lambda.to_c64())),
        })
    }
    fn exact(&self, n: i64) -> Result<(CRat, CRat), RecurrenceError> {
        match self {
            Stepper::Exact(a, b) => {
                let x = CRat::int(n);
                Ok((a.eval(&x)?, b.eval(&x)?))
            }
            Stepper::Float(_) => unreachable!(),
        }
    }
    fn float(&self, n: i64) -> (Complex64, Complex64) {
        match self {
            Stepper::Float([an, ad, bn, bd]) => {
                let x = n as f64;
                (horner(an, x) / horner(ad, x), horner(bn, x) / horner(bd, x))
            }
            Stepper::Exact(a, b) => {
                let x = CRat::int(n);
                (a.eval(&x).map(|v| v.to_c64()).unwrap_or(f64::NAN.into()), b.eval(&x).map(|v| v.to_c64()).unwrap_or(f64::NAN.into()))
            }
        }
    }
}

/// `a_0 … a_N`.
pub fn coefficients(rec: &RecurrenceSystem, lambda: &CRat, n_max: usize, mode: Mode) -> Result<Values, RecurrenceError> {
    let st = Stepper::new(rec, lambda, mode)?;
    let last = n_max as i64;
    match mode {
        Mode::Exact => {
            let mut seq = vec![rec.init[0].clone(), rec.init[1].clone()];
            let mut idx = rec.start + 1;
            while idx < last {
                let n = idx - 1;
                let (a, b) = st.exact(n)?;
                let k = seq.len();
                seq.push(a.mul(&seq[k - 1]).add(&b.mul(&seq[k - 2])));
                idx += 1;
            }
            let skip = (-rec.start).max(0) as usize;
            Ok(Values::Exact(seq.into_iter().skip(skip).take(n_max + 1).collect()))
        }
        Mode::Float => {
            let mut seq = vec![rec.init[0].to_c64(), rec.init[1].to_c64()];
            let mut err = vec![0.0, 0.0];
            let u = f64::EPSILON;
            let mut idx = rec.start + 1;
            while idx < last {
                let n = idx - 1;
                let (a, b) = st.float(n);
                let k = seq.len();
                let v = a * seq[k - 1] + b * seq[k - 2];
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(RecurrenceError::Overflow(k));
                }
                let e = a.norm() * err[k - 1] + b.norm() * err[k - 2] + 8.0 * u * (a.norm() * seq[k - 1].norm() + b.norm() * seq[k - 2].norm());
                seq.push(v);
                err.push(e);
                idx += 1;
            }
            let skip = (-rec.start).max(0) as usize;
            Ok(Values::Float {
                values: seq.into_iter().skip(skip).take(n_max + 1).collect(),
                errors: err.into_iter().skip(skip).take(n_max + 1).collect(),
            })
        }
    }
}

/// `r_n = a_{n+1}/a_n` for `n = 0 … N`; `None` where `a_n = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum RatioSequence {
    Exact(Vec<Option<CRat>>),
    Float(Vec<Option<Complex64>>),
}

impl RatioSequence {
    pub fn to_c64(&self) -> Vec<Option<Complex64>> {
        match self {
            RatioSequence::Exact(v) => v.iter().map(|c| c.as_ref().map(|x| x.to_c64())).collect(),
            RatioSequence::Float(v) => v.clone(),
        }
    }
    /// Indices with `a_n = 0`.
    pub fn undefined(&self) -> Vec<usize> {
        self.to_c64().iter().enumerate().filter(|(_, v)| v.is_none()).map(|(i, _)| i).collect()
    }
    pub fn len(&self) -> usize {
        match self {
            RatioSequence::Exact(v) => v.len(),
            RatioSequence::Float(v) => v.len(),
        }
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Ratio state: `r_n`, plus whether `a_{n+1}` is known to vanish when
/// `r_n` is undefined.
struct RatioState<F> {
    r: Option<F>,
    dead: bool,
}

impl<F: Field> RatioState<F> {
    fn start(a0: F, a1: F) -> Self {
        if a0.is_zero() {
            RatioState { r: None, dead: a1.is_zero() }
        } else {
            RatioState { r: Some(a1.div(&a0)), dead: false }
        }
    }
    fn step(&mut self, a: F, b: F) {
        *self = match self.r.take() {
            Some(r) if r.is_zero() => RatioState { r: None, dead: b.is_zero() },
            Some(r) => RatioState { r: Some(a.add(&b.div(&r))), dead: false },
            // a_n = 0 and a_{n+1} ≠ 0 give a_{n+2} = A_n a_{n+1}
            None if !self.dead => RatioState { r: Some(a), dead: false },
            None => RatioState { r: None, dead: true },
        };
    }
}

/// Ratio recursion `r_{n+1} = A_n + B_n/r_n`, never forming `a_n`.
pub fn ratios(rec: &RecurrenceSystem, lambda: &CRat, n_max: usize, mode: Mode) -> Result<RatioSequence, RecurrenceError> {
    let st = Stepper::new(rec, lambda, mode)?;
    let skip = (-rec.start).max(0) as usize;
    let total = n_max + 1 + skip;
    match mode {
        Mode::Exact => {
            let mut state = RatioState::start(rec.init[0].clone(), rec.init[1].clone());
            let mut out = vec![state.r.clone()];
            let mut n = rec.start;
            while out.len() < total {
                let (a, b) = st.exact(n)?;
                state.step(a, b);
                out.push(state.r.clone());
                n += 1;
            }
            Ok(RatioSequence::Exact(out.into_iter().skip(skip).collect()))
        }
        Mode::Float => {
            let mut state = RatioState::start(rec.init[0].to_c64(), rec.init[1].to_c64());
            let mut out = vec![state.r];
            let mut n = rec.start;
            while out.len() < total {
                let (a, b) = st.float(n);
                state.step(a, b);
                if let Some(v) = state.r {
                    if !v.re.is_finite() || !v.im.is_finite() {
                        return Err(RecurrenceError::Overflow(out.len()));
                    }
                }
                out.push(state.r);
                n += 1;
            }
            Ok(RatioSequence::Float(out.into_iter().skip(skip).collect()))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum Classification {
    ConvergesTo { root: [f64; 2], margin: f64 },
    Terminating { from: usize },
    Inconclusive { n: usize, margin: f64 },
}

/// Decide which root of the limiting characteristic polynomial the ratios
/// approach: convergence to `z` is declared when the last tenth of the
/// sequence stays within `|z₁ − z₂|/4` of `z`.
pub fn poincare_classify(seq: &RatioSequence, roots: (Complex64, Complex64)) -> Result<Classification, RecurrenceError> {
    let (z1, z2) = roots;
    if (z1.norm() - z2.norm()).abs() <= 1e-15 * z1.norm().max(z2.norm()) {
        return Err(RecurrenceError::HypothesisViolation);
    }
    let v = seq.to_c64();
    let n = v.len();
    if n == 0 {
        return Ok(Classification::Inconclusive { n: 0, margin: f64::INFINITY });
    }
    // a_{k+1} = 0 shows up as r_k = 0 followed only by undefined entries
    if let Some(k) = v.iter().position(|r| matches!(r, Some(x) if x.norm() == 0.0)) {
        if v[k + 1..].iter().all(|r| r.is_none()) {
            return Ok(Classification::Terminating { from: k + 1 });
        }
    }
    let sep = (z1 - z2).norm() / 4.0;
    let tail = &v[n - (n / 10).max(1)..];
    let mut best = f64::INFINITY;
    for z in [z1, z2] {
        let m = tail.iter().map(|r| r.map(|x| (x - z).norm()).unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
        if m < sep {
            return Ok(Classification::ConvergesTo { root: [z.re, z.im], margin: m });
        }
        best = best.min(m);
    }
    Ok(Classification::Inconclusive { n: n - 1, margin: best })
}

/// Roots of `s² − A s − B` for the limits `A`, `B` of the coefficients at λ.
pub fn limiting_roots(rec: &RecurrenceSystem, lambda: &CRat) -> Option<(Complex64, Complex64)> {
    let (a, b) = rec.limits()?;
    let a = a.eval(lambda).ok()?.to_c64();
    let b = b.eval(lambda).ok()?.to_c64();
    let s = (a * a + 4.0 * b).sqrt();
    Some(((a + s) / 2.0, (a - s) / 2.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum PolynomialTest {
    /// `B_n(λ) ≠ 0` for every `n ≥ 0`, so backward recursion forces `g = 0`.
    Impossible,
    /// Degrees `N` with `B_N(λ) = 0`.
    CandidateDegrees { degrees: Vec<u64> },
}

/// Polynomial solutions of degree `N` need `B_N(λ) = 0`.
pub fn polynomial_solution_test(rec: &RecurrenceSystem, lambda: &CRat) -> Result<PolynomialTest, RecurrenceError> {
    let (_, b) = rec.at(lambda)?;
    let num = b.num();
    if num.is_zero() {
        return Err(RecurrenceError::NotHeunForm("B_n vanishes identically".into()));
    }
    let mut degrees: Vec<u64> = numeric_roots(num)
        .into_iter()
        .filter_map(|r| {
            let k = r.re.round();
            ((r - Complex64::new(k, 0.0)).norm() < 1e-6 && k >= 0.0 && num.eval(&CRat::int(k as i64)).is_zero()).then_some(k as u64)
        })
        .collect();
    degrees.sort_unstable();
    degrees.dedup();
    Ok(if degrees.is_empty() { PolynomialTest::Impossible } else { PolynomialTest::CandidateDegrees { degrees } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{kconst, rf_i};
    use crate::fuchsian::registry::specss_heun;
    use crate::fuchsian::{frobenius_series, Branch};

    /// `A_n`, `B_n` of the normalized Heun equation as printed.
    fn displayed() -> (BiRatFunc, BiRatFunc) {
        let n: BiRatFunc = RatFunc::x();
        let k = |c: &[i64]| kconst(rf_i(c, &[1]));
        let den = n.mul(&n).scale_i64(8).add(&n.scale_i64(52)).add(&k(&[72]));
        let a = n.mul(&n).scale_i64(12).add(&k(&[56, 8]).mul(&n)).add(&k(&[56, 20, 1]));
        let b = n.mul(&n).scale_i64(4).add(&k(&[12, 4]).mul(&n)).add(&k(&[8, 6, 1]));
        (a.div(&den), b.div(&den).neg())
    }

    #[test]
    fn derived_matches_display() {
        let rec = derive_recurrence(&specss_heun()).unwrap();
        let (a, b) = displayed();
        assert_eq!(rec.a, a);
        assert_eq!(rec.b, b);
        assert_eq!(rec.a_n(-1).unwrap(), rf_i(&[12, 12, 1], &[28]));
        let (la, lb) = rec.limits().unwrap();
        assert_eq!(la, rf_i(&[3], &[2]));
        assert_eq!(lb, rf_i(&[-1], &[2]));
    }

    #[test]
    fn small_coefficients() {
        let rec = derive_recurrence(&specss_heun()).unwrap();
        match coefficients(&rec, &CRat::int(0), 2, Mode::Exact).unwrap() {
            Values::Exact(v) => assert_eq!(v, vec![CRat::int(1), CRat::frac(3, 7), CRat::frac(2, 9)]),
            _ => unreachable!(),
        }
        match ratios(&rec, &CRat::int(0), 1, Mode::Exact).unwrap() {
            RatioSequence::Exact(v) => assert_eq!(v, vec![Some(CRat::frac(3, 7)), Some(CRat::frac(14, 27))]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn exact_identity_and_series_agree() {
        let rec = derive_recurrence(&specss_heun()).unwrap();
        for lam in [CRat::int(0), CRat::int(1), CRat::i(), CRat::gauss(2, 3)] {
            let Values::Exact(a) = coefficients(&rec, &lam, 52, Mode::Exact).unwrap() else { unreachable!() };
            for n in 0..=50usize {
                let an = rec.a_n(n as i64).unwrap().eval(&lam).unwrap();
                let bn = rec.b_n(n as i64).unwrap().eval(&lam).unwrap();
                assert!(a[n + 2].sub(&an.mul(&a[n + 1])).sub(&bn.mul(&a[n])).is_zero());
            }
            let s = frobenius_series(&specss_heun(), &Point::int(0), Branch::Top, &lam, 30).unwrap();
            assert_eq!(&s.coeffs[..], &a[..31]);
        }
    }

    #[test]
    fn float_matches_exact() {
        let rec = derive_recurrence(&specss_heun()).unwrap();
        for lam in [CRat::int(5), CRat::gauss(-3, 4), CRat::frac(1, 3)] {
            let ex = coefficients(&rec, &lam, 100, Mode::Exact).unwrap().to_c64();
            let fl = coefficients(&rec, &lam, 100, Mode::Float).unwrap().to_c64();
            for (x, y) in ex.iter().zip(&fl) {
                assert!((x - y).norm() <= 1e-10 * x.norm().max(1e-300), "{x} {y}");
            }
        }
    }

    #[test]
    fn synthetic_classification() {
        let half = CRat::frac(1, 2);
        let roots = (Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0));
        let one = RecurrenceSystem::constant(rf_i(&[3], &[2]), rf_i(&[-1], &[2]), CRat::one(), CRat::one());
        let r = ratios(&one, &CRat::zero(), 50, Mode::Float).unwrap();
        assert!(matches!(poincare_classify(&r, roots).unwrap(), Classification::ConvergesTo { root: [x, _], .. } if x == 1.0));
        let geo = RecurrenceSystem::constant(rf_i(&[3], &[2]), rf_i(&[-1], &[2]), CRat::one(), half);
        let r = ratios(&geo, &CRat::zero(), 50, Mode::Float).unwrap();
        assert!(matches!(poincare_classify(&r, roots).unwrap(), Classification::ConvergesTo { root: [x, _], .. } if x == 0.5));
        assert!(poincare_classify(&r, (Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0))).is_err());
    }

    #[test]
    fn terminating_detected() {
        // a(n+2) = (1 − n) a(n+1) stops after a₂
        let n: BiRatFunc = RatFunc::x();
        let rec = RecurrenceSystem { a: BiRatFunc::one().sub(&n), b: BiRatFunc::zero(), start: 0, init: [CRat::one(), CRat::one()] };
        let r = ratios(&rec, &CRat::zero(), 10, Mode::Exact).unwrap();
        assert_eq!(r.undefined(), (3..=10).collect::<Vec<_>>());
        let c = poincare_classify(&r, (Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0))).unwrap();
        assert_eq!(c, Classification::Terminating { from: 3 });
    }

    #[test]
    fn polynomial_test_examples() {
        let rec = derive_recurrence(&specss_heun()).unwrap();
        assert_eq!(polynomial_solution_test(&rec, &CRat::i()).unwrap(), PolynomialTest::Impossible);
        assert_eq!(polynomial_solution_test(&rec, &CRat::int(0)).unwrap(), PolynomialTest::Impossible);
        assert_eq!(
            polynomial_solution_test(&rec, &CRat::int(-4)).unwrap(),
            PolynomialTest::CandidateDegrees { degrees: vec![0, 1] }
        );
    }

    #[test]
    fn heun_ratios_tend_to_one() {
        let rec = derive_recurrence(&specss_heun()).unwrap();
        let roots = limiting_roots(&rec, &CRat::int(2)).unwrap();
        for lam in [CRat::int(2), CRat::int(3), CRat::gauss(1, 2)] {
            let r = ratios(&rec, &lam, 500, Mode::Float).unwrap();
            let c = poincare_classify(&r, roots).unwrap();
            assert!(matches!(c, Classification::ConvergesTo { root: [x, _], .. } if x == 1.0), "{lam}: {c:?}");
        }
        let r = ratios(&rec, &CRat::int(2), 200, Mode::Float).unwrap().to_c64();
        let d = (r[200].unwrap() - 1.0).norm();
        assert!(d < 1e-3, "{d}");
    }

    #[test]
    fn heun_series_inside_unit_disk_settles() {
        let rec = derive_recurrence(&specss_heun()).unwrap();
        let a = coefficients(&rec, &CRat::int(2), 400, Mode::Float).unwrap().to_c64();
        let partial = |n: usize| a[..=n].iter().enumerate().map(|(k, c)| c * 0.9f64.powi(k as i32)).sum::<Complex64>();
        let (s200, s400) = (partial(200), partial(400));
        assert!((a[400] / a[399] - 1.0).norm() < 0.01);
        assert!((s400 - s200).norm() < 1e-6 * s400.norm());
    }
}
