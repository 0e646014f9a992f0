//! Exact transformations of [`ParamODE`]s: gauge multipliers, power
//! substitution, Möbius changes of variable and supersymmetric partners.

mod chain;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    kconst, parse_crat, parse_ratfunc, AlgebraError, BiRatFunc, CRat, Field, FmtVar, Poly, RatFunc, RatFuncL, Ring,
};
use crate::fuchsian::{fmt_bi, ParamODE, Point};

pub use chain::{
    default_chain, first_difference, identity_checks, run_chain, verify_chain, verify_chain_from, ChainOp, ChainReport, ChainScript, IdentityCheck,
    Stage, StageReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("power substitution with k = {k} is not compatible: {which} is not a function of z^{k}")]
    NotCompatible { k: u32, which: &'static str },
    #[error("not in Schrödinger form: {0}")]
    NotSchrodingerForm(String),
    #[error("degenerate Möbius map")]
    DegenerateMap,
    #[error("stage {stage} ({label}): expected {expected}, first difference in {location}")]
    Mismatch { stage: usize, label: String, expected: String, location: String },
    #[error("unknown equation {0:?}")]
    UnknownEquation(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `w(z) = Π (z − z_i)^{μ_i}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GaugeFactor {
    pub factors: Vec<(CRat, RatFuncL)>,
}

#[derive(Serialize, Deserialize)]
struct FactorRepr {
    at: String,
    exp: String,
}

impl Serialize for GaugeFactor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.factors
            .iter()
            .map(|(z, m)| FactorRepr { at: z.to_string(), exp: m.fmt_var("λ") })
            .collect::<Vec<_>>()
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaugeFactor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<FactorRepr>::deserialize(d)?;
        let mut factors = Vec::new();
        for f in v {
            let z = parse_crat(&f.at).map_err(serde::de::Error::custom)?;
            let m = parse_ratfunc(&f.exp).map_err(serde::de::Error::custom)?;
            factors.push((z, m));
        }
        Ok(GaugeFactor { factors })
    }
}

impl GaugeFactor {
    pub fn new(factors: Vec<(CRat, RatFuncL)>) -> Self {
        GaugeFactor { factors }.normalized()
    }
    /// Parse `[(point, exponent)]` given as strings.
    pub fn parse(items: &[(&str, &str)]) -> Result<Self, AlgebraError> {
        let mut f = Vec::new();
        for (z, m) in items {
            f.push((parse_crat(z)?, parse_ratfunc(m)?));
        }
        Ok(GaugeFactor::new(f))
    }
    /// Merge repeated points, drop zero exponents, sort by location.
    pub fn normalized(mut self) -> Self {
        let mut out: Vec<(CRat, RatFuncL)> = Vec::new();
        for (z, m) in self.factors.drain(..) {
            match out.iter_mut().find(|(w, _)| *w == z) {
                Some(e) => e.1 = e.1.add(&m),
                None => out.push((z, m)),
            }
        }
        out.retain(|(_, m)| !m.is_zero());
        out.sort_by(|a, b| (&a.0.re, &a.0.im).cmp(&(&b.0.re, &b.0.im)));
        GaugeFactor { factors: out }
    }
    pub fn is_trivial(&self) -> bool {
        self.factors.iter().all(|(_, m)| m.is_zero())
    }
    /// Exponents added pointwise.
    pub fn compose(&self, o: &GaugeFactor) -> GaugeFactor {
        GaugeFactor::new(self.factors.iter().chain(&o.factors).cloned().collect())
    }
    pub fn inverse(&self) -> GaugeFactor {
        GaugeFactor::new(self.factors.iter().map(|(z, m)| (z.clone(), m.neg())).collect())
    }
    /// `w'/w = Σ μ_i/(z − z_i)`.
    pub fn log_derivative(&self) -> BiRatFunc {
        let z: BiRatFunc = RatFunc::x();
        let mut acc = BiRatFunc::zero();
        for (zi, m) in &self.factors {
            let lin = z.sub(&kconst(RatFunc::constant(zi.clone())));
            acc = acc.add(&kconst(m.clone()).div(&lin));
        }
        acc
    }
    /// Value of `w(x)` for concrete λ and real `x` on the principal branch.
    pub fn eval_c64(&self, x: num_complex::Complex64, lambda: num_complex::Complex64) -> num_complex::Complex64 {
        let mut acc = num_complex::Complex64::new(1.0, 0.0);
        for (zi, m) in &self.factors {
            let mu = c64_eval(m, lambda);
            let base = x - zi.to_c64();
            acc *= if mu.im == 0.0 && mu.re == mu.re.round() { base.powi(mu.re as i32) } else { base.powc(mu) };
        }
        acc
    }
}

fn c64_eval(f: &RatFuncL, l: num_complex::Complex64) -> num_complex::Complex64 {
    f.num().map(|c| c.to_c64()).eval(&l) / f.den().map(|c| c.to_c64()).eval(&l)
}

/// `z ↦ (a z + b)/(c z + d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    pub a: CRat,
    pub b: CRat,
    pub c: CRat,
    pub d: CRat,
}

impl MobiusMap {
    pub fn new(a: CRat, b: CRat, c: CRat, d: CRat) -> Result<Self, TransformError> {
        if a.mul(&d).sub(&b.mul(&c)).is_zero() {
            return Err(TransformError::DegenerateMap);
        }
        Ok(MobiusMap { a, b, c, d })
    }
    pub fn ints(a: i64, b: i64, c: i64, d: i64) -> Result<Self, TransformError> {
        MobiusMap::new(CRat::int(a), CRat::int(b), CRat::int(c), CRat::int(d))
    }
    pub fn identity() -> Self {
        MobiusMap { a: CRat::one(), b: CRat::zero(), c: CRat::zero(), d: CRat::one() }
    }
    pub fn inverse(&self) -> Self {
        MobiusMap { a: self.d.clone(), b: self.b.neg(), c: self.c.neg(), d: self.a.clone() }
    }
    pub fn as_ratfunc(&self) -> BiRatFunc {
        let k = |c: &CRat| kconst(RatFunc::constant(c.clone()));
        let z: BiRatFunc = RatFunc::x();
        z.mul(&k(&self.a)).add(&k(&self.b)).div(&z.mul(&k(&self.c)).add(&k(&self.d)))
    }
    pub fn apply(&self, p: &Point) -> Point {
        match p {
            Point::Infinity if self.c.is_zero() => Point::Infinity,
            Point::Infinity => Point::Finite(self.a.div(&self.c)),
            Point::Finite(z) => {
                let den = self.c.mul(z).add(&self.d);
                if den.is_zero() {
                    Point::Infinity
                } else {
                    Point::Finite(self.a.mul(z).add(&self.b).div(&den))
                }
            }
        }
    }
}

/// Supersymmetric data: ground-state logarithmic derivative `W`, the shift
/// `κ` and the weight `h` of `h·(g'' − (W' + W²) g) = κ g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SusyData {
    pub w: BiRatFunc,
    pub shift: RatFuncL,
    pub weight: BiRatFunc,
}

impl SusyData {
    /// `(∂ + W)(∂ − W)` as `∂² + a ∂ + b`; the identity requires `a = 0`,
    /// `b = −(W' + W²)`.
    pub fn factorization_holds(&self) -> bool {
        let (a, b) = compose_first_order(&self.w, &self.w.neg());
        a.is_zero() && b == self.w.derivative().add(&self.w.mul(&self.w)).neg()
    }
}

/// `(∂ + a)(∂ + b) = ∂² + (a + b)∂ + (b' + ab)`.
pub fn compose_first_order(a: &BiRatFunc, b: &BiRatFunc) -> (BiRatFunc, BiRatFunc) {
    (a.add(b), b.derivative().add(&a.mul(b)))
}

/// Substitute `f = w·g`.
pub fn gauge(ode: &ParamODE, g: &GaugeFactor) -> ParamODE {
    let l = g.log_derivative();
    let p = ode.p.add(&l.scale_i64(2));
    let q = ode.q.add(&ode.p.mul(&l)).add(&l.derivative()).add(&l.mul(&l));
    let mut out = ParamODE::new(&ode.name, &ode.var, p, q);
    let prev = GaugeFactor { factors: log_as_finite(&ode.gauge_log) };
    out.gauge_log = to_log(&prev.compose(g));
    out
}

fn log_as_finite(log: &[(Point, RatFuncL)]) -> Vec<(CRat, RatFuncL)> {
    log.iter()
        .filter_map(|(p, m)| match p {
            Point::Finite(z) => Some((z.clone(), m.clone())),
            Point::Infinity => None,
        })
        .collect()
}

fn to_log(g: &GaugeFactor) -> Vec<(Point, RatFuncL)> {
    g.factors.iter().map(|(z, m)| (Point::Finite(z.clone()), m.clone())).collect()
}

/// Write `f(z) = g(z^k)` as a rational function of `x = z^k`.
fn deflate(f: &BiRatFunc, k: u32, which: &'static str) -> Result<BiRatFunc, TransformError> {
    let k = k as usize;
    let shrink = |p: &Poly<RatFuncL>| -> Option<Poly<RatFuncL>> {
        let mut out = Vec::new();
        for (i, c) in p.coeffs().iter().enumerate() {
            if i % k == 0 {
                out.push(c.clone());
            } else if !c.is_zero() {
                return None;
            }
        }
        Some(Poly::new(out))
    };
    match (shrink(f.num()), shrink(f.den())) {
        (Some(n), Some(d)) => Ok(RatFunc::frac(n, d)),
        _ => Err(TransformError::NotCompatible { k: k as u32, which }),
    }
}

/// Change of variable `x = z^k`.
pub fn power_substitute(ode: &ParamODE, k: u32) -> Result<ParamODE, TransformError> {
    if k == 0 {
        return Err(TransformError::NotCompatible { k, which: "k" });
    }
    if k == 1 {
        return Ok(ode.clone());
    }
    let z: BiRatFunc = RatFunc::x();
    let kk = BiRatFunc::from_i64(k as i64);
    let zk = z.powi(k as i32);
    let p_hat = BiRatFunc::from_i64(k as i64 - 1)
        .div(&kk.mul(&zk))
        .add(&ode.p.div(&kk.mul(&z.powi(k as i32 - 1))));
    let q_hat = ode.q.div(&kk.mul(&kk).mul(&z.powi(2 * k as i32 - 2)));
    let p = deflate(&p_hat, k, "p")?;
    let q = deflate(&q_hat, k, "q")?;
    let mut out = ParamODE::new(&ode.name, "x", p, q);
    out.gauge_log = power_log(&ode.gauge_log, k);
    Ok(out)
}

/// Regroup `Π (z − z_i)^{μ_i}` in terms of `x = z^k` where the factors come
/// in complete orbits; others are dropped from the bookkeeping.
fn power_log(log: &[(Point, RatFuncL)], k: u32) -> Vec<(Point, RatFuncL)> {
    let mut out = Vec::new();
    let kk = CRat::int(k as i64);
    for (p, m) in log {
        if let Point::Finite(z) = p {
            if z.is_zero() {
                out.push((z.clone(), m.div(&RatFuncL::constant(kk.clone()))));
                continue;
            }
            let img = z.pow(k);
            // the orbit member with the smallest (re, im) represents the orbit
            let members: Vec<&(Point, RatFuncL)> = log
                .iter()
                .filter(|(q, _)| matches!(q, Point::Finite(w) if !w.is_zero() && w.pow(k) == img))
                .collect();
            if members.len() == k as usize && members.iter().all(|(_, mu)| mu == m) {
                let first = members.iter().filter_map(|(q, _)| match q {
                    Point::Finite(w) => Some(w),
                    _ => None,
                });
                let min = first.min_by(|a, b| (&a.re, &a.im).cmp(&(&b.re, &b.im))).unwrap();
                if min == z {
                    out.push((img, m.clone()));
                }
            }
        }
    }
    to_log(&GaugeFactor::new(out))
}

/// Change of variable `z = m(x)` followed by the gauge `G = w·H`.
pub fn mobius(ode: &ParamODE, m: &MobiusMap, accompanying: &GaugeFactor) -> Result<ParamODE, TransformError> {
    if m.a.mul(&m.d).sub(&m.b.mul(&m.c)).is_zero() {
        return Err(TransformError::DegenerateMap);
    }
    let mf = m.as_ratfunc();
    let m1 = mf.derivative();
    let m2 = m1.derivative();
    let m1sq = m1.mul(&m1);
    let p_x = m2.add(&ode.p.mul(&m1)).div(&m1sq);
    let q_x = ode.q.div(&m1sq);
    let back = m.inverse().as_ratfunc();
    let moved = ParamODE {
        name: ode.name.clone(),
        var: "z".into(),
        p: p_x.compose(&back),
        q: q_x.compose(&back),
        gauge_log: mobius_log(&ode.gauge_log, m),
    };
    Ok(gauge(&moved, accompanying))
}

fn mobius_log(log: &[(Point, RatFuncL)], m: &MobiusMap) -> Vec<(Point, RatFuncL)> {
    let mut out = Vec::new();
    let pole = m.apply(&Point::Infinity);
    for (p, mu) in log {
        if let Point::Finite(_) = p {
            if let Point::Finite(w) = m.apply(p) {
                out.push((w, mu.clone()));
            }
            if let Point::Finite(w) = &pole {
                out.push((w.clone(), mu.neg()));
            }
        }
    }
    to_log(&GaugeFactor::new(out))
}

/// Partner equation for `g̃ = (∂ − W) g` of `g'' + q g = 0` with
/// `q = −(W' + W²) − κ/h`.
pub fn susy_partner(schrod: &ParamODE, s: &SusyData) -> Result<ParamODE, TransformError> {
    if !schrod.p.is_zero() {
        return Err(TransformError::NotSchrodingerForm(format!(
            "first-order coefficient {}",
            fmt_bi(&schrod.p, &schrod.var)
        )));
    }
    let w = &s.w;
    let wp = w.derivative();
    let kappa_h = kconst(s.shift.clone()).div(&s.weight);
    let expected = wp.add(&w.mul(w)).add(&kappa_h).neg();
    if expected != schrod.q {
        return Err(TransformError::NotSchrodingerForm(format!(
            "q differs from −(W' + W²) − κ/h by {}",
            fmt_bi(&schrod.q.sub(&expected), &schrod.var)
        )));
    }
    let hl = s.weight.derivative().div(&s.weight);
    let q = hl.mul(w).add(&wp).sub(&w.mul(w)).sub(&kappa_h);
    Ok(ParamODE::new(&schrod.name, &schrod.var, hl, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::registry::{self, ground_state_log_derivative, potential_v, schrod_weight};
    use crate::fuchsian::{finite_singular_points, fuchs_check};

    #[test]
    fn trivial_gauge_and_inverse() {
        let ode = registry::specre();
        let id = GaugeFactor::default();
        assert!(gauge(&ode, &id).same_equation(&ode));
        let g = GaugeFactor::parse(&[("0", "-1"), ("1", "-λ/2"), ("-1", "-λ/2")]).unwrap();
        let back = gauge(&gauge(&ode, &g), &g.inverse());
        assert!(back.same_equation(&ode));
        assert!(back.gauge_log.is_empty());
    }

    #[test]
    fn gauge_group_action() {
        let ode = registry::specss();
        let a = GaugeFactor::parse(&[("0", "λ"), ("1", "1/2")]).unwrap();
        let b = GaugeFactor::parse(&[("0", "-1"), ("-1", "λ-3")]).unwrap();
        assert!(gauge(&gauge(&ode, &a), &b).same_equation(&gauge(&ode, &a.compose(&b))));
    }

    #[test]
    fn specre_to_specg() {
        let g = GaugeFactor::parse(&[("0", "-1"), ("1", "-λ/2"), ("-1", "-λ/2")]).unwrap();
        let out = gauge(&registry::specre(), &g);
        assert!(out.p.is_zero());
        assert!(out.same_equation(&registry::specg()));
    }

    #[test]
    fn power_identity_and_singular_points() {
        let ode = registry::specre();
        assert!(power_substitute(&ode, 1).unwrap().same_equation(&ode));
        let x = power_substitute(&ode, 2).unwrap();
        let pts = fuchs_check(&x).unwrap();
        let locs: Vec<Point> = pts.iter().map(|d| d.location.clone()).collect();
        assert_eq!(locs, vec![Point::int(-1), Point::int(0), Point::int(1), Point::Infinity]);
        let odd = ParamODE::new("odd", "z", RatFunc::x().sub(&BiRatFunc::one()).inv(), BiRatFunc::zero());
        assert!(matches!(power_substitute(&odd, 2), Err(TransformError::NotCompatible { .. })));
    }

    #[test]
    fn mobius_identity_and_images() {
        let ode = registry::specss_heun0();
        let id = mobius(&ode, &MobiusMap::identity(), &GaugeFactor::default()).unwrap();
        assert!(id.same_equation(&ode));
        let m = MobiusMap::ints(2, 0, 1, 1).unwrap();
        let imgs: Vec<Point> = [Point::int(0), Point::int(1), Point::int(-1), Point::Infinity].iter().map(|p| m.apply(p)).collect();
        assert_eq!(imgs, vec![Point::int(0), Point::int(1), Point::Infinity, Point::int(2)]);
        let out = mobius(&ode, &m, &GaugeFactor::parse(&[("2", "1+λ/2")]).unwrap()).unwrap();
        assert!(out.same_equation(&registry::specss_heun()));
        let fin: Vec<CRat> = finite_singular_points(&out).unwrap();
        assert_eq!(fin, vec![CRat::int(0), CRat::int(1), CRat::int(2)]);
        assert!(MobiusMap::ints(1, 2, 2, 4).is_err());
    }

    #[test]
    fn susy_ground_state() {
        let w = ground_state_log_derivative();
        // g₀ = (1 − ρ²)^{1/2} ρ² / (1 + ρ²)
        let g0 = GaugeFactor::parse(&[("1", "1/2"), ("-1", "1/2"), ("0", "2"), ("i", "-1"), ("-i", "-1")]).unwrap();
        let l = g0.log_derivative();
        assert_eq!(l, w);
        let second = l.derivative().add(&l.mul(&l));
        assert_eq!(second.sub(&potential_v()), schrod_weight().inv().neg());
        let s = SusyData { w, shift: registry::ground_state_shift(), weight: schrod_weight() };
        assert!(s.factorization_holds());
        assert!(susy_partner(&registry::specre(), &s).is_err());
        let partner = susy_partner(&registry::schrod(), &s).unwrap();
        let fin = gauge(&partner, &GaugeFactor::parse(&[("0", "1"), ("1", "λ/2-1"), ("-1", "λ/2-1")]).unwrap());
        assert!(fin.same_equation(&registry::specss()));
    }

    #[test]
    fn gauge_factor_json() {
        let g = GaugeFactor::parse(&[("0", "-1"), ("1", "-λ/2"), ("i", "λ^2/3")]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let h: GaugeFactor = serde_json::from_str(&s).unwrap();
        assert_eq!(g, h);
    }
}
