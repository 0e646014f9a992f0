//! Second-order linear ODEs `f'' + p f' + q f = 0` with coefficients rational
//! in the independent variable and in λ: singular point classification,
//! indicial data and Frobenius series.

pub mod registry;
mod series;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::roots::numeric_roots;
use crate::algebra::{
    kconst, quadratic_roots, AlgebraError, BiRatFunc, CRat, Field, FmtVar, Poly, QuadraticRoots, RatFunc, RatFuncL,
    Ring,
};

pub use series::{frobenius_float, series_eval, FloatSeries, LocalExpansion, LocalForm, SeriesEval, SeriesSolution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuchsError {
    #[error("not Fuchsian at {point}: {which} has a pole of order {order}")]
    NotFuchsian { point: Point, which: &'static str, order: i64 },
    #[error("{0} is not a singular point")]
    NotSingular(Point),
    #[error("logarithmic case at {point}: exponent difference {difference} is a nonnegative integer")]
    LogCase { point: Point, difference: String },
    #[error("exponent at {0} is not a Gaussian rational for this λ")]
    IrrationalExponent(Point),
    #[error("singular points not computable exactly: {0}")]
    UnsupportedSingularity(String),
    #[error("|z − center| = {dist} is not below the convergence radius {radius}")]
    OutsideDisk { dist: f64, radius: f64 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Finite point or the point at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Finite(CRat),
    Infinity,
}

impl Point {
    pub fn int(n: i64) -> Point {
        Point::Finite(CRat::int(n))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(z) => write!(f, "{z}"),
            Point::Infinity => write!(f, "∞"),
        }
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Point::Finite(z) => z.serialize(s),
            Point::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Inf(String),
            Fin(CRat),
        }
        match Repr::deserialize(d)? {
            Repr::Inf(s) if s == "inf" => Ok(Point::Infinity),
            Repr::Inf(s) => Err(serde::de::Error::custom(format!("unknown point {s:?}"))),
            Repr::Fin(z) => Ok(Point::Finite(z)),
        }
    }
}

/// `f'' + p f' + q f = 0` together with the gauge factors applied so far.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamODE {
    pub name: String,
    /// Display name of the independent variable.
    pub var: String,
    pub p: BiRatFunc,
    pub q: BiRatFunc,
    /// Accumulated factors `Π (z − z_i)^{μ_i}` relating the unknown to the
    /// original one.
    #[serde(default)]
    pub gauge_log: Vec<(Point, RatFuncL)>,
}

impl ParamODE {
    pub fn new(name: &str, var: &str, p: BiRatFunc, q: BiRatFunc) -> Self {
        ParamODE { name: name.into(), var: var.into(), p, q, gauge_log: Vec::new() }
    }
    /// Normalize `a2 f'' + a1 f' + a0 f = 0`.
    pub fn from_general(name: &str, var: &str, a2: &BiRatFunc, a1: &BiRatFunc, a0: &BiRatFunc) -> Self {
        ParamODE::new(name, var, a1.div(a2), a0.div(a2))
    }
    /// Same equation modulo names and bookkeeping.
    pub fn same_equation(&self, o: &ParamODE) -> bool {
        self.p == o.p && self.q == o.q
    }
    pub fn pretty(&self) -> String {
        format!(
            "{v}'' + [{}] {v}' + [{}] {v} = 0",
            fmt_bi(&self.p, &self.var),
            fmt_bi(&self.q, &self.var),
            v = "f"
        )
    }
    /// The equation in `t = 1/z`.
    pub fn at_infinity(&self) -> ParamODE {
        let t = RatFunc::x();
        let inv_t: BiRatFunc = t.inv();
        let t2 = t.mul(&t);
        let p_inf = bi_const(2).div(&t).sub(&self.p.compose(&inv_t).div(&t2));
        let q_inf = self.q.compose(&inv_t).div(&t2.mul(&t2));
        ParamODE::new(&format!("{}@inf", self.name), "t", p_inf, q_inf)
    }
}

pub fn bi_const(n: i64) -> BiRatFunc {
    BiRatFunc::from_i64(n)
}

/// Human-readable form of a rational function in `(var, λ)`.
pub fn fmt_bi(f: &BiRatFunc, var: &str) -> String {
    let show = |p: &Poly<RatFuncL>| -> String {
        if p.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, c) in p.coeffs().iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = c.fmt_var("λ");
            let mon = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            parts.push(if k == 0 {
                format!("({cs})")
            } else if c.is_one() {
                mon
            } else {
                format!("({cs})*{mon}")
            });
        }
        parts.join(" + ")
    };
    if f.den().is_constant() {
        show(f.num())
    } else {
        format!("[{}]/[{}]", show(f.num()), show(f.den()))
    }
}

/// Kind of a classified point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PointKind {
    Ordinary,
    RegularSingular,
}

/// Resonance of the exponent pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Resonance {
    /// λ-independent difference.
    Constant { difference: CRat, resonant: bool },
    /// Difference depends on λ; resonant exactly when it is an integer.
    Conditional { difference: RatFuncL },
    /// Exponents not rational in λ; decided numerically at concrete λ.
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularPointData {
    pub location: Point,
    pub kind: PointKind,
    pub p0: RatFuncL,
    pub q0: RatFuncL,
    /// `s² + (p0 − 1) s + q0`, coefficients lowest first.
    pub indicial: Poly<RatFuncL>,
    pub exponents: Option<(RatFuncL, RatFuncL)>,
    pub resonance: Resonance,
}

/// Concrete exponent choice at a fixed λ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Top,
    Sub,
}

impl SingularPointData {
    /// Indicial polynomial at a concrete λ.
    pub fn indicial_at(&self, lambda: &CRat) -> Result<Poly<CRat>, FuchsError> {
        let c: Result<Vec<CRat>, _> = self.indicial.coeffs().iter().map(|c| c.eval(lambda)).collect();
        Ok(Poly::new(c?))
    }
    /// Exact exponents `(top, sub)` ordered by real part.
    pub fn exponents_at(&self, lambda: &CRat) -> Result<(CRat, CRat), FuchsError> {
        let p = self.indicial_at(lambda)?;
        match quadratic_roots(&p)? {
            QuadraticRoots::Exact(a, b) => Ok(order_pair(a, b)),
            QuadraticRoots::Approx { .. } => Err(FuchsError::IrrationalExponent(self.location.clone())),
        }
    }
    /// Floating exponents `(top, sub)`.
    pub fn exponents_at_c64(&self, lambda: Complex64) -> Result<(Complex64, Complex64), FuchsError> {
        let ev = |c: &RatFuncL| -> Result<Complex64, FuchsError> {
            let n = c.num().map(|x| x.to_c64()).eval(&lambda);
            let d = c.den().map(|x| x.to_c64()).eval(&lambda);
            if d.norm() == 0.0 {
                return Err(AlgebraError::Pole(format!("{lambda}")).into());
            }
            Ok(n / d)
        };
        let q0 = ev(&self.q0)?;
        let b = ev(&self.p0)? - 1.0;
        let s = (b * b - 4.0 * q0).sqrt();
        let (r1, r2) = ((-b + s) / 2.0, (-b - s) / 2.0);
        Ok(if (r1.re, r1.im) >= (r2.re, r2.im) { (r1, r2) } else { (r2, r1) })
    }
    /// `s₊ − s₋ ∈ ℕ₀` at this λ.
    pub fn is_resonant_at(&self, lambda: &CRat) -> Result<bool, FuchsError> {
        let (a, b) = self.exponents_at(lambda)?;
        let d = a.sub(&b);
        Ok(d.is_real() && d.re.is_integer())
    }
}

fn order_pair(a: CRat, b: CRat) -> (CRat, CRat) {
    if (&a.re, &a.im) >= (&b.re, &b.im) {
        (a, b)
    } else {
        (b, a)
    }
}

/// Pole order of `f` at `z0` (negative for a zero).
pub fn pole_order(f: &BiRatFunc, z0: &CRat) -> i64 {
    if f.is_zero() {
        return i64::MIN;
    }
    let lin = Poly::linear_root(&RatFunc::constant(z0.clone()));
    let mult = |p: &Poly<RatFuncL>| -> i64 {
        let mut m = 0;
        let mut cur = p.clone();
        loop {
            let (q, r) = cur.div_rem(&lin);
            if !r.is_zero() || cur.is_constant() {
                return m;
            }
            cur = q;
            m += 1;
        }
    };
    mult(f.den()) - mult(f.num())
}

fn leading_value(f: &BiRatFunc, z0: &CRat, power: i32) -> Result<RatFuncL, FuchsError> {
    let z = RatFunc::x();
    let lin: BiRatFunc = z.sub(&kconst(RatFunc::constant(z0.clone())));
    let g = f.mul(&lin.powi(power));
    Ok(g.eval(&RatFunc::constant(z0.clone()))?)
}

/// Roots of a constant-coefficient denominator, with multiplicity dropped.
fn gaussian_roots(p: &Poly<RatFuncL>) -> Result<Vec<CRat>, FuchsError> {
    let mut cur: Poly<CRat> = Poly::new(
        p.coeffs()
            .iter()
            .map(|c| c.as_constant().ok_or_else(|| FuchsError::UnsupportedSingularity(format!("λ-dependent denominator {}", c))))
            .collect::<Result<_, _>>()?,
    );
    let mut roots: Vec<CRat> = Vec::new();
    while !cur.is_constant() {
        let approx = numeric_roots(&cur);
        let mut found = None;
        for z in approx {
            let cand = CRat::new(rationalize(z.re), rationalize(z.im));
            if cur.eval(&cand).is_zero() {
                found = Some(cand);
                break;
            }
        }
        let r = found.ok_or_else(|| FuchsError::UnsupportedSingularity(format!("non-rational root of {cur}")))?;
        let lin = Poly::linear_root(&r);
        while cur.degree().unwrap_or(0) > 0 && cur.div_rem(&lin).1.is_zero() {
            cur = cur.exact_div(&lin);
        }
        roots.push(r);
    }
    roots.sort_by(|a, b| (&a.re, &a.im).cmp(&(&b.re, &b.im)));
    Ok(roots)
}

/// Best rational approximation with denominator at most 10⁴.
fn rationalize(x: f64) -> crate::algebra::Rat {
    use num_rational::Ratio;
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut v = x;
    for _ in 0..40 {
        let a = v.floor();
        if a.abs() > 1e12 {
            break;
        }
        let a = a as i64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > 10_000 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = v - a as f64;
        if frac.abs() < 1e-9 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 == 0 {
        return crate::algebra::rat_int(0);
    }
    Ratio::new(h1.into(), k1.into())
}

/// Finite singular points (poles of `p` or `q`) in ascending order.
pub fn finite_singular_points(ode: &ParamODE) -> Result<Vec<CRat>, FuchsError> {
    let mut all = gaussian_roots(ode.p.den())?;
    for r in gaussian_roots(ode.q.den())? {
        if !all.contains(&r) {
            all.push(r);
        }
    }
    all.sort_by(|a, b| (&a.re, &a.im).cmp(&(&b.re, &b.im)));
    Ok(all)
}

fn classify_finite(ode: &ParamODE, z0: &CRat) -> Result<SingularPointData, FuchsError> {
    let point = Point::Finite(z0.clone());
    let op = if ode.p.is_zero() { i64::MIN } else { pole_order(&ode.p, z0) };
    let oq = if ode.q.is_zero() { i64::MIN } else { pole_order(&ode.q, z0) };
    if op > 1 {
        return Err(FuchsError::NotFuchsian { point, which: "p", order: op });
    }
    if oq > 2 {
        return Err(FuchsError::NotFuchsian { point, which: "q", order: oq });
    }
    let kind = if op <= 0 && oq <= 0 { PointKind::Ordinary } else { PointKind::RegularSingular };
    let p0 = if ode.p.is_zero() { RatFuncL::zero() } else { leading_value(&ode.p, z0, 1)? };
    let q0 = if ode.q.is_zero() { RatFuncL::zero() } else { leading_value(&ode.q, z0, 2)? };
    Ok(point_data(point, kind, p0, q0))
}

fn point_data(location: Point, kind: PointKind, p0: RatFuncL, q0: RatFuncL) -> SingularPointData {
    let indicial = Poly::new(vec![q0.clone(), p0.sub(&RatFuncL::one()), RatFuncL::one()]);
    let exponents = crate::algebra::roots::quadratic_roots_exact(&indicial).ok().flatten();
    let (exponents, resonance) = match exponents {
        Some((a, b)) => {
            let d = a.sub(&b);
            let res = match d.as_constant() {
                Some(c) => {
                    let resonant = c.is_real() && c.re.is_integer();
                    Resonance::Constant { difference: c, resonant }
                }
                None => Resonance::Conditional { difference: d },
            };
            (Some((a, b)), res)
        }
        None => (None, Resonance::Undetermined),
    };
    SingularPointData { location, kind, p0, q0, indicial, exponents, resonance }
}

/// Classify all finite singular points and infinity.
pub fn fuchs_check(ode: &ParamODE) -> Result<Vec<SingularPointData>, FuchsError> {
    let mut out = Vec::new();
    for z0 in finite_singular_points(ode)? {
        out.push(classify_finite(ode, &z0)?);
    }
    let inf = ode.at_infinity();
    let mut d = classify_finite(&inf, &CRat::zero()).map_err(|e| match e {
        FuchsError::NotFuchsian { which, order, .. } => FuchsError::NotFuchsian { point: Point::Infinity, which, order },
        e => e,
    })?;
    if d.kind == PointKind::RegularSingular {
        d.location = Point::Infinity;
        out.push(d);
    }
    Ok(out)
}

/// Indicial data at a given regular singular point.
pub fn indicial(ode: &ParamODE, point: &Point) -> Result<SingularPointData, FuchsError> {
    let d = match point {
        Point::Finite(z0) => classify_finite(ode, z0)?,
        Point::Infinity => {
            let mut d = classify_finite(&ode.at_infinity(), &CRat::zero())?;
            d.location = Point::Infinity;
            d
        }
    };
    if d.kind == PointKind::Ordinary {
        return Err(FuchsError::NotSingular(point.clone()));
    }
    Ok(d)
}

/// Frobenius series at a regular singular point for a concrete λ, computed
/// exactly.
pub fn frobenius_series(
    ode: &ParamODE,
    point: &Point,
    branch: Branch,
    lambda: &CRat,
    order: usize,
) -> Result<SeriesSolution, FuchsError> {
    let data = indicial(ode, point)?;
    let (top, sub) = data.exponents_at(lambda)?;
    let sigma = match branch {
        Branch::Top => top.clone(),
        Branch::Sub => {
            let d = top.sub(&sub);
            if d.is_real() && d.re.is_integer() {
                return Err(FuchsError::LogCase { point: point.clone(), difference: d.to_string() });
            }
            sub
        }
    };
    let (local_ode, center) = match point {
        Point::Finite(z0) => (ode.clone(), z0.clone()),
        Point::Infinity => (ode.at_infinity(), CRat::zero()),
    };
    let radius = convergence_radius(ode, point)?;
    let loc = LocalForm::new(&local_ode, &center).at_exact(lambda)?;
    let mut s = SeriesSolution::new(point.clone(), lambda.clone(), sigma, loc, radius);
    s.extend(order)?;
    Ok(s)
}

/// Distance to the nearest other singular point (in `1/z` for infinity).
pub fn convergence_radius(ode: &ParamODE, point: &Point) -> Result<f64, FuchsError> {
    let sing = finite_singular_points(ode)?;
    Ok(match point {
        Point::Finite(z0) => {
            let c = z0.to_c64();
            sing.iter()
                .filter(|z| *z != z0)
                .map(|z| (z.to_c64() - c).norm())
                .fold(f64::INFINITY, f64::min)
        }
        Point::Infinity => {
            let m = sing.iter().map(|z| z.to_c64().norm()).fold(0.0, f64::max);
            if m == 0.0 {
                f64::INFINITY
            } else {
                1.0 / m
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{lam, rf_i};

    #[test]
    fn free_equation_has_only_infinity() {
        let ode = ParamODE::new("free", "z", BiRatFunc::zero(), BiRatFunc::zero());
        let pts = fuchs_check(&ode).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].location, Point::Infinity);
        let (a, b) = pts[0].exponents.clone().unwrap();
        let mut e = [a.as_constant().unwrap(), b.as_constant().unwrap()];
        e.sort_by(|x, y| x.re.cmp(&y.re));
        assert_eq!(e, [CRat::int(-1), CRat::int(0)]);
    }

    #[test]
    fn irregular_point_rejected() {
        let z = RatFunc::x();
        let ode = ParamODE::new("irr", "z", z.mul(&z).inv(), BiRatFunc::zero());
        assert!(matches!(fuchs_check(&ode), Err(FuchsError::NotFuchsian { which: "p", order: 2, .. })));
    }

    #[test]
    fn parametric_resonance() {
        let ode = registry::equation("spec").unwrap();
        let d = indicial(&ode, &Point::int(1)).unwrap();
        match &d.resonance {
            Resonance::Conditional { difference } => {
                let sq = difference.mul(difference);
                assert_eq!(sq, rf_i(&[1, -2, 1], &[1]));
            }
            r => panic!("unexpected {r:?}"),
        }
        assert!(d.is_resonant_at(&CRat::int(1)).unwrap());
        assert!(d.is_resonant_at(&CRat::int(0)).unwrap());
        assert!(!d.is_resonant_at(&CRat::frac(1, 2)).unwrap());
        let _ = lam();
    }
}
