//! Premises of the Phragmén–Lindelöf extension from the imaginary axis to
//! the closed right half-plane: pole-freeness and polynomial growth.

use num_complex::Complex64;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::axis::bivariate_parts;
use super::{lambda_coeffs, positive_from, CertifyError, QuasiSolution};
use crate::algebra::interval::ComplexBox;
use crate::algebra::roots::{is_hurwitz, numeric_roots};
use crate::algebra::{quadratic_roots, rat_to_string, ratfunc_enclose, BiRatFunc, CRat, Field, FmtVar, Poly, Rat, RatFunc, RatFuncL, Ring};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PremiseRecord {
    pub target: String,
    /// Exact Routh test of the denominator.
    pub den_hurwitz: bool,
    pub deg_num: i64,
    pub deg_den: i64,
    pub degree_ok: bool,
    /// `|f(z)| ≤ C e^{|z|^{1/2}}` on `Re z ≥ 0`.
    pub growth_constant: String,
    pub radius: String,
    /// Sampled max of `|f|` on the right half-plane, informational only.
    #[serde(with = "crate::algebra::hexf")]
    pub sample_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_within_bound: Option<bool>,
    pub holds: bool,
}

fn abs_up(c: &CRat) -> Rat {
    c.re.abs() + c.im.abs()
}

fn abs_low(c: &CRat) -> Rat {
    c.re.abs().max(c.im.abs())
}

fn pow2(k: u32) -> Rat {
    Rat::from_integer(num_bigint::BigInt::from(2u8).pow(k))
}

/// A denominator root with `Re ≥ 0`, exact when the degree allows.
fn half_plane_root(den: &Poly<CRat>) -> String {
    match den.degree() {
        Some(1) => return den.coeff(0).neg().div(&den.coeff(1)).to_string(),
        Some(2) => {
            if let Ok(crate::algebra::QuadraticRoots::Exact(a, b)) = quadratic_roots(den) {
                let r = if a.re >= b.re { a } else { b };
                return r.to_string();
            }
        }
        _ => {}
    }
    let r = numeric_roots(den).into_iter().fold(Complex64::new(f64::NEG_INFINITY, 0.0), |a, b| if b.re > a.re { b } else { a });
    format!("{:.6}{:+.6}i", r.re, r.im)
}

/// Tail bound: for `|z| ≥ R`, `|f(z)| ≤ K |z|^{deg N − deg D}`.
fn tail_constant(num: &Poly<CRat>, den: &Poly<CRat>) -> (Rat, Rat) {
    let dd = den.degree().unwrap_or(0);
    let lead = abs_low(&den.lead());
    let rest = |r: &Rat| -> Rat { den.coeffs()[..dd].iter().enumerate().map(|(k, c)| abs_up(c) * r.pow(k as i32 - dd as i32)).sum() };
    let mut k = 0;
    while rest(&pow2(k)) * Rat::from_integer(2.into()) > lead {
        k += 1;
    }
    let r = pow2(k);
    let den_low = &lead - rest(&r);
    let Some(dn) = num.degree() else { return (r, Rat::zero()) };
    let top: Rat = num.coeffs().iter().enumerate().map(|(j, c)| abs_up(c) * r.pow(j as i32 - dn as i32)).sum();
    (r, top / den_low)
}

/// `sup` of `|f|` over `[0, R] × [−R, R]` by box enclosures.
fn disc_bound(f: &RatFuncL, r: f64) -> Result<f64, CertifyError> {
    let mut stack = vec![(ComplexBox::from_bounds(0.0, r, -r, r), 0u32)];
    let mut best: f64 = 0.0;
    while let Some((b, depth)) = stack.pop() {
        let wide = b.re.width() > r / 4.0;
        match ratfunc_enclose(f, &b) {
            Ok(e) if !wide => best = best.max(e.abs_upper()),
            _ if depth >= 24 => {
                return Err(CertifyError::Inconclusive { margin: f64::NAN, detail: format!("growth constant near {b}") });
            }
            _ => {
                let (re1, re2) = b.re.bisect();
                let (im1, im2) = b.im.bisect();
                for (x, y) in [(re1, im1), (re1, im2), (re2, im1), (re2, im2)] {
                    stack.push((ComplexBox::new(x, y), depth + 1));
                }
            }
        }
    }
    Ok(best)
}

fn horner_c64(p: &Poly<CRat>, z: Complex64) -> Complex64 {
    p.coeffs().iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c.to_c64())
}

fn sample_max(f: &RatFuncL) -> f64 {
    let mut best: f64 = 0.0;
    for x in [0.0, 0.125, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
        for k in 0..=256 {
            let z = Complex64::new(x, -64.0 + 0.5 * k as f64);
            let v = (horner_c64(f.num(), z) / horner_c64(f.den(), z)).norm();
            if v.is_finite() {
                best = best.max(v);
            }
        }
    }
    best
}

/// Pole-freeness on `Re λ ≥ 0` and the growth premise for a rational `f`.
pub fn pl_premises(target: &str, f: &RatFuncL, bound: Option<&Rat>) -> Result<PremiseRecord, CertifyError> {
    let (num, den) = (f.num(), f.den());
    let den_hurwitz = den.degree() == Some(0) || is_hurwitz(den);
    if !den_hurwitz {
        return Err(CertifyError::PoleInHalfPlane(half_plane_root(den)));
    }
    let (deg_num, deg_den) = (num.deg_i().max(0), den.deg_i());
    let e = deg_num - deg_den;
    let (radius, k) = tail_constant(num, den);
    // sup_{r ≥ 1} r^e e^{−√r} ≤ 1 for e ≤ 1 and < 5 for e = 2
    let g = if e <= 1 { Rat::one() } else { Rat::from_integer(5.into()) };
    let r = num_traits::ToPrimitive::to_f64(&radius).unwrap_or(f64::MAX);
    let disc = disc_bound(f, r)?;
    let disc = Rat::from_float(disc).unwrap_or_else(Rat::zero);
    let c = disc.max(k * g);
    let sm = sample_max(f);
    let degree_ok = e <= 2;
    Ok(PremiseRecord {
        target: target.into(),
        den_hurwitz,
        deg_num,
        deg_den,
        degree_ok,
        growth_constant: rat_to_string(&c),
        radius: rat_to_string(&radius),
        sample_max: sm,
        sample_within_bound: bound.map(|m| sm <= num_traits::ToPrimitive::to_f64(m).unwrap_or(f64::INFINITY) * (1.0 + 1e-12)),
        holds: den_hurwitz && degree_ok,
    })
}

/// Pole-freeness of a whole family `f(n, λ)` for `n ≥ 1`: the cleared
/// denominator must be `c(n) Z(n,λ)^a Z(n+1,λ)^b` with `Z` the cleared
/// numerator of the quasi-solution and `c` positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyPremise {
    pub target: String,
    pub quasi_powers: [u32; 2],
    pub remainder: String,
    pub remainder_positive: bool,
    pub degree_ok: bool,
    pub holds: bool,
}

/// Polynomial in λ over `Q(i)(n)`.
fn over_n(parts: &[Poly<CRat>]) -> Poly<RatFuncL> {
    Poly::new(lambda_coeffs(parts).into_iter().map(RatFunc::from_poly).collect())
}

pub fn family_premises(target: &str, f: &BiRatFunc, q: &QuasiSolution) -> Result<FamilyPremise, CertifyError> {
    let (num, den) = bivariate_parts(f);
    let mut d = over_n(&den);
    let z = over_n(&bivariate_parts(&q.r).0);
    let z1 = over_n(&bivariate_parts(&q.shifted()).0);
    let mut powers = [0u32; 2];
    'strip: while d.degree().is_some_and(|k| k > 0) {
        for (i, factor) in [&z, &z1].into_iter().enumerate() {
            if factor.degree().is_some_and(|k| k > 0) && factor.divides(&d) {
                d = d.exact_div(factor);
                powers[i] += 1;
                continue 'strip;
            }
        }
        break;
    }
    let (rem, remainder_positive) = match d.degree() {
        Some(0) => {
            let c = d.coeff(0);
            let fix = |p: &Poly<CRat>| if p.eval(&CRat::one()).re.is_negative() { p.neg() } else { p.clone() };
            let ok = positive_from(&fix(c.num()), 1) && positive_from(&fix(c.den()), 1);
            (c.fmt_var("n"), ok)
        }
        _ => (format!("degree {} in λ", d.deg_i()), false),
    };
    let deg_l = |parts: &[Poly<CRat>]| parts.iter().map(|p| p.deg_i()).max().unwrap_or(-1);
    let degree_ok = deg_l(&num) <= deg_l(&den) + 2;
    Ok(FamilyPremise {
        target: target.into(),
        quasi_powers: powers,
        remainder: rem,
        remainder_positive,
        degree_ok,
        holds: remainder_positive && degree_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, rf_i};

    #[test]
    fn constant_half() {
        let f = rf_i(&[1], &[2]);
        let r = pl_premises("half", &f, Some(&rat(1, 2))).unwrap();
        assert!(r.holds);
        assert_eq!(r.growth_constant, "1/2");
        assert_eq!(r.sample_within_bound, Some(true));
    }

    #[test]
    fn pole_at_one() {
        let f = rf_i(&[1], &[-1, 1]);
        assert_eq!(pl_premises("pole", &f, None), Err(CertifyError::PoleInHalfPlane("1".into())));
    }

    #[test]
    fn growth_of_quadratic() {
        // λ²/(λ + 1): e = 1, C from the tail with R = 2
        let f = rf_i(&[0, 0, 1], &[1, 1]);
        let r = pl_premises("quad", &f, None).unwrap();
        assert!(r.holds);
        let c = crate::algebra::parse_rat(&r.growth_constant).unwrap();
        // the premise must dominate actual values, e.g. at z = 10: 100/11 ≤ C e^{√10}
        assert!(num_traits::ToPrimitive::to_f64(&c).unwrap() * 10f64.sqrt().exp() >= 100.0 / 11.0);
        let cubic = rf_i(&[0, 0, 0, 0, 1], &[1, 1]);
        assert!(!pl_premises("cubic", &cubic, None).unwrap().degree_ok);
    }
}
