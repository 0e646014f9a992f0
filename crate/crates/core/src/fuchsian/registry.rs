//! Built-in named equations of the transformation chain.

use super::ParamODE;
use crate::algebra::{bq, kconst, lam, rf_i, zvar, BiRatFunc, Field, Ring};

pub const NAMES: [&str; 7] = ["spec", "specre", "specg", "Schrod", "specss", "specssHeun0", "specssHeun"];

/// Short description of each registered equation.
pub fn description(name: &str) -> Option<&'static str> {
    Some(match name {
        "spec" => "spectral equation in original form, potential 2cos(4 arctan ρ)/ρ²",
        "specre" => "spectral equation solved for f'', potential V",
        "specg" => "first-derivative-free form g'' − V g = λ(λ−2)(1−ρ²)⁻² g",
        "Schrod" => "Schrödinger form with ground-state shift (λ−1)²",
        "specss" => "supersymmetric partner with potential 2(3−ρ²)/(ρ²(1+ρ²))",
        "specssHeun0" => "Heun form in x = ρ², singular points 0, ±1, ∞",
        "specssHeun" => "Heun form after x ↦ 2x/(x+1), singular points 0, 1, 2, ∞",
        _ => return None,
    })
}

fn l() -> BiRatFunc {
    kconst(lam())
}

fn one() -> BiRatFunc {
    BiRatFunc::one()
}

/// `1 − ρ²`
fn one_minus_r2() -> BiRatFunc {
    let r = zvar();
    one().sub(&r.mul(&r))
}

/// `1 + ρ²`
fn one_plus_r2() -> BiRatFunc {
    let r = zvar();
    one().add(&r.mul(&r))
}

/// `cos(4 arctan ρ)` via `cos 2θ = (1 − tan²θ)/(1 + tan²θ)` and the double
/// angle formula.
pub fn cos_four_arctan() -> BiRatFunc {
    let c2 = one_minus_r2().div(&one_plus_r2());
    c2.mul(&c2).scale_i64(2).sub(&one())
}

/// `V(ρ) = 2(1 − 6ρ² + ρ⁴)/(ρ²(1 − ρ²)(1 + ρ²)²)`
pub fn potential_v() -> BiRatFunc {
    let r = zvar();
    let r2 = r.mul(&r);
    let num = one().sub(&r2.scale_i64(6)).add(&r2.mul(&r2)).scale_i64(2);
    let op = one_plus_r2();
    num.div(&r2.mul(&one_minus_r2()).mul(&op).mul(&op))
}

/// Coefficients `(a2, a1, a0)` of the original form with a given potential
/// term `U(ρ)`:  `−(1−ρ²)f'' − (2/ρ)f' + 2(λ+1)ρ f' + U f + λ(λ+1) f = 0`.
fn original_form(u: &BiRatFunc) -> (BiRatFunc, BiRatFunc, BiRatFunc) {
    let r = zvar();
    let lp1 = l().add(&one());
    let a2 = one_minus_r2().neg();
    let a1 = bq(-2, 1).div(&r).add(&lp1.mul(&r).scale_i64(2));
    let a0 = u.add(&l().mul(&lp1));
    (a2, a1, a0)
}

pub fn spec() -> ParamODE {
    let r = zvar();
    spec_with_potential("spec", &cos_four_arctan().scale_i64(2).div(&r.mul(&r)))
}

/// Original form with an arbitrary potential term.
pub fn spec_with_potential(name: &str, u: &BiRatFunc) -> ParamODE {
    let (a2, a1, a0) = original_form(u);
    ParamODE::from_general(name, "ρ", &a2, &a1, &a0)
}

pub fn specre() -> ParamODE {
    let r = zvar();
    let p = one().sub(&l().add(&one()).mul(&r.mul(&r))).scale_i64(2).div(&r.mul(&one_minus_r2()));
    let lam_term = l().mul(&l().add(&one())).div(&one_minus_r2());
    let q = potential_v().add(&lam_term).neg();
    ParamODE::new("specre", "ρ", p, q)
}

pub fn specg() -> ParamODE {
    let w = one_minus_r2();
    let rhs = l().mul(&l().sub(&bq(2, 1))).div(&w.mul(&w));
    ParamODE::new("specg", "ρ", BiRatFunc::zero(), potential_v().add(&rhs).neg())
}

/// Weight `h = (1 − ρ²)²` of the Schrödinger form.
pub fn schrod_weight() -> BiRatFunc {
    let w = one_minus_r2();
    w.mul(&w)
}

pub fn schrod() -> ParamODE {
    let h = schrod_weight();
    let lm1 = l().sub(&one());
    let q = one().div(&h).sub(&potential_v()).sub(&lm1.mul(&lm1).div(&h));
    ParamODE::new("Schrod", "ρ", BiRatFunc::zero(), q)
}

pub fn specss() -> ParamODE {
    let r = zvar();
    let r2 = r.mul(&r);
    let u = bq(3, 1).sub(&r2).scale_i64(2).div(&r2.mul(&one_plus_r2()));
    let (a2, a1, a0) = original_form(&u);
    ParamODE::from_general("specss", "ρ", &a2, &a1, &a0)
}

pub fn specss_heun0() -> ParamODE {
    let x = zvar();
    let p = bq(7, 2).div(&x).add(&l().div(&x.sub(&one())));
    let num = kconst(rf_i(&[6, 5, 1], &[1])).mul(&x).add(&kconst(rf_i(&[-2, 5, 1], &[1])));
    let q = num.div(&x.mul(&x.sub(&one())).mul(&x.add(&one()))).mul(&bq(1, 4));
    ParamODE::new("specssHeun0", "x", p, q)
}

pub fn specss_heun() -> ParamODE {
    let z = zvar();
    let two = bq(2, 1);
    let p = bq(7, 2).div(&z).add(&l().div(&z.sub(&one()))).add(&one().div(&z.sub(&two).scale_i64(2)));
    let num = kconst(rf_i(&[8, 6, 1], &[1])).mul(&z).sub(&kconst(rf_i(&[12, 12, 1], &[1])));
    let q = num.div(&z.mul(&z.sub(&one())).mul(&z.sub(&two))).mul(&bq(1, 4));
    ParamODE::new("specssHeun", "z", p, q)
}

pub fn equation(name: &str) -> Option<ParamODE> {
    Some(match name {
        "spec" => spec(),
        "specre" => specre(),
        "specg" => specg(),
        "Schrod" => schrod(),
        "specss" => specss(),
        "specssHeun0" => specss_heun0(),
        "specssHeun" => specss_heun(),
        _ => return None,
    })
}

/// `W = g₀'/g₀ = (2 − 3ρ² − ρ⁴)/(ρ(1 − ρ²)(1 + ρ²))`
pub fn ground_state_log_derivative() -> BiRatFunc {
    let r = zvar();
    let r2 = r.mul(&r);
    let num = bq(2, 1).sub(&r2.scale_i64(3)).sub(&r2.mul(&r2));
    num.div(&r.mul(&one_minus_r2()).mul(&one_plus_r2()))
}

/// `(λ − 1)²`
pub fn ground_state_shift() -> crate::algebra::RatFuncL {
    rf_i(&[1, -2, 1], &[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{CRat, FmtVar};
    use crate::fuchsian::{fuchs_check, indicial, Point};

    fn locations(name: &str) -> Vec<Point> {
        fuchs_check(&equation(name).unwrap()).unwrap().into_iter().map(|d| d.location).collect()
    }

    #[test]
    fn spec_equals_specre() {
        assert!(spec().same_equation(&specre()));
        assert!(specg().same_equation(&schrod()));
    }

    #[test]
    fn singular_sets() {
        let mut want = vec![
            Point::Finite(CRat::gauss(-1, 0)),
            Point::Finite(CRat::gauss(0, -1)),
            Point::Finite(CRat::gauss(0, 0)),
            Point::Finite(CRat::gauss(0, 1)),
            Point::Finite(CRat::gauss(1, 0)),
            Point::Infinity,
        ];
        assert_eq!(locations("specre"), want);
        want = vec![Point::int(0), Point::int(1), Point::int(2), Point::Infinity];
        assert_eq!(locations("specssHeun"), want);
    }

    #[test]
    fn indicial_examples() {
        let d = indicial(&spec(), &Point::int(0)).unwrap();
        assert_eq!(d.indicial.fmt_var("s"), "s^2 + s + -2".replace("+ -", "- "));
        let (a, b) = d.exponents.unwrap();
        let mut e = [a.as_constant().unwrap(), b.as_constant().unwrap()];
        e.sort_by(|x, y| x.re.cmp(&y.re));
        assert_eq!(e, [CRat::int(-2), CRat::int(1)]);
        let d = indicial(&specss(), &Point::int(0)).unwrap();
        assert_eq!(d.exponents_at(&CRat::int(3)).unwrap(), (CRat::int(2), CRat::int(-3)));
        let d = indicial(&spec(), &Point::int(1)).unwrap();
        assert_eq!(d.exponents_at(&CRat::int(3)).unwrap(), (CRat::int(0), CRat::int(-2)));
        assert_eq!(d.exponents_at(&CRat::int(-3)).unwrap(), (CRat::int(4), CRat::int(0)));
        let d = indicial(&specss_heun(), &Point::int(0)).unwrap();
        assert_eq!(d.exponents_at(&CRat::int(0)).unwrap(), (CRat::int(0), CRat::frac(-5, 2)));
    }

    #[test]
    fn frobenius_examples() {
        use crate::fuchsian::{frobenius_series, series_eval, Branch};
        let mut s = frobenius_series(&spec(), &Point::int(0), Branch::Top, &CRat::int(1), 40).unwrap();
        assert_eq!(s.exponent, CRat::int(1));
        for (k, a) in s.coeffs.iter().enumerate() {
            let want = if k % 2 == 1 { 0 } else if k % 4 == 0 { 1 } else { -1 };
            assert_eq!(*a, CRat::int(want), "a_{k}");
        }
        assert!(s.residual_valuation(40).unwrap() >= 41);
        let v = series_eval(&mut s, num_complex::Complex64::new(0.5, 0.0), 40).unwrap();
        assert!((v.value.re - 0.4).abs() < 1e-12 && v.value.im == 0.0);

        let h = frobenius_series(&specss_heun(), &Point::int(0), Branch::Top, &CRat::int(0), 2).unwrap();
        assert_eq!(h.coeffs, vec![CRat::int(1), CRat::frac(3, 7), CRat::frac(2, 9)]);
        let z = frobenius_series(&specss_heun(), &Point::int(0), Branch::Top, &CRat::int(0), 0).unwrap();
        assert_eq!(z.coeffs, vec![CRat::int(1)]);
    }
}
