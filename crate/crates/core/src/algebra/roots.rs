//! Root extraction: exact quadratics, an exact Hurwitz test and a numerical
//! simultaneous-iteration root finder for witnesses.

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use super::crat::CRat;
use super::field::{ExactSqrt, Rat};
use super::interval::{poly_enclose, ComplexBox};
use super::poly::Poly;
use super::AlgebraError;

#[derive(Clone, Debug, PartialEq)]
pub enum QuadraticRoots {
    /// Perfect-square discriminant: both roots exactly.
    Exact(CRat, CRat),
    /// Floating roots with a rigorous bound on `|p(root)|`.
    Approx { roots: [Complex64; 2], residual_bound: f64 },
}

impl QuadraticRoots {
    pub fn approx(&self) -> [Complex64; 2] {
        match self {
            QuadraticRoots::Exact(a, b) => [a.to_c64(), b.to_c64()],
            QuadraticRoots::Approx { roots, .. } => *roots,
        }
    }
}

/// Roots of `a s² + b s + c` over any field with exact square roots.
pub fn quadratic_roots_exact<F: ExactSqrt>(p: &Poly<F>) -> Result<Option<(F, F)>, AlgebraError> {
    if p.degree() != Some(2) {
        return Err(AlgebraError::Degree { expected: 2, got: p.deg_i() });
    }
    let (c, b, a) = (p.coeff(0), p.coeff(1), p.coeff(2));
    let disc = b.mul(&b).sub(&a.mul(&c).scale_i64(4));
    let Some(s) = disc.sqrt_exact() else { return Ok(None) };
    let two_a = a.scale_i64(2);
    let r1 = b.neg().add(&s).div(&two_a);
    let r2 = b.neg().sub(&s).div(&two_a);
    Ok(Some((r1, r2)))
}

pub fn quadratic_roots(p: &Poly<CRat>) -> Result<QuadraticRoots, AlgebraError> {
    if let Some((r1, r2)) = quadratic_roots_exact(p)? {
        return Ok(QuadraticRoots::Exact(r1, r2));
    }
    let (c, b, a) = (p.coeff(0).to_c64(), p.coeff(1).to_c64(), p.coeff(2).to_c64());
    let s = (b * b - 4.0 * a * c).sqrt();
    // pick the non-cancelling sign
    let q = if (b.conj() * s).re >= 0.0 { -0.5 * (b + s) } else { -0.5 * (b - s) };
    let r1 = q / a;
    let r2 = if q.norm() == 0.0 { r1 } else { c / q };
    let mut bound: f64 = 0.0;
    for r in [r1, r2] {
        bound = bound.max(poly_enclose(p, &ComplexBox::point(r.re, r.im)).abs_upper());
    }
    Ok(QuadraticRoots::Approx { roots: [r1, r2], residual_bound: bound })
}

/// Polynomial with conjugated coefficients.
pub fn conj_poly(p: &Poly<CRat>) -> Poly<CRat> {
    p.map(|c| c.conj())
}

/// Exact Routh test: true iff every root has strictly negative real part.
/// Complex coefficients are handled through `p·p̄`, which has real
/// coefficients and the same real parts of roots.
pub fn is_hurwitz(p: &Poly<CRat>) -> bool {
    if p.is_zero() {
        return false;
    }
    let real = if p.coeffs().iter().all(|c| c.is_real()) { p.clone() } else { p.mul(&conj_poly(p)) };
    let a: Vec<Rat> = real.coeffs().iter().map(|c| c.re.clone()).collect();
    routh_real(&a)
}

fn routh_real(a: &[Rat]) -> bool {
    let n = a.len() - 1;
    if n == 0 {
        return true;
    }
    let sign = if a[n].is_negative() { -<Rat as One>::one() } else { <Rat as One>::one() };
    let hi: Vec<Rat> = (0..=n).rev().step_by(2).map(|k| &a[k] * &sign).collect();
    let lo: Vec<Rat> = (0..n).rev().step_by(2).map(|k| &a[k] * &sign).collect();
    let mut rows = (hi, lo);
    for _ in 0..n {
        let (r0, r1) = (&rows.0, &rows.1);
        if r1.is_empty() || !r1[0].is_positive() {
            return false;
        }
        let get = |r: &Vec<Rat>, j: usize| r.get(j).cloned().unwrap_or_else(<Rat as Zero>::zero);
        let len = r0.len().saturating_sub(1);
        let next: Vec<Rat> = (0..len).map(|j| (&r1[0] * get(r0, j + 1) - &r0[0] * get(r1, j + 1)) / &r1[0]).collect();
        rows = (r1.clone(), next);
    }
    true
}

/// All roots numerically by Aberth iteration.
pub fn numeric_roots(p: &Poly<CRat>) -> Vec<Complex64> {
    let c: Vec<Complex64> = p.coeffs().iter().map(|x| x.to_c64()).collect();
    numeric_roots_c64(&c)
}

pub fn numeric_roots_c64(c: &[Complex64]) -> Vec<Complex64> {
    let mut c = c.to_vec();
    while c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    if c.len() < 2 {
        return Vec::new();
    }
    let n = c.len() - 1;
    let lead = c[n];
    let c: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let radius = 1.0 + c[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let eval = |x: Complex64| {
        let mut v = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for a in c.iter().rev() {
            d = d * x + v;
            v = v * x + a;
        }
        (v, d)
    };
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let (v, d) = eval(z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let step = ratio / (1.0 - ratio * s);
            if step.is_finite() {
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Poly<CRat> {
        Poly::new(c.iter().map(|&x| CRat::int(x)).collect())
    }

    #[test]
    fn hurwitz_basic() {
        assert!(is_hurwitz(&p(&[2, 3, 1]))); // (λ+1)(λ+2)
        assert!(!is_hurwitz(&p(&[-1, 1]))); // λ−1
        assert!(!is_hurwitz(&p(&[1, 0, 1]))); // ±i on the axis
        assert!(is_hurwitz(&p(&[6, 11, 6, 1])));
        assert!(!is_hurwitz(&p(&[1, 1, 1, 1]))); // roots −1, ±i
        // complex root −1+2i only
        let q = Poly::new(vec![CRat::gauss(1, -2), CRat::int(1)]);
        assert!(is_hurwitz(&q));
        let r = Poly::new(vec![CRat::gauss(-1, -2), CRat::int(1)]);
        assert!(!is_hurwitz(&r));
    }

    #[test]
    fn aberth_finds_roots() {
        let r = numeric_roots(&p(&[6, -5, 1]));
        assert!((r[0] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn irrational_quadratic_has_residual_bound() {
        let q = quadratic_roots(&p(&[-2, 0, 1])).unwrap();
        match q {
            QuadraticRoots::Approx { roots, residual_bound } => {
                assert!(residual_bound < 1e-14);
                assert!((roots[0].norm() - 2f64.sqrt()).abs() < 1e-15);
            }
            _ => panic!("expected approximate roots"),
        }
    }
}
