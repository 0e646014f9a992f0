//! The 5-D spectral equation for radial `f₁` against the ODE for
//! `f̂₁(ρ) = ρ f₁(ρ)`, both by finite differences.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const D1: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
const D2: [(f64, f64); 5] = [(-2.0, -1.0), (-1.0, 16.0), (0.0, -30.0), (1.0, 16.0), (2.0, -1.0)];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub lambda: Complex64,
    pub points: Vec<f64>,
    pub residual_5d: Vec<Complex64>,
    pub residual_radial: Vec<Complex64>,
    pub max_5d: f64,
    pub max_radial: f64,
    /// `max |R_radial(ρ) − ρ R_5d(ρ e)|`.
    pub max_discrepancy: f64,
    /// Largest single term of either equation, for relative comparisons.
    pub scale: f64,
}

impl ReductionReport {
    pub fn relative_discrepancy(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.max_discrepancy / self.scale
        }
    }
}

fn direction() -> [f64; 5] {
    let v = [1.0, 2.0, -1.0, 3.0, 1.0];
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.map(|x| x / n)
}

fn norm5(x: &[f64; 5]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn residual_5d(f1: &dyn Fn(f64) -> f64, lambda: Complex64, xi: [f64; 5], h: f64) -> (Complex64, f64) {
    let big_f = |x: [f64; 5]| f1(norm5(&x));
    let shifted = |j: usize, a: f64, k: usize, b: f64| {
        let mut x = xi;
        x[j] += a * h;
        x[k] += b * h;
        big_f(x)
    };
    let mut grad = [0.0; 5];
    let mut hess = [[0.0; 5]; 5];
    for j in 0..5 {
        grad[j] = D1.iter().map(|&(a, c)| c * shifted(j, a, j, 0.0)).sum::<f64>() / (12.0 * h);
        hess[j][j] = D2.iter().map(|&(a, c)| c * shifted(j, a, j, 0.0)).sum::<f64>() / (12.0 * h * h);
        for k in 0..j {
            let mut s = 0.0;
            for &(a, ca) in &D1 {
                for &(b, cb) in &D1 {
                    s += ca * cb * shifted(j, a, k, b);
                }
            }
            hess[j][k] = s / (144.0 * h * h);
            hess[k][j] = hess[j][k];
        }
    }
    let r2: f64 = xi.iter().map(|v| v * v).sum();
    let mut principal = 0.0;
    let mut radial = 0.0;
    for j in 0..5 {
        radial += xi[j] * grad[j];
        for k in 0..5 {
            let delta = if j == k { 1.0 } else { 0.0 };
            principal += (delta - xi[j] * xi[k]) * hess[j][k];
        }
    }
    let f = big_f(xi);
    let pot = 16.0 / (1.0 + r2).powi(2);
    let terms = [
        Complex64::new(-principal, 0.0),
        2.0 * (lambda + 2.0) * radial,
        (lambda + 1.0) * (lambda + 2.0) * f,
        Complex64::new(-pot * f, 0.0),
    ];
    (terms.iter().sum(), terms.iter().map(|t| t.norm()).fold(0.0, f64::max))
}

fn residual_radial(f1: &dyn Fn(f64) -> f64, lambda: Complex64, rho: f64, h: f64) -> (Complex64, f64) {
    let g = |r: f64| r * f1(r);
    let d1 = D1.iter().map(|&(a, c)| c * g(rho + a * h)).sum::<f64>() / (12.0 * h);
    let d2 = D2.iter().map(|&(a, c)| c * g(rho + a * h)).sum::<f64>() / (12.0 * h * h);
    let r2 = rho * rho;
    let v = 2.0 * (1.0 - 6.0 * r2 + r2 * r2) / (r2 * (1.0 + r2).powi(2));
    let terms = [
        Complex64::new(-(1.0 - r2) * d2, 0.0),
        Complex64::new(-2.0 / rho * d1, 0.0),
        2.0 * (lambda + 1.0) * rho * d1,
        lambda * (lambda + 1.0) * g(rho),
        Complex64::new(v * g(rho), 0.0),
    ];
    (terms.iter().sum(), terms.iter().map(|t| t.norm()).fold(0.0, f64::max))
}

/// Residuals of both forms at `ρ ∈ points` (the 5-D one at `ρ e` for a fixed
/// generic unit vector `e`).
pub fn radial_reduction_check(f1: &dyn Fn(f64) -> f64, lambda: Complex64, points: &[f64]) -> ReductionReport {
    let h = 5e-3;
    let e = direction();
    let mut r5 = Vec::new();
    let mut rr = Vec::new();
    let mut scale: f64 = 0.0;
    let mut disc: f64 = 0.0;
    for &rho in points {
        let (a, sa) = residual_5d(f1, lambda, e.map(|x| x * rho), h);
        let (b, sb) = residual_radial(f1, lambda, rho, h);
        scale = scale.max(sa * rho).max(sb);
        disc = disc.max((b - rho * a).norm());
        r5.push(a);
        rr.push(b);
    }
    let mx = |v: &[Complex64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    ReductionReport {
        lambda,
        points: points.to_vec(),
        max_5d: mx(&r5),
        max_radial: mx(&rr),
        residual_5d: r5,
        residual_radial: rr,
        max_discrepancy: disc,
        scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PTS: [f64; 6] = [0.1, 0.25, 0.4, 0.6, 0.75, 0.9];

    #[test]
    fn eigenfunction_and_zero() {
        let one = Complex64::new(1.0, 0.0);
        let r = radial_reduction_check(&|r| 1.0 / (1.0 + r * r), one, &PTS);
        assert!(r.max_5d < 1e-6 && r.max_radial < 1e-6, "{r:?}");
        let z = radial_reduction_check(&|_| 0.0, one, &PTS);
        assert_eq!((z.max_5d, z.max_radial), (0.0, 0.0));
    }

    #[test]
    fn bump_residuals_agree() {
        let f = |r: f64| (-(r - 0.3) * (r - 0.3) * 4.0).exp() * (1.0 + 0.3 * r * r);
        let r = radial_reduction_check(&f, Complex64::new(0.7, 1.3), &PTS);
        assert!(r.max_radial > 1e-2);
        assert!(r.relative_discrepancy() < 1e-6, "{}", r.relative_discrepancy());
    }
}
