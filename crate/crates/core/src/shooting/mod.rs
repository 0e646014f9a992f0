//! Numerical cross-check of the spectrum: shoot the spectral equation from
//! both singular endpoints, match at an interior point and count zeros of
//! the Wronskian with the argument principle.

pub mod dopri;
pub mod reduction;
mod scan;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{BiRatFunc, CRat, Poly, Ring};
use crate::fuchsian::{frobenius_float, indicial, registry, FuchsError, LocalForm, ParamODE, Point};
use dopri::{integrate, State, Tolerance};

pub use reduction::{radial_reduction_check, ReductionReport};
pub use scan::{eigen_scan, Rect, ScanDiagnostics, ScanOptions, ScanResult, ZeroInfo};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShootError {
    #[error("integrator failure at λ = {lambda}: {detail}")]
    IntegratorFailure { lambda: Complex64, detail: String },
    #[error("W vanishes on the contour near λ = {0}")]
    ContourZero(Complex64),
    #[error("evaluation budget exceeded after {0} evaluations")]
    BudgetExceeded(usize),
    #[error("λ = {lambda} is not an eigenvalue: normalized |W| = {residual:e}")]
    NotAnEigenvalue { lambda: Complex64, residual: f64 },
    #[error("λ = {0} is a pole of the normalized mismatch")]
    Excluded(Complex64),
    #[error("bad rectangle: {0}")]
    BadRect(String),
    #[error(transparent)]
    Series(#[from] FuchsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    /// Matching point in `(0, 1)`.
    pub rho_m: f64,
    /// Series radius around each endpoint before the integrator takes over.
    pub handoff: f64,
    pub rtol: f64,
    /// Series terms are summed until they drop below this, relative.
    pub series_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { rho_m: 0.5, handoff: 0.3, rtol: 1e-12, series_tol: 1e-17 }
    }
}

/// Value and derivative of both endpoint branches at the matching point.
#[derive(Clone, Copy, Debug)]
pub struct Branches {
    pub left: State,
    pub right: State,
}

impl Branches {
    pub fn wronskian(&self) -> Complex64 {
        self.left[0] * self.right[1] - self.left[1] * self.right[0]
    }
    pub fn normalized(&self) -> f64 {
        let n = |s: &State| (s[0].norm_sqr() + s[1].norm_sqr()).sqrt();
        self.wronskian().norm() / (n(&self.left) * n(&self.right))
    }
}

/// `f'' + p f' + q f = 0` with `p`, `q` specialized at a complex λ.
struct Coeffs {
    pn: Poly<Complex64>,
    pd: Poly<Complex64>,
    qn: Poly<Complex64>,
    qd: Poly<Complex64>,
}

fn horner(p: &Poly<Complex64>, x: Complex64) -> Complex64 {
    p.coeffs().iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
}

fn spec_c64(f: &BiRatFunc, lambda: Complex64) -> (Poly<Complex64>, Poly<Complex64>) {
    let ev = |p: &Poly<crate::algebra::RatFuncL>| {
        p.map(|c| horner(&c.num().map(|x| x.to_c64()), lambda) / horner(&c.den().map(|x| x.to_c64()), lambda))
    };
    (ev(f.num()), ev(f.den()))
}

impl Coeffs {
    fn new(ode: &ParamODE, lambda: Complex64) -> Self {
        let (pn, pd) = spec_c64(&ode.p, lambda);
        let (qn, qd) = spec_c64(&ode.q, lambda);
        Coeffs { pn, pd, qn, qd }
    }
    fn rhs(&self, t: f64, y: &State) -> State {
        let x = Complex64::new(t, 0.0);
        let p = horner(&self.pn, x) / horner(&self.pd, x);
        let q = horner(&self.qn, x) / horner(&self.qd, x);
        [y[1], -p * y[1] - q * y[0]]
    }
}

/// Mismatch function of the spectral equation on `[0, 1]`: the branch with
/// exponent 1 at `ρ = 0` against the analytic branch at `ρ = 1`.
#[derive(Clone, Debug)]
pub struct Shooter {
    pub ode: ParamODE,
    pub settings: Settings,
    left_exponent: Complex64,
    form0: LocalForm,
    form1: LocalForm,
}

const MAX_ORDER: usize = 4000;

impl Shooter {
    pub fn new(settings: Settings) -> Result<Self, ShootError> {
        Self::for_equation(registry::spec(), settings)
    }

    pub fn for_equation(ode: ParamODE, settings: Settings) -> Result<Self, ShootError> {
        let zero = CRat::zero();
        let one = CRat::one();
        let d0 = indicial(&ode, &Point::Finite(zero.clone()))?;
        let d1 = indicial(&ode, &Point::Finite(one.clone()))?;
        if !d1.q0.is_zero() {
            return Err(ShootError::BadRect("exponent 0 is not admissible at ρ = 1".into()));
        }
        // exponents at 0 do not depend on λ for this family
        let (top, _) = d0.exponents_at_c64(Complex64::new(2.0, 0.0))?;
        if !(0.0 < settings.handoff && settings.handoff <= settings.rho_m && settings.rho_m <= 1.0 - settings.handoff) {
            return Err(ShootError::BadRect(format!("handoff {} and ρ_m {} incompatible", settings.handoff, settings.rho_m)));
        }
        Ok(Shooter { form0: LocalForm::new(&ode, &zero), form1: LocalForm::new(&ode, &one), ode, settings, left_exponent: top })
    }

    fn tol(&self) -> Tolerance {
        Tolerance { rtol: self.settings.rtol, atol: 1e-300, ..Tolerance::default() }
    }

    /// `(f, f')` of the left branch at `x` inside the series disk.
    fn left_series(&self, lambda: Complex64, x: f64) -> Result<State, ShootError> {
        let mut s = frobenius_float(&self.form0, &Point::Finite(CRat::zero()), self.left_exponent, lambda, 1.0)?;
        let (v, d, _) = s.eval_local(Complex64::new(x, 0.0), self.settings.series_tol, MAX_ORDER)?;
        Ok([v, d])
    }

    fn right_series(&self, lambda: Complex64, rho: f64) -> Result<State, ShootError> {
        let mut s = frobenius_float(&self.form1, &Point::Finite(CRat::one()), Complex64::new(0.0, 0.0), lambda, 1.0)?;
        let (v, d, _) = s.eval_local(Complex64::new(rho - 1.0, 0.0), self.settings.series_tol, MAX_ORDER)?;
        Ok([v, d])
    }

    fn carry(&self, lambda: Complex64, from: f64, y: State, to: f64) -> Result<State, ShootError> {
        let c = Coeffs::new(&self.ode, lambda);
        integrate(|t, y| c.rhs(t, y), from, y, to, &self.tol())
            .map(|r| r.0)
            .map_err(|detail| ShootError::IntegratorFailure { lambda, detail })
    }

    /// Both branches at `ρ_m`; the right one is scaled by λ to cancel its
    /// pole at `λ = 0`.
    pub fn branches(&self, lambda: Complex64) -> Result<Branches, ShootError> {
        let (h, m) = (self.settings.handoff, self.settings.rho_m);
        let left = self.carry(lambda, h, self.left_series(lambda, h)?, m)?;
        let r = self.carry(lambda, 1.0 - h, self.right_series(lambda, 1.0 - h)?, m)?;
        Ok(Branches { left, right: [r[0] * lambda, r[1] * lambda] })
    }

    fn near_resonance(lambda: Complex64) -> Option<i64> {
        let k = lambda.re.round();
        (k <= 0.0 && (lambda - k).norm() < 1e-6).then_some(k as i64)
    }

    /// `W(λ)`, holomorphic on `Re λ > −1`.
    pub fn mismatch(&self, lambda: Complex64) -> Result<Complex64, ShootError> {
        match Self::near_resonance(lambda) {
            Some(0) => {
                // mean value over a small circle
                let (r, m) = (1e-2, 32);
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..m {
                    let z = lambda + Complex64::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / m as f64);
                    acc += self.branches(z)?.wronskian();
                }
                Ok(acc / m as f64)
            }
            Some(_) => Err(ShootError::Excluded(lambda)),
            None => Ok(self.branches(lambda)?.wronskian()),
        }
    }

    /// `|W|` divided by the norms of both branch vectors at `ρ_m`.
    pub fn normalized_mismatch(&self, lambda: Complex64) -> Result<f64, ShootError> {
        match Self::near_resonance(lambda) {
            Some(0) => {
                let z = lambda + Complex64::new(1e-2, 0.0);
                let b = self.branches(z)?;
                let n = |s: &State| (s[0].norm_sqr() + s[1].norm_sqr()).sqrt();
                Ok(self.mismatch(lambda)?.norm() / (n(&b.left) * n(&b.right)))
            }
            Some(_) => Err(ShootError::Excluded(lambda)),
            None => Ok(self.branches(lambda)?.normalized()),
        }
    }

    /// Largest relative Cauchy–Riemann defect `|∂_y W − i ∂_x W| / |W'|`.
    pub fn cauchy_riemann_residual(&self, points: &[Complex64], h: f64) -> Result<f64, ShootError> {
        let mut worst: f64 = 0.0;
        for &z in points {
            let dx = (self.mismatch(z + h)? - self.mismatch(z - h)?) / (2.0 * h);
            let ih = Complex64::new(0.0, h);
            let dy = (self.mismatch(z + ih)? - self.mismatch(z - ih)?) / (2.0 * h);
            let d = (dy - Complex64::i() * dx).norm() / dx.norm().max(f64::MIN_POSITIVE);
            worst = worst.max(d);
        }
        Ok(worst)
    }

    /// Newton iteration on `W` with a central-difference derivative.
    pub fn refine(&self, start: Complex64, max_iter: usize) -> Result<Complex64, ShootError> {
        let mut z = start;
        for _ in 0..max_iter {
            let h = 1e-6 * z.norm().max(1.0);
            let w = self.mismatch(z)?;
            let d = (self.mismatch(z + h)? - self.mismatch(z - h)?) / (2.0 * h);
            if d.norm() == 0.0 {
                break;
            }
            let step = w / d;
            z -= step;
            if step.norm() < 1e-14 * z.norm().max(1.0) {
                break;
            }
        }
        Ok(z)
    }

    /// Eigenfunction normalized by `f'(0) = 1`, sampled at `ρ_j = j/points`.
    pub fn eigenfunction(&self, lambda: Complex64, points: usize, tol: f64) -> Result<EigenProfile, ShootError> {
        let residual = self.normalized_mismatch(lambda)?;
        if residual > tol {
            return Err(ShootError::NotAnEigenvalue { lambda, residual });
        }
        let (h, m) = (self.settings.handoff, self.settings.rho_m);
        let grid: Vec<f64> = (0..=points).map(|j| j as f64 / points as f64).collect();
        let c = Coeffs::new(&self.ode, lambda);
        let tol_i = self.tol();
        let step = |from: f64, y: State, to: f64| {
            integrate(|t, y| c.rhs(t, y), from, y, to, &tol_i).map(|r| r.0).map_err(|detail| ShootError::IntegratorFailure { lambda, detail })
        };
        let left_m = step(h, self.left_series(lambda, h)?, m)?;
        let right_m = step(1.0 - h, self.right_series(lambda, 1.0 - h)?, m)?;
        // match values, falling back to derivatives when the value vanishes
        let scale = if right_m[0].norm() > right_m[1].norm() * 1e-8 { left_m[0] / right_m[0] } else { left_m[1] / right_m[1] };
        let mut values = Vec::with_capacity(grid.len());
        for &rho in &grid {
            let v = if rho <= h {
                self.left_series(lambda, rho)?[0]
            } else if rho <= m {
                step(h, self.left_series(lambda, h)?, rho)?[0]
            } else if rho < 1.0 - h {
                step(1.0 - h, self.right_series(lambda, 1.0 - h)?, rho)?[0] * scale
            } else {
                self.right_series(lambda, rho)?[0] * scale
            };
            values.push(v);
        }
        Ok(EigenProfile { lambda, rho: grid, values, normalized_mismatch: residual })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenProfile {
    pub lambda: Complex64,
    pub rho: Vec<f64>,
    pub values: Vec<Complex64>,
    pub normalized_mismatch: f64,
}

impl EigenProfile {
    pub fn sup_distance(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.rho.iter().zip(&self.values).map(|(&r, v)| (v - f(r)).norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn symmetry_mode() {
        let s = Shooter::new(Settings::default()).unwrap();
        assert!(s.normalized_mismatch(c(1.0, 0.0)).unwrap() < 1e-8);
        let w = s.mismatch(c(1.0, 1.0)).unwrap();
        let wb = s.mismatch(c(1.0, -1.0)).unwrap();
        assert!((w - wb.conj()).norm() < 1e-10 * w.norm());
        assert!(s.normalized_mismatch(c(2.0, 0.0)).unwrap() > 1e-4);
        let e = s.eigenfunction(c(1.0, 0.0), 200, 1e-6).unwrap();
        assert!(e.sup_distance(|r| r / (1.0 + r * r)) < 1e-6);
        assert!(e.values[0].norm() < 1e-15);
        assert!((e.values[200] - 0.5).norm() < 1e-6);
        assert!(matches!(s.eigenfunction(c(2.0, 0.0), 10, 1e-6), Err(ShootError::NotAnEigenvalue { .. })));
    }

    #[test]
    fn lambda_zero_is_regular() {
        let s = Shooter::new(Settings::default()).unwrap();
        let w0 = s.mismatch(c(0.0, 0.0)).unwrap();
        let w1 = s.mismatch(c(0.05, 0.0)).unwrap();
        let w2 = s.mismatch(c(-0.05, 0.0)).unwrap();
        // smooth across the removed pole
        assert!((w1 + w2 - 2.0 * w0).norm() < 0.05 * w0.norm(), "{w0} {w1} {w2}");
        assert!(w0.norm() > 0.0);
        assert!(matches!(s.mismatch(c(-2.0, 0.0)), Err(ShootError::Excluded(_))));
    }

    #[test]
    fn holomorphic() {
        let s = Shooter::new(Settings::default()).unwrap();
        let pts = [c(0.5, 0.5), c(2.0, -3.0), c(1.2, 7.0)];
        assert!(s.cauchy_riemann_residual(&pts, 1e-4).unwrap() < 1e-6);
    }
}
