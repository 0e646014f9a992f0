use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    l2_norm_physical, s0_semigroup, similarity_propagate, sin_prop, sobolev_norm, wave_propagate, Branch, RadialProfile,
    Resolution, SimError, StateVector, DIM,
};

/// `P(r²) e^{−a r²}` with `P` given lowest degree first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFn {
    pub name: String,
    pub poly: Vec<f64>,
    pub a: f64,
}

fn peval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

fn pderiv(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect()
}

impl TestFn {
    pub fn value(&self, r: f64) -> f64 {
        let x = r * r;
        peval(&self.poly, x) * (-self.a * x).exp()
    }
    /// Radial Laplacian on R⁵: `10 q'(x) + 4x q''(x)` for `f = q(r²)`.
    pub fn laplacian(&self, r: f64) -> f64 {
        let x = r * r;
        let (p, p1, p2) = (peval(&self.poly, x), peval(&pderiv(&self.poly), x), peval(&pderiv(&pderiv(&self.poly)), x));
        let e = (-self.a * x).exp();
        let q1 = (p1 - self.a * p) * e;
        let q2 = (p2 - 2.0 * self.a * p1 + self.a * self.a * p) * e;
        10.0 * q1 + 4.0 * x * q2
    }
    /// `r ∂_r f`
    pub fn euler(&self, r: f64) -> f64 {
        let x = r * r;
        let q1 = (peval(&pderiv(&self.poly), x) - self.a * peval(&self.poly, x)) * (-self.a * x).exp();
        2.0 * x * q1
    }
    /// `x ↦ f(sx)`
    pub fn dilated(&self, s: f64) -> TestFn {
        let s2 = s * s;
        TestFn {
            name: format!("{}@{s}", self.name),
            poly: self.poly.iter().enumerate().map(|(k, v)| v * s2.powi(k as i32)).collect(),
            a: self.a * s2,
        }
    }
    pub fn profile(&self, res: &Resolution) -> Result<RadialProfile, SimError> {
        RadialProfile::from_fn(|r| self.value(r), res)
    }
}

pub fn test_class() -> Vec<TestFn> {
    vec![
        TestFn { name: "gauss".into(), poly: vec![1.0], a: PI },
        TestFn { name: "gauss_quadratic".into(), poly: vec![1.0, 1.0], a: 1.0 },
        TestFn { name: "gauss_quartic".into(), poly: vec![1.0, -0.5, 0.1], a: 2.0 },
        TestFn { name: "wide_bump".into(), poly: vec![0.3, 0.0, 0.2], a: 0.8 },
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub resolution: Resolution,
    pub times: Vec<f64>,
    pub taus: Vec<f64>,
    /// Sweep for the slope fits.
    pub fit_taus: Vec<f64>,
    /// Later sweep for the unnormalized fit, past the free-flow transient.
    pub late_taus: Vec<f64>,
    pub ratio_slack: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            resolution: Resolution::default(),
            times: vec![0.5, 1.0, 2.0],
            taus: vec![0.5, 1.0, 2.0],
            fit_taus: (0..=12).map(|j| 0.25 * j as f64).collect(),
            late_taus: (0..=20).map(|j| 3.0 + 0.25 * j as f64).collect(),
            ratio_slack: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub bound: String,
    pub profile: String,
    pub s: f64,
    /// `t` for the free propagators, `τ` in similarity coordinates.
    pub time: f64,
    pub ratio: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub bound: String,
    pub profile: String,
    pub s: f64,
    pub expected: f64,
    /// Fit of `log(‖X(τ)f‖ / ‖X_free(t(τ))f‖)`, isolating the dilation.
    pub slope: f64,
    /// Fit of `log(‖X(τ)f‖ / ‖f‖)`, which also carries the free-flow transient.
    pub raw_slope: f64,
    /// The same unnormalized fit on `late_taus`.
    pub late_slope: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub series: String,
    pub tau: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorReport {
    pub tau: f64,
    pub points: Vec<f64>,
    pub c_branch: f64,
    pub s_branch: f64,
    /// `d/dτ S₀(τ)(f, 0)` at 0 against `(−Λf − f, Δf)`.
    pub generator: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub points: usize,
    pub max_residual: f64,
    pub potential_max_error: f64,
    pub w_star_at_zero: f64,
    pub w_star_tail: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorReport {
    pub schema: String,
    pub dimension: usize,
    pub evidence_note: String,
    pub plancherel_max_rel: f64,
    pub round_trip_max_rel: f64,
    pub doubled_resolution_max_rel: f64,
    pub scaling_max_rel: f64,
    pub laplacian_max_rel: f64,
    pub wave_residual_max_rel: f64,
    pub wp: Vec<RatioCheck>,
    pub decay: Vec<RatioCheck>,
    pub slopes: Vec<SlopeFit>,
    pub semigroup_residual: f64,
    pub s0_rate: f64,
    pub s0_constant: f64,
    pub generator: GeneratorReport,
    pub mode: ModeReport,
    pub sweeps: Vec<SweepRow>,
    pub all_ok: bool,
}

impl PropagatorReport {
    pub fn sweep_csv(&self) -> String {
        let mut s = String::from("series,tau,value\n");
        for r in &self.sweeps {
            s.push_str(&format!("{},{},{:e}\n", r.series, r.tau, r.value));
        }
        s
    }
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn free(tau: f64, f: &RadialProfile, branch: Branch) -> RadialProfile {
    let t = 1.0 - (-tau).exp();
    match branch {
        Branch::C => super::cos_prop(f, t),
        Branch::S => sin_prop(f, t),
    }
}

/// Decay bounds in similarity coordinates for one profile: ratio checks on
/// `taus` and slope fits on `fit_taus`.
fn decay_for(name: &str, f: &RadialProfile, o: &SuiteOptions, ratios: &mut Vec<RatioCheck>, slopes: &mut Vec<SlopeFit>, rows: &mut Vec<SweepRow>) -> Result<(), SimError> {
    let d2 = DIM as f64 / 2.0;
    for (branch, s) in [(Branch::C, 2.0), (Branch::C, 4.0), (Branch::S, 2.0)] {
        let (gain, label) = match branch {
            Branch::C => (0.0, "C"),
            Branch::S => (1.0, "S"),
        };
        let expected = d2 - s - gain;
        let base = sobolev_norm(f, s)?;
        for t_blow in [1.0, 2.0] {
            for &tau in &o.taus {
                let u = similarity_propagate(t_blow, tau, f, branch);
                let bound = t_blow.powf(-d2 + s + gain) * (expected * tau).exp() * base;
                let ratio = sobolev_norm(&u, s + gain)? / bound;
                ratios.push(RatioCheck { bound: format!("decay_{label}_T{t_blow}"), profile: name.into(), s, time: tau, ratio, ok: ratio <= 1.0 + o.ratio_slack });
            }
        }
        let mut ys = Vec::new();
        let mut raw = Vec::new();
        for &tau in &o.fit_taus {
            let u = similarity_propagate(1.0, tau, f, branch);
            let n = sobolev_norm(&u, s + gain)?;
            let nf = sobolev_norm(&free(tau, f, branch), s + gain)?;
            ys.push((n / nf).ln());
            raw.push((n / base).ln());
            rows.push(SweepRow { series: format!("{name}:{label}:s={s}"), tau, value: n / base });
        }
        let mut late = Vec::new();
        for &tau in &o.late_taus {
            let n = sobolev_norm(&similarity_propagate(1.0, tau, f, branch), s + gain)?;
            late.push((n / base).ln());
            if !o.fit_taus.contains(&tau) {
                rows.push(SweepRow { series: format!("{name}:{label}:s={s}"), tau, value: n / base });
            }
        }
        // the sine branch vanishes at τ = 0, so the fits start at the first positive τ
        let skip = usize::from(branch == Branch::S && o.fit_taus.first() == Some(&0.0));
        let xs = &o.fit_taus[skip..];
        let slope = fit_slope(xs, &ys[skip..]);
        let raw_slope = fit_slope(xs, &raw[skip..]);
        let late_slope = fit_slope(&o.late_taus, &late);
        let ok = (slope - expected).abs() <= 0.05 && (late_slope - expected).abs() <= 0.05;
        slopes.push(SlopeFit { bound: format!("decay_{label}"), profile: name.into(), s, expected, slope, raw_slope, late_slope, ok });
    }
    Ok(())
}

/// Semigroup property and the `e^{−τ/2}` decay of `S₀` on `H`.
pub fn s0_semigroup_check(phi: &StateVector, fit_taus: &[f64], rows: &mut Vec<SweepRow>) -> Result<(f64, f64, f64), SimError> {
    let (t1, t2) = (0.4, 0.7);
    let direct = s0_semigroup(t1 + t2, phi)?;
    let composed = s0_semigroup(t1, &s0_semigroup(t2, phi)?)?;
    let residual = direct.sub(&composed)?.h_norm()? / direct.h_norm()?;
    let n0 = phi.h_norm()?;
    let mut ys = Vec::new();
    let mut c: f64 = 0.0;
    for &tau in fit_taus {
        let r = s0_semigroup(tau, phi)?.h_norm()? / n0;
        ys.push(r.ln());
        c = c.max(r * (0.5 * tau).exp());
        rows.push(SweepRow { series: "S0:H".into(), tau, value: r });
    }
    Ok((residual, fit_slope(fit_taus, &ys), c))
}

fn d_tau(g: impl Fn(f64) -> f64, tau: f64, h: f64) -> f64 {
    (g(tau - 2.0 * h) - 8.0 * g(tau - h) + 8.0 * g(tau + h) - g(tau + 2.0 * h)) / (12.0 * h)
}

/// `(∂_τ + Λ + 1)[e^{−τ}C₁(τ)f] = e^{−2τ}S₁(τ)Δf` and the sine analogue at
/// sample radii, plus the formal generator at `τ = 0`.
pub fn generator_identity_check(f: &TestFn, res: &Resolution, tau: f64, points: &[f64]) -> Result<GeneratorReport, SimError> {
    let p = f.profile(res)?;
    let lap = p.laplacian();
    let h = 1e-2;
    let branch_residual = |x: &RadialProfile, y: &RadialProfile, lhs_branch: Branch, rhs_branch: Branch| -> f64 {
        let g = |t: f64, r: f64| (-t).exp() * similarity_propagate(1.0, t, x, lhs_branch).eval(r).0;
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for &r in points {
            let now = similarity_propagate(1.0, tau, x, lhs_branch).eval(r);
            let lhs = d_tau(|t| g(t, r), tau, h) + (-tau).exp() * (r * now.1 + now.0);
            let rhs = (-2.0 * tau).exp() * similarity_propagate(1.0, tau, y, rhs_branch).eval(r).0;
            num = num.max((lhs - rhs).abs());
            den = den.max(rhs.abs());
        }
        num / den
    };
    let c_branch = branch_residual(&p, &lap, Branch::C, Branch::S);
    let s_branch = branch_residual(&p, &p, Branch::S, Branch::C);
    let phi = StateVector { f1: p.clone(), f2: p.zero_like() };
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for &r in points {
        let comp = |t: f64, i: usize| -> f64 {
            let s = s0_semigroup(t, &phi).expect("same grids");
            if i == 0 { s.f1.eval(r).0 } else { s.f2.eval(r).0 }
        };
        let d1 = d_tau(|t| comp(t, 0), 0.0, h);
        let d2 = d_tau(|t| comp(t, 1), 0.0, h);
        let (e1, e2) = (-f.euler(r) - f.value(r), f.laplacian(r));
        num = num.max((d1 - e1).abs()).max((d2 - e2).abs());
        den = den.max(e1.abs()).max(e2.abs());
    }
    Ok(GeneratorReport { tau, points: points.to_vec(), c_branch, s_branch, generator: num / den })
}

/// `e^τ ρ/(1+ρ²)` in the linearized similarity-coordinate equation, and the
/// potential identity for `w_*(ξ) = (2/|ξ|) arctan|ξ|`.
pub fn mode_solution_residual() -> ModeReport {
    let n = 400;
    let mut worst: f64 = 0.0;
    for j in 1..n {
        let rho = j as f64 / n as f64;
        let r2 = rho * rho;
        let g = rho / (1.0 + r2);
        let g1 = (1.0 - r2) / (1.0 + r2).powi(2);
        let g2 = 2.0 * rho * (r2 - 3.0) / (1.0 + r2).powi(3);
        let v_t = 2.0 * rho.atan();
        let pot = 2.0 * (2.0 * v_t).cos() / r2;
        // v = e^τ g: ∂_τ² v = ∂_τ v = v, ∂_τ∂_ρ v = e^τ g'
        let res = g + 2.0 * rho * g1 + g - (1.0 - r2) * g2 + (2.0 * rho - 2.0 / rho) * g1 + pot * g;
        let scale = (2.0 / rho * g1).abs().max(pot.abs() * g).max(1.0);
        worst = worst.max(res.abs() / scale);
    }
    let w_star = |x: f64| 2.0 / x * x.atan();
    let mut perr: f64 = 0.0;
    for j in 1..=200 {
        let x = 0.05 * j as f64;
        let lhs = -(2.0 * (2.0 * x * w_star(x)).cos() - 2.0) / (x * x);
        let rhs = 16.0 / (1.0 + x * x).powi(2);
        perr = perr.max((lhs - rhs).abs());
    }
    ModeReport { points: n - 1, max_residual: worst, potential_max_error: perr, w_star_at_zero: w_star(1e-8), w_star_tail: w_star(1e8) * 1e8 / PI }
}

/// Full suite on the test class.
pub fn propagator_check(o: &SuiteOptions) -> Result<PropagatorReport, SimError> {
    let class = test_class();
    let res = &o.resolution;
    let profiles: Vec<RadialProfile> = class.par_iter().map(|t| t.profile(res)).collect::<Result<_, _>>()?;
    let mut plancherel: f64 = 0.0;
    let mut round: f64 = 0.0;
    let mut doubled: f64 = 0.0;
    let mut scaling: f64 = 0.0;
    let mut lap_err: f64 = 0.0;
    let mut wp = Vec::new();
    for (t, p) in class.iter().zip(&profiles) {
        plancherel = plancherel.max(rel(sobolev_norm(p, 0.0)?, l2_norm_physical(p)));
        let back = p.retransform();
        let m = p.spectral.iter().map(|v| v.abs()).fold(0.0, f64::max);
        round = round.max(back.iter().zip(&p.spectral).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / m);
        let fine = t.profile(&res.doubled())?;
        for s in [0.0, 2.0, 4.0] {
            doubled = doubled.max(rel(sobolev_norm(p, s)?, sobolev_norm(&fine, s)?));
        }
        let d = t.dilated(2.0).profile(res)?;
        scaling = scaling.max(rel(sobolev_norm(&d, 2.0)?, 2f64.powf(2.0 - DIM as f64 / 2.0) * sobolev_norm(p, 2.0)?));
        let lap = p.laplacian();
        let mut lm: f64 = 0.0;
        let mut le: f64 = 0.0;
        for j in 0..=40 {
            let r = 0.05 * j as f64;
            le = le.max((lap.eval(r).0 - t.laplacian(r)).abs());
            lm = lm.max(t.laplacian(r).abs());
        }
        lap_err = lap_err.max(le / lm);
        for &time in &o.times {
            for s in [0.0, 1.0, 2.0, 3.0] {
                let base = sobolev_norm(p, s)?;
                let c = sobolev_norm(&super::cos_prop(p, time), s)? / base;
                let sn = sobolev_norm(&sin_prop(p, time), s + 1.0)? / base;
                wp.push(RatioCheck { bound: "wp_cos".into(), profile: t.name.clone(), s, time, ratio: c, ok: c <= 1.0 + o.ratio_slack });
                wp.push(RatioCheck { bound: "wp_sin".into(), profile: t.name.clone(), s, time, ratio: sn, ok: sn <= 1.0 + o.ratio_slack });
            }
        }
    }
    // free wave equation at sample radii
    let (f, g) = (&profiles[1], &profiles[2]);
    let mut wave: f64 = 0.0;
    let t0 = 0.7;
    let h = 1e-2;
    let (u0, _) = wave_propagate(f, g, t0)?;
    let lap_u = u0.laplacian();
    let mut wscale: f64 = 0.0;
    for j in 1..=10 {
        let r = 0.2 * j as f64;
        let at = |t: f64| wave_propagate(f, g, t).map(|x| x.0.eval(r).0).unwrap_or(f64::NAN);
        let utt = (-at(t0 - 2.0 * h) + 16.0 * at(t0 - h) - 30.0 * at(t0) + 16.0 * at(t0 + h) - at(t0 + 2.0 * h)) / (12.0 * h * h);
        let l = lap_u.eval(r).0;
        wave = wave.max((utt - l).abs());
        wscale = wscale.max(l.abs());
    }
    let wave = wave / wscale;
    let mut decay = Vec::new();
    let mut slopes = Vec::new();
    let mut sweeps = Vec::new();
    for (t, p) in class.iter().zip(&profiles) {
        decay_for(&t.name, p, o, &mut decay, &mut slopes, &mut sweeps)?;
    }
    let phi = StateVector { f1: profiles[1].clone(), f2: profiles[2].clone() };
    let (semigroup, rate, constant) = s0_semigroup_check(&phi, &o.fit_taus, &mut sweeps)?;
    let generator = generator_identity_check(&class[1], res, 0.5, &[0.1, 0.5, 1.0, 2.0])?;
    let mode = mode_solution_residual();
    let all_ok = wp.iter().chain(&decay).all(|c| c.ok)
        && slopes.iter().all(|s| s.ok)
        && semigroup < 1e-6
        && rate <= -0.45
        && plancherel < 1e-8
        && round < 1e-8
        && wave < 1e-5
        && generator.c_branch.max(generator.s_branch) < 1e-5
        && mode.max_residual < 1e-8;
    Ok(PropagatorReport {
        schema: "modestab.propagator/1".into(),
        dimension: DIM,
        evidence_note: "inequalities checked on a finite test class; numerical evidence, not proof".into(),
        plancherel_max_rel: plancherel,
        round_trip_max_rel: round,
        doubled_resolution_max_rel: doubled,
        scaling_max_rel: scaling,
        laplacian_max_rel: lap_err,
        wave_residual_max_rel: wave,
        wp,
        decay,
        slopes,
        semigroup_residual: semigroup,
        s0_rate: rate,
        s0_constant: constant,
        generator,
        mode,
        sweeps,
        all_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_laplacian_matches_finite_differences() {
        for t in test_class() {
            for r in [0.3, 0.9, 1.7] {
                let h = 1e-3;
                let d1 = (t.value(r + h) - t.value(r - h)) / (2.0 * h);
                let d2 = (t.value(r + h) - 2.0 * t.value(r) + t.value(r - h)) / (h * h);
                assert!((d2 + 4.0 / r * d1 - t.laplacian(r)).abs() < 1e-4, "{}", t.name);
                assert!((r * d1 - t.euler(r)).abs() < 1e-5, "{}", t.name);
            }
        }
    }

    #[test]
    fn mode_solution() {
        let m = mode_solution_residual();
        assert!(m.max_residual < 1e-8, "{m:?}");
        assert!(m.potential_max_error < 1e-10);
        assert!((m.w_star_at_zero - 2.0).abs() < 1e-12);
        assert!((m.w_star_tail - 1.0).abs() < 1e-6);
    }
}
