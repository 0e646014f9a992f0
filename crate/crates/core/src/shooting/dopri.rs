//! Dormand–Prince 5(4) with PI-free step control for complex 2-vectors.

use num_complex::Complex64;

pub type State = [Complex64; 2];

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-12, atol: 1e-14, max_steps: 100_000 }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn axpy(y: &State, h: f64, ks: &[State], coef: &[f64]) -> State {
    let mut out = *y;
    for (k, &c) in ks.iter().zip(coef) {
        if c != 0.0 {
            out[0] += k[0] * (h * c);
            out[1] += k[1] * (h * c);
        }
    }
    out
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn integrate<F>(f: F, t0: f64, y0: State, t1: f64, tol: &Tolerance) -> Result<(State, Stats), String>
where
    F: Fn(f64, &State) -> State,
{
    let mut stats = Stats::default();
    if t0 == t1 {
        return Ok((y0, stats));
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * span.min(0.01);
    let mut k = [[Complex64::new(0.0, 0.0); 2]; 7];
    k[0] = f(t, &y);
    while (t1 - t) * dir > 0.0 {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(format!("step budget exhausted at t = {t}"));
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        for s in 1..7 {
            let ys = axpy(&y, h, &k[..s], &A[s][..s]);
            k[s] = f(t + C[s] * h, &ys);
        }
        let y_new = axpy(&y, h, &k[..6], &A[6][..6]);
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let mut e = Complex64::new(0.0, 0.0);
            for s in 0..7 {
                e += k[s][i] * E[s];
            }
            let sc = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
            err += ((e * h).norm() / sc).powi(2);
        }
        let err = (err / 2.0).sqrt();
        if !err.is_finite() {
            return Err(format!("non-finite state near t = {t}"));
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            t += h;
            y = y_new;
            k[0] = k[6];
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        h *= fac;
        if h.abs() < 1e-14 * span {
            return Err(format!("step size underflow at t = {t}"));
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        // y'' = −ω² y with ω complex
        let w = Complex64::new(2.0, 0.5);
        let f = |_t: f64, y: &State| [y[1], -w * w * y[0]];
        let (y, st) = integrate(f, 0.0, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], 1.3, &Tolerance::default()).unwrap();
        let exact = (w * 1.3).cos();
        assert!((y[0] - exact).norm() < 1e-10, "{:?} {exact}", y[0]);
        assert!(st.accepted > 5);
        // backwards
        let (y, _) = integrate(f, 1.3, y, 0.0, &Tolerance::default()).unwrap();
        assert!((y[0] - 1.0).norm() < 1e-9);
    }
}
