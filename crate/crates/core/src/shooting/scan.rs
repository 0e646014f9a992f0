use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ShootError, Shooter};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl Rect {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Rect { re: [a, b], im: [c, d] }
    }
    fn width(&self) -> f64 {
        self.re[1] - self.re[0]
    }
    fn height(&self) -> f64 {
        self.im[1] - self.im[0]
    }
    pub fn is_degenerate(&self) -> bool {
        self.width() <= 0.0 || self.height() <= 0.0
    }
    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re[0] + self.re[1]), 0.5 * (self.im[0] + self.im[1]))
    }
    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re[0] - slack && z.re <= self.re[1] + slack && z.im >= self.im[0] - slack && z.im <= self.im[1] + slack
    }
    /// Counter-clockwise corners.
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re[0], self.im[0]),
            Complex64::new(self.re[1], self.im[0]),
            Complex64::new(self.re[1], self.im[1]),
            Complex64::new(self.re[0], self.im[1]),
        ]
    }
    fn split(&self, frac: f64) -> (Rect, Rect) {
        if self.width() >= self.height() {
            let m = self.re[0] + frac * self.width();
            (Rect::new(self.re[0], m, self.im[0], self.im[1]), Rect::new(m, self.re[1], self.im[0], self.im[1]))
        } else {
            let m = self.im[0] + frac * self.height();
            (Rect::new(self.re[0], self.re[1], self.im[0], m), Rect::new(self.re[0], self.re[1], m, self.im[1]))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Initial contour samples per unit length.
    pub resolution: f64,
    /// Cells below this diameter are handed to Newton.
    pub min_cell: f64,
    pub max_evaluations: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { resolution: 16.0, min_cell: 0.05, max_evaluations: 400_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroInfo {
    pub lambda: Complex64,
    pub multiplicity: i64,
    /// Raw winding on a small circle around the refined zero.
    pub local_winding: f64,
    pub normalized_mismatch: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanDiagnostics {
    pub evaluations: usize,
    pub boundary_points: usize,
    /// Smallest `|W|` met on the outer contour relative to the largest.
    pub min_boundary_ratio: f64,
    pub cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub rect: Rect,
    pub winding: i64,
    /// Accumulated argument change over `2π` before rounding.
    pub winding_raw: f64,
    pub zeros: Vec<ZeroInfo>,
    pub diagnostics: ScanDiagnostics,
}

struct Counter<'a> {
    shooter: &'a Shooter,
    cache: Mutex<HashMap<(u64, u64), Complex64>>,
    opts: ScanOptions,
}

fn key(z: Complex64) -> (u64, u64) {
    (z.re.to_bits(), z.im.to_bits())
}

impl Counter<'_> {
    fn evals(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    fn eval_many(&self, zs: &[Complex64]) -> Result<Vec<Complex64>, ShootError> {
        let missing: Vec<Complex64> = {
            let c = self.cache.lock().unwrap();
            zs.iter().copied().filter(|z| !c.contains_key(&key(*z))).collect()
        };
        if self.evals() + missing.len() > self.opts.max_evaluations {
            return Err(ShootError::BudgetExceeded(self.evals()));
        }
        let vals: Result<Vec<(Complex64, Complex64)>, ShootError> =
            missing.par_iter().map(|&z| self.shooter.mismatch(z).map(|w| (z, w))).collect();
        {
            let mut c = self.cache.lock().unwrap();
            for (z, w) in vals? {
                c.insert(key(z), w);
            }
        }
        let c = self.cache.lock().unwrap();
        Ok(zs.iter().map(|z| c[&key(*z)]).collect())
    }

    /// Argument change along the segment, refining until consecutive samples
    /// turn by less than `π/4`.
    fn edge(&self, a: Complex64, b: Complex64, stats: &mut (usize, f64, f64)) -> Result<f64, ShootError> {
        let n = (((b - a).norm() * self.opts.resolution).ceil() as usize).max(8);
        let mut pts: Vec<Complex64> = (0..=n).map(|j| a + (b - a) * (j as f64 / n as f64)).collect();
        let mut vals = self.eval_many(&pts)?;
        loop {
            let mut insert = Vec::new();
            for j in 0..pts.len() - 1 {
                let turn = (vals[j + 1] / vals[j]).arg().abs();
                if turn > PI / 4.0 {
                    if (pts[j + 1] - pts[j]).norm() < 1e-10 {
                        return Err(ShootError::ContourZero(pts[j]));
                    }
                    insert.push(j);
                }
            }
            if insert.is_empty() {
                break;
            }
            let mids: Vec<Complex64> = insert.iter().map(|&j| 0.5 * (pts[j] + pts[j + 1])).collect();
            let mv = self.eval_many(&mids)?;
            for (k, &j) in insert.iter().enumerate().rev() {
                pts.insert(j + 1, mids[k]);
                vals.insert(j + 1, mv[k]);
            }
        }
        let mut total = 0.0;
        for j in 0..pts.len() - 1 {
            total += (vals[j + 1] / vals[j]).arg();
        }
        stats.0 += pts.len() - 1;
        for v in &vals {
            stats.1 = stats.1.min(v.norm());
            stats.2 = stats.2.max(v.norm());
        }
        if vals.iter().any(|v| v.norm() == 0.0) {
            return Err(ShootError::ContourZero(a));
        }
        Ok(total)
    }

    fn winding(&self, r: &Rect, stats: &mut (usize, f64, f64)) -> Result<f64, ShootError> {
        if r.is_degenerate() {
            return Ok(0.0);
        }
        let c = r.corners();
        let mut total = 0.0;
        for k in 0..4 {
            total += self.edge(c[k], c[(k + 1) % 4], stats)?;
        }
        Ok(total / (2.0 * PI))
    }

    fn circle_winding(&self, z: Complex64, rad: f64) -> Result<f64, ShootError> {
        let m = 64;
        let pts: Vec<Complex64> = (0..=m).map(|j| z + Complex64::from_polar(rad, 2.0 * PI * j as f64 / m as f64)).collect();
        let vals: Result<Vec<Complex64>, ShootError> = pts.par_iter().map(|&p| self.shooter.mismatch(p)).collect();
        let vals = vals?;
        Ok(vals.windows(2).map(|w| (w[1] / w[0]).arg()).sum::<f64>() / (2.0 * PI))
    }

    /// Bisect cells with nonzero winding down to `min_cell`, then refine.
    fn locate(&self, r: Rect, w: i64, out: &mut Vec<ZeroInfo>, cells: &mut usize) -> Result<(), ShootError> {
        *cells += 1;
        if w == 0 {
            return Ok(());
        }
        let diam = r.width().hypot(r.height());
        if diam <= self.opts.min_cell {
            return self.polish(r, w, out);
        }
        let mut dummy = (0, f64::INFINITY, 0.0);
        for frac in [0.5, 0.45, 0.55, 0.4] {
            let (a, b) = r.split(frac);
            let wa = self.winding(&a, &mut dummy);
            let wb = self.winding(&b, &mut dummy);
            match (wa, wb) {
                (Ok(wa), Ok(wb)) if (wa.round() + wb.round()) as i64 == w => {
                    self.locate(a, wa.round() as i64, out, cells)?;
                    return self.locate(b, wb.round() as i64, out, cells);
                }
                (Err(e @ ShootError::BudgetExceeded(_)), _) | (_, Err(e @ ShootError::BudgetExceeded(_))) => return Err(e),
                _ => continue,
            }
        }
        self.polish(r, w, out)
    }

    fn polish(&self, r: Rect, w: i64, out: &mut Vec<ZeroInfo>) -> Result<(), ShootError> {
        let z = self.shooter.refine(r.center(), 60)?;
        let z = if r.contains(z, r.width().hypot(r.height())) { z } else { r.center() };
        let rad = (1e-3f64).min(0.25 * r.width().max(r.height()).max(1e-6));
        let lw = self.circle_winding(z, rad)?;
        let mult = lw.round() as i64;
        let nm = self.shooter.normalized_mismatch(z)?;
        out.push(ZeroInfo { lambda: z, multiplicity: if mult == 0 { w } else { mult }, local_winding: lw, normalized_mismatch: nm });
        Ok(())
    }
}

/// Argument-principle count of zeros of `W` in `rect`, with each zero
/// isolated by bisection and polished by Newton.
pub fn eigen_scan(shooter: &Shooter, rect: Rect, opts: &ScanOptions) -> Result<ScanResult, ShootError> {
    if rect.re[1] < rect.re[0] || rect.im[1] < rect.im[0] {
        return Err(ShootError::BadRect(format!("{rect:?}")));
    }
    let counter = Counter { shooter, cache: Mutex::new(HashMap::new()), opts: *opts };
    let mut stats = (0usize, f64::INFINITY, 0.0f64);
    let raw = counter.winding(&rect, &mut stats)?;
    let winding = raw.round() as i64;
    let mut zeros = Vec::new();
    let mut cells = 0;
    counter.locate(rect, winding, &mut zeros, &mut cells)?;
    zeros.sort_by(|a, b| (a.lambda.re, a.lambda.im).partial_cmp(&(b.lambda.re, b.lambda.im)).unwrap());
    let min_ratio = if stats.2 > 0.0 { stats.1 / stats.2 } else { 0.0 };
    Ok(ScanResult {
        rect,
        winding,
        winding_raw: raw,
        zeros,
        diagnostics: ScanDiagnostics { evaluations: counter.evals(), boundary_points: stats.0, min_boundary_ratio: min_ratio, cells },
    })
}

#[cfg(test)]
mod tests {
    use super::super::Settings;
    use super::*;

    #[test]
    fn empty_and_zero_free() {
        let s = Shooter::new(Settings::default()).unwrap();
        let r = eigen_scan(&s, Rect::new(1.0, 1.0, -1.0, 1.0), &ScanOptions::default()).unwrap();
        assert_eq!(r.winding, 0);
        let r = eigen_scan(&s, Rect::new(1.5, 2.5, -1.0, 1.0), &ScanOptions::default()).unwrap();
        assert_eq!(r.winding, 0);
        assert!(r.zeros.is_empty());
    }

    #[test]
    fn small_box_around_one() {
        let s = Shooter::new(Settings::default()).unwrap();
        let r = eigen_scan(&s, Rect::new(0.8, 1.3, -0.2, 0.3), &ScanOptions::default()).unwrap();
        assert_eq!(r.winding, 1);
        assert_eq!(r.zeros.len(), 1);
        assert!((r.zeros[0].lambda - 1.0).norm() < 1e-6, "{:?}", r.zeros);
        assert_eq!(r.zeros[0].multiplicity, 1);
    }
}
