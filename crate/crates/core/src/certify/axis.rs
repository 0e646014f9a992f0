//! Bounds `|f(it)| ≤ M` on the imaginary axis.
//!
//! `f = N/D` is reduced to the real polynomial gap `G = M²|D(it)|² − |N(it)|²`
//! and `G ≥ 0` is proved by outward-rounded subdivision. When `G` is even in
//! `t` the chart variable is `x = t²`, otherwise the two half-lines are
//! checked separately. Families in `n` are split into individual checks for
//! `n ≤ n₀` and a compactified 2-D check in `(σ, u) = (x·u^w, 1/(n+1))`.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::algebra::interval::{hex_f64, parse_hex_f64};
use crate::algebra::poly2::IntervalPoly2;
use crate::algebra::{rat_to_string, BiRatFunc, CRat, Interval, Poly, Poly2, Rat, RatFuncL, Ring};

/// Subdivision limits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_depth: usize,
    pub max_leaves: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_depth: 40, max_leaves: 10_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// `x = t²`, used when the gap is even in `t`.
    Square,
    /// `x = t ≥ 0`.
    PlusT,
    /// `x = −t ≥ 0`.
    MinusT,
}

impl Chart {
    /// Scaling weight of `x` against `n`.
    fn weight(self) -> usize {
        match self {
            Chart::Square => 2,
            _ => 1,
        }
    }
    /// Exact `t` for a chart value, when rational.
    fn t_of(self, x: &Rat) -> Option<Rat> {
        match self {
            Chart::Square => rat_sqrt(x),
            Chart::PlusT => Some(x.clone()),
            Chart::MinusT => Some(-x.clone()),
        }
    }
    fn t_approx(self, x: &Rat) -> f64 {
        let v = x.to_f64().unwrap_or(f64::NAN);
        match self {
            Chart::Square => v.sqrt(),
            Chart::PlusT => v,
            Chart::MinusT => -v,
        }
    }
}

fn rat_sqrt(x: &Rat) -> Option<Rat> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    (&n * &n == *x.numer() && &d * &d == *x.denom()).then(|| BigRational::new(n, d))
}

/// Which `n` a task covers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scope {
    Single { n: u64 },
    /// Every `n ≥ n_min`; `n ≤ n0` individually, the rest compactified.
    AllFrom { n_min: u64, n0: u64 },
}

/// A target `f(n, λ)` with bound `M`.
#[derive(Clone, Debug)]
pub struct AxisTask {
    pub name: String,
    pub f: BiRatFunc,
    pub bound: Rat,
    pub scope: Scope,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafKind {
    /// Horner enclosure of the gap is nonnegative.
    Enclosure,
    /// Gap monotone in every direction; its minimum corner is nonnegative.
    Monotone,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub path: String,
    pub kind: LeafKind,
    /// `[x_lo, x_hi, y_lo, y_hi]` as hex floats.
    #[serde(rename = "box")]
    pub bbox: [String; 4],
    /// Certified lower bound of the gap on the leaf.
    pub margin: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineCheck {
    pub n: u64,
    pub chart: Chart,
    /// `x ≥ threshold` is covered by the coefficient tail bound.
    pub threshold: String,
    pub leaves: Vec<Leaf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformCheck {
    pub chart: Chart,
    pub n_min: u64,
    /// `1/(n_min + 1)`.
    pub u_max: String,
    /// Outward rounding of `u_max`; the box is `[0, u_box]`.
    pub u_box: String,
    /// Homogenizing power `W` in `u^W G(σ/u^w, 1/u − 1)`.
    pub weight: u32,
    /// `σ ≥ threshold` is covered by the tail bound.
    pub threshold: String,
    pub tail_pieces: u32,
    pub lead_lower: String,
    pub neg_upper: Vec<String>,
    pub leaves: Vec<Leaf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub n: u64,
    pub chart: Chart,
    pub x: String,
    #[serde(with = "crate::algebra::hexf")]
    pub t_approx: f64,
    /// `|f(it)|²`, exact.
    pub abs_sq: String,
    /// `f(it)` when `t` is rational.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<CRat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AxisStatus {
    Verified,
    BoundViolated { witness: Witness },
    Inconclusive {
        #[serde(with = "crate::algebra::hexf")]
        margin: f64,
        detail: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisRecord {
    pub target: String,
    pub bound: String,
    pub scope: Scope,
    pub lines: Vec<LineCheck>,
    pub uniform: Vec<UniformCheck>,
    /// Sampled `sup |f(it)|`, informational only.
    #[serde(with = "crate::algebra::hexf")]
    pub sup_estimate: f64,
    pub status: AxisStatus,
}

impl AxisRecord {
    pub fn verified(&self) -> bool {
        self.status == AxisStatus::Verified
    }
}

// ---------------------------------------------------------------------------
// Gap polynomials

fn poly_lcm(a: &Poly<CRat>, b: &Poly<CRat>) -> Poly<CRat> {
    let g = a.gcd(b);
    a.mul(b).exact_div(&g).monic()
}

/// Clear λ-denominators: `f = N/D` with `N, D` listed by powers of `n`,
/// each a polynomial in λ.
pub fn bivariate_parts(f: &BiRatFunc) -> (Vec<Poly<CRat>>, Vec<Poly<CRat>>) {
    let mut l = Poly::constant(CRat::one());
    for c in f.num().coeffs().iter().chain(f.den().coeffs()) {
        l = poly_lcm(&l, c.den());
    }
    let clear = |p: &Poly<RatFuncL>| -> Vec<Poly<CRat>> {
        p.coeffs().iter().map(|c| c.num().mul(&l.exact_div(c.den()))).collect()
    };
    (clear(f.num()), clear(f.den()))
}

/// Real and imaginary parts of `P(it, n)` as polynomials in `(t, n)`.
fn axis_parts(p: &[Poly<CRat>]) -> (Poly2, Poly2) {
    let deg = p.iter().map(|q| q.coeffs().len()).max().unwrap_or(0);
    let mut re = vec![vec![Rat::zero(); p.len()]; deg];
    let mut im = vec![vec![Rat::zero(); p.len()]; deg];
    for (j, q) in p.iter().enumerate() {
        for (k, c) in q.coeffs().iter().enumerate() {
            let (a, b) = (c.re.clone(), c.im.clone());
            let (r, i) = match k % 4 {
                0 => (a, b),
                1 => (-b, a),
                2 => (-a, -b),
                _ => (b, -a),
            };
            re[k][j] = r;
            im[k][j] = i;
        }
    }
    (Poly2::new(re), Poly2::new(im))
}

fn abs2(p: &[Poly<CRat>]) -> Poly2 {
    let (re, im) = axis_parts(p);
    re.mul(&re).add(&im.mul(&im))
}

/// Rows of `x`-powers `k` → `k/2`; `None` if an odd row is nonzero.
fn halve_rows(p: &Poly2) -> Option<Poly2> {
    let rows = p.rows();
    if rows.iter().enumerate().any(|(k, r)| k % 2 == 1 && !r.is_empty()) {
        return None;
    }
    Some(Poly2::new(rows.iter().step_by(2).cloned().collect()))
}

fn reflect_rows(p: &Poly2) -> Poly2 {
    Poly2::new(
        p.rows()
            .iter()
            .enumerate()
            .map(|(k, r)| if k % 2 == 1 { r.iter().map(|a| -a).collect() } else { r.clone() })
            .collect(),
    )
}

/// `|N|²`, `|D|²` and the gap in one chart; `x` rows, `n` columns.
#[derive(Clone, Debug)]
pub struct Gap {
    pub chart: Chart,
    pub num_abs2: Poly2,
    pub den_abs2: Poly2,
    pub gap: Poly2,
}

/// Gap polynomials for every chart needed to cover `t ∈ ℝ`.
pub fn gap_polys(f: &BiRatFunc, bound: &Rat) -> Vec<Gap> {
    let (n, d) = bivariate_parts(f);
    let (na, da) = (abs2(&n), abs2(&d));
    let m2 = bound * bound;
    let build = |chart: Chart, na: Poly2, da: Poly2| Gap { chart, gap: da.scale(&m2).sub(&na), num_abs2: na, den_abs2: da };
    match (halve_rows(&na), halve_rows(&da)) {
        (Some(a), Some(b)) => vec![build(Chart::Square, a, b)],
        _ => vec![
            build(Chart::PlusT, na.clone(), da.clone()),
            build(Chart::MinusT, reflect_rows(&na), reflect_rows(&da)),
        ],
    }
}

/// Restriction to one `n`, as a polynomial in `x` only.
fn at_n(p: &Poly2, n: u64) -> Poly2 {
    Poly2::from_x(p.at_y(&Rat::from_integer(BigInt::from(n))))
}

/// `u^W G(σ/u^w, (1 − u)/u)` in `(σ, u)`.
pub fn compactify(g: &Poly2, w: usize) -> (Poly2, u32) {
    let mut wmax = 0usize;
    for (i, r) in g.rows().iter().enumerate() {
        for (j, c) in r.iter().enumerate() {
            if !c.is_zero() {
                wmax = wmax.max(w * i + j);
            }
        }
    }
    let one_minus_u: Poly<Rat> = Poly::new(vec![Rat::one(), -Rat::one()]);
    let rows = g
        .rows()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut acc: Poly<Rat> = Poly::zero();
            for (j, c) in r.iter().enumerate() {
                if !c.is_zero() {
                    let term = one_minus_u.pow(j as u32).shift_up(wmax - w * i - j).scale(c);
                    acc = acc.add(&term);
                }
            }
            acc.into_coeffs()
        })
        .collect();
    (Poly2::new(rows), wmax as u32)
}

// ---------------------------------------------------------------------------
// Tail thresholds

fn rat_f64(x: f64) -> Rat {
    BigRational::from_float(x).expect("finite bound")
}

fn pow4(j: u32) -> Rat {
    Rat::from_integer(BigInt::from(4u8).pow(j))
}

/// Smallest `4^j ≥ max(1, r)`.
fn power_of_four_above(r: &Rat) -> Rat {
    let mut j = 0;
    while &pow4(j) < r {
        j += 1;
    }
    pow4(j)
}

fn horner_rat(c: &[Rat], x: &Rat) -> Rat {
    c.iter().rev().fold(Rat::zero(), |acc, a| acc * x + a)
}

enum TailResult {
    Threshold(Rat),
    /// Negative leading coefficient: the gap is negative at this `x`.
    Negative(Rat),
}

/// For `x ≥ X ≥ 1`: `G(x) ≥ x^{d−1}(c_d x − Σ_{i<d} max(0, −c_i))`.
fn line_tail(c: &[Rat]) -> TailResult {
    let Some(lead) = c.last() else { return TailResult::Threshold(Rat::one()) };
    if lead.is_negative() {
        let mut x = Rat::one();
        while !horner_rat(c, &x).is_negative() {
            x *= Rat::from_integer(BigInt::from(4));
        }
        return TailResult::Negative(x);
    }
    let neg: Rat = c[..c.len() - 1].iter().filter(|a| a.is_negative()).map(|a| -a).sum();
    TailResult::Threshold(power_of_four_above(&(neg / lead)))
}

/// Enclosure bounds of the `σ`-row polynomials over `u ∈ [0, u_box]`.
fn row_bounds(rows: &[Vec<Rat>], u_box: f64, pieces: u32) -> Vec<f64> {
    rows.iter()
        .map(|r| {
            let ip = Poly2::from_x(r.clone()).to_interval();
            (0..pieces)
                .map(|k| {
                    let lo = u_box * (k as f64 / pieces as f64);
                    let hi = if k + 1 == pieces { u_box } else { u_box * ((k + 1) as f64 / pieces as f64) };
                    ip.eval(Interval::new(lo, hi), Interval::zero()).lo
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

struct UniformTail {
    threshold: Rat,
    pieces: u32,
    lead_lower: Rat,
    neg_upper: Vec<Rat>,
}

/// For `σ ≥ Σ ≥ 1`: `Ĝ ≥ σ^{d−1}(L σ − Σ_i P_i)` with `h_d ≥ L > 0` and
/// `h_i ≥ −P_i` on the `u` range.
fn uniform_tail_with(g: &Poly2, u_box: f64, pieces: u32) -> Option<UniformTail> {
    let rows = g.x_coeff_polys();
    let lows = row_bounds(rows, u_box, pieces);
    let (last, rest) = lows.split_last()?;
    if *last <= 0.0 {
        return None;
    }
    let lead_lower = rat_f64(*last);
    let neg_upper: Vec<Rat> = rest.iter().map(|&l| if l < 0.0 { rat_f64(-l) } else { Rat::zero() }).collect();
    let sum: Rat = neg_upper.iter().sum();
    Some(UniformTail { threshold: power_of_four_above(&(sum / &lead_lower)), pieces, lead_lower, neg_upper })
}

fn uniform_tail(g: &Poly2, u_box: f64) -> Option<UniformTail> {
    [64, 1024, 16384].into_iter().find_map(|p| uniform_tail_with(g, u_box, p))
}

// ---------------------------------------------------------------------------
// Subdivision

#[derive(Clone, Debug)]
enum Fail {
    /// Exact gap value negative at this point.
    Negative { x: Rat, y: Rat },
    Inconclusive { margin: f64, path: String },
    Budget,
}

enum Test {
    Leaf(LeafKind, Rat),
    Negative(Rat, Rat),
    Undecided { lo: f64, split_x: bool },
}

struct Searcher<'a> {
    exact: &'a Poly2,
    g: IntervalPoly2,
    gx: IntervalPoly2,
    gy: Option<IntervalPoly2>,
    root: [Interval; 2],
    budget: Budget,
    leaves: AtomicU64,
}

const PAR_DEPTH: usize = 8;

fn bisect(i: Interval) -> (Interval, Interval) {
    let m = i.lo + (i.hi - i.lo) * 0.5;
    (Interval::new(i.lo, m), Interval::new(m, i.hi))
}

/// Box reached from the root by a path over `{a, b, c, d}`.
fn box_of(root: [Interval; 2], path: &str) -> Option<[Interval; 2]> {
    let mut b = root;
    for ch in path.chars() {
        match ch {
            'a' => b[0] = bisect(b[0]).0,
            'b' => b[0] = bisect(b[0]).1,
            'c' => b[1] = bisect(b[1]).0,
            'd' => b[1] = bisect(b[1]).1,
            _ => return None,
        }
    }
    Some(b)
}

fn hex_box(b: &[Interval; 2]) -> [String; 4] {
    [hex_f64(b[0].lo), hex_f64(b[0].hi), hex_f64(b[1].lo), hex_f64(b[1].hi)]
}

impl<'a> Searcher<'a> {
    fn new(exact: &'a Poly2, two_d: bool, root: [Interval; 2], budget: Budget) -> Self {
        Searcher {
            exact,
            g: exact.to_interval(),
            gx: exact.d_dx().to_interval(),
            gy: two_d.then(|| exact.d_dy().to_interval()),
            root,
            budget,
            leaves: AtomicU64::new(0),
        }
    }

    fn test(&self, b: &[Interval; 2]) -> Test {
        let e = self.g.eval(b[0], b[1]);
        if e.lo >= 0.0 {
            return Test::Leaf(LeafKind::Enclosure, rat_f64(e.lo));
        }
        let dx = self.gx.eval(b[0], b[1]);
        let dy = self.gy.as_ref().map(|g| g.eval(b[0], b[1]));
        let side = |d: Interval, i: Interval| {
            if d.lo >= 0.0 {
                Some(i.lo)
            } else if d.hi <= 0.0 {
                Some(i.hi)
            } else {
                None
            }
        };
        let cx = side(dx, b[0]);
        let cy = match dy {
            Some(d) => side(d, b[1]),
            None => Some(b[1].lo),
        };
        if let (Some(x), Some(y)) = (cx, cy) {
            let v = self.g.eval(Interval::point(x), Interval::point(y));
            if v.lo >= 0.0 {
                return Test::Leaf(LeafKind::Monotone, rat_f64(v.lo));
            }
            let (xr, yr) = (rat_f64(x), rat_f64(y));
            let exact = self.exact.eval(&xr, &yr);
            return if exact.is_negative() { Test::Negative(xr, yr) } else { Test::Leaf(LeafKind::Monotone, exact) };
        }
        let v = self.g.eval(Interval::point(b[0].lo), Interval::point(b[1].lo));
        if v.hi < 0.0 {
            let (xr, yr) = (rat_f64(b[0].lo), rat_f64(b[1].lo));
            if self.exact.eval(&xr, &yr).is_negative() {
                return Test::Negative(xr, yr);
            }
        }
        let split_x = match dy {
            None => true,
            Some(dy) => dx.mag() * b[0].width() >= dy.mag() * b[1].width(),
        };
        Test::Undecided { lo: e.lo, split_x }
    }

    fn run(&self, b: [Interval; 2], path: String) -> Result<Vec<Leaf>, Fail> {
        match self.test(&b) {
            Test::Leaf(kind, margin) => {
                if self.leaves.fetch_add(1, Ordering::Relaxed) >= self.budget.max_leaves {
                    return Err(Fail::Budget);
                }
                Ok(vec![Leaf { path, kind, bbox: hex_box(&b), margin: rat_to_string(&margin) }])
            }
            Test::Negative(x, y) => Err(Fail::Negative { x, y }),
            Test::Undecided { lo, split_x } => {
                if path.len() >= self.budget.max_depth {
                    return Err(Fail::Inconclusive { margin: lo, path });
                }
                let (l, r, cl, cr) = if split_x {
                    let (l, r) = bisect(b[0]);
                    ([l, b[1]], [r, b[1]], 'a', 'b')
                } else {
                    let (l, r) = bisect(b[1]);
                    ([b[0], l], [b[0], r], 'c', 'd')
                };
                let (pl, pr) = (format!("{path}{cl}"), format!("{path}{cr}"));
                let (left, right) = if path.len() < PAR_DEPTH && self.gy.is_some() {
                    rayon::join(|| self.run(l, pl), || self.run(r, pr))
                } else {
                    let left = self.run(l, pl)?;
                    (Ok(left), self.run(r, pr))
                };
                let mut left = left?;
                left.extend(right?);
                Ok(left)
            }
        }
    }

    /// Re-evaluate one stored leaf.
    fn recheck_leaf(&self, leaf: &Leaf) -> Result<(), String> {
        let b = box_of(self.root, &leaf.path).ok_or_else(|| format!("bad path {:?}", leaf.path))?;
        if hex_box(&b) != leaf.bbox {
            return Err(format!("leaf {:?}: box does not match its path", leaf.path));
        }
        match self.test(&b) {
            Test::Leaf(kind, margin) if kind == leaf.kind && rat_to_string(&margin) == leaf.margin && !margin.is_negative() => Ok(()),
            Test::Leaf(kind, margin) => Err(format!(
                "leaf {:?}: recomputed {kind:?} margin {} differs from stored {:?} {}",
                leaf.path,
                rat_to_string(&margin),
                leaf.kind,
                leaf.margin
            )),
            _ => Err(format!("leaf {:?}: gap not certified on the box", leaf.path)),
        }
    }
}

/// True iff the paths are the leaves of a complete binary subdivision tree.
pub fn paths_complete(paths: &[String], max_depth: usize) -> bool {
    let set: BTreeSet<&str> = paths.iter().map(|s| s.as_str()).collect();
    if set.len() != paths.len() || paths.iter().any(|p| p.len() > max_depth) {
        return false;
    }
    fn walk(set: &BTreeSet<&str>, prefix: &mut String, seen: &mut usize) -> bool {
        if set.contains(prefix.as_str()) {
            *seen += 1;
            return true;
        }
        let has = |c: char, prefix: &String| {
            let p = format!("{prefix}{c}");
            set.range(p.as_str()..).next().is_some_and(|s| s.starts_with(&p))
        };
        let pair = if has('a', prefix) || has('b', prefix) {
            ['a', 'b']
        } else if has('c', prefix) || has('d', prefix) {
            ['c', 'd']
        } else {
            return false;
        };
        for c in pair {
            prefix.push(c);
            let ok = walk(set, prefix, seen);
            prefix.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    let mut seen = 0;
    walk(&set, &mut String::new(), &mut seen) && seen == paths.len()
}

// ---------------------------------------------------------------------------
// Tasks

fn rat_of(s: &str) -> Result<Rat, String> {
    crate::algebra::parse_rat(s).map_err(|e| e.to_string())
}

fn witness(task: &AxisTask, gap: &Gap, n: u64, x: Rat) -> Witness {
    let line_num = at_n(&gap.num_abs2, n);
    let line_den = at_n(&gap.den_abs2, n);
    let z = Rat::zero();
    let abs_sq = line_num.eval(&x, &z) / line_den.eval(&x, &z);
    let value = gap.chart.t_of(&x).and_then(|t| {
        let fl = task.f.eval(&RatFuncL::constant(CRat::int(n as i64))).ok()?;
        fl.eval(&CRat::new(Rat::zero(), t)).ok()
    });
    Witness { n, chart: gap.chart, t_approx: gap.chart.t_approx(&x), x: rat_to_string(&x), abs_sq: rat_to_string(&abs_sq), value }
}

fn line_root(threshold: &Rat, n: u64) -> [Interval; 2] {
    let hi = threshold.to_f64().expect("power of four");
    [Interval::new(0.0, hi), Interval::point(n as f64)]
}

fn check_line(task: &AxisTask, gap: &Gap, n: u64, budget: Budget) -> Result<LineCheck, AxisStatus> {
    let g = at_n(&gap.gap, n);
    let coeffs: Vec<Rat> = g.rows().iter().map(|r| r.first().cloned().unwrap_or_else(Rat::zero)).collect();
    let threshold = match line_tail(&coeffs) {
        TailResult::Threshold(t) => t,
        TailResult::Negative(x) => return Err(AxisStatus::BoundViolated { witness: witness(task, gap, n, x) }),
    };
    let root = line_root(&threshold, n);
    let s = Searcher::new(&g, false, root, budget);
    match s.run(root, String::new()) {
        Ok(leaves) => Ok(LineCheck { n, chart: gap.chart, threshold: rat_to_string(&threshold), leaves }),
        Err(Fail::Negative { x, .. }) => Err(AxisStatus::BoundViolated { witness: witness(task, gap, n, x) }),
        Err(Fail::Inconclusive { margin, path }) => Err(AxisStatus::Inconclusive {
            margin,
            detail: format!("n = {n}: depth limit at leaf {path:?}"),
        }),
        Err(Fail::Budget) => Err(AxisStatus::Inconclusive { margin: f64::NAN, detail: format!("n = {n}: leaf budget exhausted") }),
    }
}

fn uniform_box(n_min: u64) -> (Rat, f64) {
    let u_max = Rat::new(BigInt::from(1), BigInt::from(n_min + 1));
    (u_max.clone(), Interval::from_rat(&u_max).hi)
}

fn check_uniform(task: &AxisTask, gap: &Gap, n_min: u64, budget: Budget) -> Result<UniformCheck, AxisStatus> {
    let (gh, weight) = compactify(&gap.gap, gap.chart.weight());
    let (u_max, u_box) = uniform_box(n_min);
    let Some(tail) = uniform_tail(&gh, u_box) else {
        return Err(AxisStatus::Inconclusive { margin: f64::NAN, detail: "no uniform tail bound: leading row not positive".into() });
    };
    let root = [Interval::new(0.0, tail.threshold.to_f64().expect("power of four")), Interval::new(0.0, u_box)];
    let s = Searcher::new(&gh, true, root, budget);
    match s.run(root, String::new()) {
        Ok(leaves) => Ok(UniformCheck {
            chart: gap.chart,
            n_min,
            u_max: rat_to_string(&u_max),
            u_box: hex_f64(u_box),
            weight,
            threshold: rat_to_string(&tail.threshold),
            tail_pieces: tail.pieces,
            lead_lower: rat_to_string(&tail.lead_lower),
            neg_upper: tail.neg_upper.iter().map(rat_to_string).collect(),
            leaves,
        }),
        Err(Fail::Negative { x: sigma, y: u }) => {
            // a negative point of the closure is a violation only at an integer n
            if u.is_positive() {
                let n_real = (Rat::one() / &u - Rat::one()).floor().to_integer();
                for n in [n_real.clone(), n_real + 1] {
                    let Some(n) = n.to_u64().filter(|&n| n >= n_min) else { continue };
                    let un = Rat::new(BigInt::from(1), BigInt::from(n + 1));
                    let x = &sigma / un.pow(gap.chart.weight() as i32);
                    if at_n(&gap.gap, n).eval(&x, &Rat::zero()).is_negative() {
                        return Err(AxisStatus::BoundViolated { witness: witness(task, gap, n, x) });
                    }
                }
            }
            Err(AxisStatus::Inconclusive {
                margin: f64::NAN,
                detail: format!("compactified gap negative at σ = {}, u = {}", rat_to_string(&sigma), rat_to_string(&u)),
            })
        }
        Err(Fail::Inconclusive { margin, path }) => {
            Err(AxisStatus::Inconclusive { margin, detail: format!("uniform part: depth limit at leaf {path:?}") })
        }
        Err(Fail::Budget) => Err(AxisStatus::Inconclusive { margin: f64::NAN, detail: "uniform part: leaf budget exhausted".into() }),
    }
}

fn poly2_f64(p: &Poly2, x: f64, y: f64) -> f64 {
    p.rows().iter().rev().fold(0.0, |acc, r| {
        acc * x + r.iter().rev().fold(0.0, |a, c| a * y + c.to_f64().unwrap_or(f64::NAN))
    })
}

fn sup_estimate(gaps: &[Gap], ns: &[u64]) -> f64 {
    let mut best: f64 = 0.0;
    for g in gaps {
        for &n in ns {
            for k in 0..400 {
                let t = (std::f64::consts::FRAC_PI_2 * k as f64 / 400.0).tan() * 4.0;
                let x = if g.chart == Chart::Square { t * t } else { t };
                let v = poly2_f64(&g.num_abs2, x, n as f64) / poly2_f64(&g.den_abs2, x, n as f64);
                if v.is_finite() {
                    best = best.max(v.sqrt());
                }
            }
        }
    }
    best
}

fn lines_of(scope: &Scope) -> Vec<u64> {
    match *scope {
        Scope::Single { n } => vec![n],
        Scope::AllFrom { n_min, n0 } => (n_min..=n0).collect(),
    }
}

/// Certify `sup_t |f(it)| ≤ M` over the task's scope.
pub fn verify_axis_bound(task: &AxisTask, budget: Budget) -> AxisRecord {
    use rayon::prelude::*;
    let gaps = gap_polys(&task.f, &task.bound);
    let ns = lines_of(&task.scope);
    let mut sample_ns = ns.clone();
    if let Scope::AllFrom { n0, .. } = task.scope {
        sample_ns.extend([n0 + 1, 2 * n0, 10 * n0, 1000 * n0]);
    }
    let mut rec = AxisRecord {
        target: task.name.clone(),
        bound: rat_to_string(&task.bound),
        scope: task.scope.clone(),
        lines: Vec::new(),
        uniform: Vec::new(),
        sup_estimate: sup_estimate(&gaps, &sample_ns),
        status: AxisStatus::Verified,
    };
    let jobs: Vec<(usize, u64)> = (0..gaps.len()).flat_map(|g| ns.iter().map(move |&n| (g, n))).collect();
    let results: Vec<Result<LineCheck, AxisStatus>> =
        jobs.par_iter().map(|&(g, n)| check_line(task, &gaps[g], n, budget)).collect();
    for r in results {
        match r {
            Ok(l) => rec.lines.push(l),
            Err(st) => {
                rec.status = st;
                return rec;
            }
        }
    }
    if let Scope::AllFrom { n0, .. } = task.scope {
        for g in &gaps {
            match check_uniform(task, g, n0 + 1, budget) {
                Ok(u) => rec.uniform.push(u),
                Err(st) => {
                    rec.status = st;
                    return rec;
                }
            }
        }
    }
    rec
}

/// Re-validate a verified record against the task without searching.
pub fn recheck_axis(task: &AxisTask, rec: &AxisRecord, budget: Budget) -> Result<(), String> {
    if rec.status != AxisStatus::Verified {
        return Err(format!("{}: record is not verified", rec.target));
    }
    if rec.bound != rat_to_string(&task.bound) || rec.scope != task.scope || rec.target != task.name {
        return Err(format!("{}: record does not describe this task", rec.target));
    }
    let gaps = gap_polys(&task.f, &task.bound);
    let ns = lines_of(&task.scope);
    let mut want: Vec<(Chart, u64)> = gaps.iter().flat_map(|g| ns.iter().map(move |&n| (g.chart, n))).collect();
    let mut have: Vec<(Chart, u64)> = rec.lines.iter().map(|l| (l.chart, l.n)).collect();
    want.sort_by_key(|&(c, n)| (c as u8, n));
    have.sort_by_key(|&(c, n)| (c as u8, n));
    if want != have {
        return Err(format!("{}: individual checks do not cover the scope", rec.target));
    }
    use rayon::prelude::*;
    rec.lines.par_iter().try_for_each(|line| -> Result<(), String> {
        let gap = gaps.iter().find(|g| g.chart == line.chart).expect("chart listed");
        let g = at_n(&gap.gap, line.n);
        let coeffs: Vec<Rat> = g.rows().iter().map(|r| r.first().cloned().unwrap_or_else(Rat::zero)).collect();
        let threshold = rat_of(&line.threshold)?;
        match line_tail(&coeffs) {
            TailResult::Threshold(t) if t == threshold => {}
            _ => return Err(format!("{} n = {}: tail threshold does not reproduce", rec.target, line.n)),
        }
        let paths: Vec<String> = line.leaves.iter().map(|l| l.path.clone()).collect();
        if !paths_complete(&paths, budget.max_depth) || paths.iter().any(|p| p.contains(['c', 'd'])) {
            return Err(format!("{} n = {}: leaves do not tile [0, {}]", rec.target, line.n, line.threshold));
        }
        let root = line_root(&threshold, line.n);
        let s = Searcher::new(&g, false, root, budget);
        line.leaves.iter().try_for_each(|l| s.recheck_leaf(l)).map_err(|e| format!("{} n = {}: {e}", rec.target, line.n))
    })?;
    match task.scope {
        Scope::Single { .. } => {
            if !rec.uniform.is_empty() {
                return Err(format!("{}: unexpected uniform part", rec.target));
            }
        }
        Scope::AllFrom { n0, .. } => {
            if rec.uniform.len() != gaps.len() {
                return Err(format!("{}: uniform part missing", rec.target));
            }
            for (u, gap) in rec.uniform.iter().zip(&gaps) {
                recheck_uniform(&rec.target, u, gap, n0 + 1, budget)?;
            }
        }
    }
    Ok(())
}

fn recheck_uniform(target: &str, u: &UniformCheck, gap: &Gap, n_min: u64, budget: Budget) -> Result<(), String> {
    let err = |m: &str| Err(format!("{target} uniform part: {m}"));
    if u.chart != gap.chart || u.n_min != n_min {
        return err("chart or range mismatch");
    }
    let (gh, weight) = compactify(&gap.gap, gap.chart.weight());
    let (u_max, _) = uniform_box(n_min);
    let u_box = parse_hex_f64(&u.u_box).map_err(|e| e.to_string())?;
    if weight != u.weight || rat_of(&u.u_max)? != u_max || rat_f64(u_box) < u_max {
        return err("u range does not reach 1/(n_min + 1)");
    }
    let Some(tail) = uniform_tail_with(&gh, u_box, u.tail_pieces) else { return err("tail bound does not reproduce") };
    let stored: Vec<Rat> = u.neg_upper.iter().map(|s| rat_of(s)).collect::<Result<_, _>>()?;
    if tail.lead_lower != rat_of(&u.lead_lower)? || tail.neg_upper != stored || tail.threshold != rat_of(&u.threshold)? {
        return err("tail bound does not reproduce");
    }
    let sum: Rat = stored.iter().sum();
    if !tail.lead_lower.is_positive() || tail.threshold < Rat::one() || &tail.lead_lower * &tail.threshold < sum {
        return err("tail inequality fails");
    }
    let paths: Vec<String> = u.leaves.iter().map(|l| l.path.clone()).collect();
    if !paths_complete(&paths, budget.max_depth) {
        return err("leaves do not tile the box");
    }
    let root = [Interval::new(0.0, tail.threshold.to_f64().expect("power of four")), Interval::new(0.0, u_box)];
    let s = Searcher::new(&gh, true, root, budget);
    use rayon::prelude::*;
    u.leaves.par_iter().try_for_each(|l| s.recheck_leaf(l)).map_err(|e| format!("{target} uniform part: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{kconst, parse_birat, rat};

    fn single(name: &str, f: &str, m: Rat) -> AxisTask {
        AxisTask { name: name.into(), f: parse_birat(f, "n").unwrap(), bound: m, scope: Scope::Single { n: 1 } }
    }

    #[test]
    fn constant_and_simple_bounds() {
        let t = single("half", "1/2", rat(1, 2));
        let r = verify_axis_bound(&t, Budget::default());
        assert!(r.verified(), "{r:?}");
        recheck_axis(&t, &r, Budget::default()).unwrap();

        // |1/(λ + 1)| on the axis has sup 1 at t = 0
        let t = single("resolvent", "1/(λ + 1)", rat(1, 1));
        assert!(verify_axis_bound(&t, Budget::default()).verified());
        let t = single("resolvent", "1/(λ + 1)", rat(9, 10));
        match verify_axis_bound(&t, Budget::default()).status {
            AxisStatus::BoundViolated { witness } => {
                assert_eq!(witness.value, Some(CRat::int(1)));
                assert_eq!(witness.abs_sq, "1");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn growth_at_infinity_is_a_violation() {
        let t = single("linear", "λ/(λ + 2)", rat(1, 2));
        match verify_axis_bound(&t, Budget::default()).status {
            AxisStatus::BoundViolated { witness } => assert!(witness.t_approx >= 1.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn complex_coefficients_use_half_lines() {
        // |1/(λ + 1 + i)|: not symmetric in t, maximum 1 at t = −1
        let f = kconst(RatFuncL::frac(Poly::constant(CRat::one()), Poly::new(vec![CRat::gauss(1, 1), CRat::one()])));
        let t = AxisTask { name: "shifted".into(), f, bound: rat(1, 1), scope: Scope::Single { n: 1 } };
        let r = verify_axis_bound(&t, Budget::default());
        assert!(r.verified());
        assert_eq!(r.lines.len(), 2);
        recheck_axis(&t, &r, Budget::default()).unwrap();
        let t = AxisTask { bound: rat(99, 100), ..t };
        match verify_axis_bound(&t, Budget::default()).status {
            AxisStatus::BoundViolated { witness } => assert_eq!(witness.chart, Chart::MinusT),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn family_with_corner_limit() {
        // |n/(n + 1 + λ)| ≤ 1 on the axis, approaching 1 as n → ∞ at t = 0
        let t = AxisTask {
            name: "corner".into(),
            f: parse_birat("n/(n + 1 + λ)", "n").unwrap(),
            bound: rat(1, 1),
            scope: Scope::AllFrom { n_min: 1, n0: 4 },
        };
        let r = verify_axis_bound(&t, Budget::default());
        assert!(r.verified(), "{:?}", r.status);
        assert_eq!(r.uniform.len(), 1);
        recheck_axis(&t, &r, Budget::default()).unwrap();

        let mut bad = r.clone();
        bad.uniform[0].leaves.pop();
        assert!(recheck_axis(&t, &bad, Budget::default()).is_err());
        let mut bad = r.clone();
        bad.lines[0].leaves[0].margin = "1/3".into();
        assert!(recheck_axis(&t, &bad, Budget::default()).is_err());
    }

    #[test]
    fn tree_completeness() {
        let p = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert!(paths_complete(&p(&[""]), 40));
        assert!(paths_complete(&p(&["a", "bc", "bd"]), 40));
        assert!(!paths_complete(&p(&["a", "bc"]), 40));
        assert!(!paths_complete(&p(&["a", "b", "c", "d"]), 40));
        assert!(!paths_complete(&p(&["a", "a", "b"]), 40));
        assert!(!paths_complete(&p(&["a", "b", "ba"]), 40));
    }

    #[test]
    fn compactify_weights() {
        // G = s n² + n  →  W = 4, Ĝ = σ (1−u)² + (1−u) u³
        let g = Poly2::new(vec![vec![rat(0, 1), rat(1, 1)], vec![rat(0, 1), rat(0, 1), rat(1, 1)]]);
        let (h, w) = compactify(&g, 2);
        assert_eq!(w, 4);
        let (sigma, u) = (rat(3, 1), rat(1, 5));
        let n = rat(4, 1);
        let s = &sigma / (&u * &u);
        assert_eq!(h.eval(&sigma, &u), g.eval(&s, &n) * u.pow(4));
    }
}
