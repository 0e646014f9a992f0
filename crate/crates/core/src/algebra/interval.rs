//! Outward-rounded interval arithmetic on `f64`.
//!
//! The platform rounds to nearest; each operation recovers the exact rounding
//! error with an error-free transformation and steps one ulp outward only when
//! that error points the wrong way.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::crat::CRat;
use super::field::Rat;
use super::poly::Poly;
use super::ratfunc::RatFunc;
use super::AlgebraError;

const TINY: f64 = 1e-290;

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

pub fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() {
        return if s == f64::INFINITY && a.is_finite() && b.is_finite() { f64::MAX } else { s };
    }
    if e < 0.0 {
        s.next_down()
    } else {
        s
    }
}

pub fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() {
        return if s == f64::NEG_INFINITY && a.is_finite() && b.is_finite() { f64::MIN } else { s };
    }
    if e > 0.0 {
        s.next_up()
    } else {
        s
    }
}

fn mul_err(a: f64, b: f64) -> (f64, f64, bool) {
    let p = a * b;
    if p == 0.0 || !p.is_finite() {
        // exact zero only when a factor is zero
        let exact = a == 0.0 || b == 0.0 || !p.is_finite();
        return (p, 0.0, exact);
    }
    if p.abs() < TINY {
        return (p, 0.0, false);
    }
    (p, a.mul_add(b, -p), true)
}

pub fn mul_down(a: f64, b: f64) -> f64 {
    let (p, e, exact) = mul_err(a, b);
    if !exact || e < 0.0 {
        p.next_down()
    } else {
        p
    }
}

pub fn mul_up(a: f64, b: f64) -> f64 {
    let (p, e, exact) = mul_err(a, b);
    if !exact || e > 0.0 {
        p.next_up()
    } else {
        p
    }
}

/// Sign of `a/b − fl(a/b)`, or `None` when the remainder is unreliable.
fn div_err(a: f64, b: f64) -> (f64, Option<f64>) {
    let q = a / b;
    if !q.is_finite() || q == 0.0 && a != 0.0 || q.abs() < TINY && q != 0.0 {
        return (q, None);
    }
    let r = (-q).mul_add(b, a);
    (q, Some(r * b.signum()))
}

pub fn div_down(a: f64, b: f64) -> f64 {
    match div_err(a, b) {
        (q, Some(e)) if e >= 0.0 => q,
        (q, _) => q.next_down(),
    }
}

pub fn div_up(a: f64, b: f64) -> f64 {
    match div_err(a, b) {
        (q, Some(e)) if e <= 0.0 => q,
        (q, _) => q.next_up(),
    }
}

pub fn sqrt_up(a: f64) -> f64 {
    let r = a.sqrt();
    if r == 0.0 || !r.is_finite() {
        return r;
    }
    if (-r).mul_add(r, a) > 0.0 {
        r.next_up()
    } else {
        r
    }
}

pub fn sqrt_down(a: f64) -> f64 {
    let r = a.sqrt();
    if r == 0.0 || !r.is_finite() {
        return r;
    }
    if (-r).mul_add(r, a) < 0.0 {
        r.next_down()
    } else {
        r
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }
    pub fn zero() -> Self {
        Interval::point(0.0)
    }
    /// Tight enclosure of an exact rational.
    pub fn from_rat(r: &Rat) -> Self {
        let x = r.to_f64().unwrap_or(f64::NAN);
        if !x.is_finite() {
            return if r > &Rat::zero() {
                Interval::new(f64::MAX, f64::INFINITY)
            } else {
                Interval::new(f64::NEG_INFINITY, f64::MIN)
            };
        }
        let xr = BigRational::from_float(x).expect("finite");
        match xr.cmp(r) {
            std::cmp::Ordering::Equal => Interval::point(x),
            std::cmp::Ordering::Less => Interval::new(x, x.next_up()),
            std::cmp::Ordering::Greater => Interval::new(x.next_down(), x),
        }
    }
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
    pub fn mid(&self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
    pub fn contains_rat(&self, r: &Rat) -> bool {
        let lo = BigRational::from_float(self.lo);
        let hi = BigRational::from_float(self.hi);
        lo.is_none_or(|l| &l <= r) && hi.is_none_or(|h| r <= &h)
    }
    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }
    pub fn subset_of(&self, o: &Interval) -> bool {
        o.lo <= self.lo && self.hi <= o.hi
    }
    pub fn hull(&self, o: &Interval) -> Interval {
        Interval::new(self.lo.min(o.lo), self.hi.max(o.hi))
    }
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
    pub fn add(&self, o: &Interval) -> Interval {
        Interval::new(add_down(self.lo, o.lo), add_up(self.hi, o.hi))
    }
    pub fn sub(&self, o: &Interval) -> Interval {
        Interval::new(add_down(self.lo, -o.hi), add_up(self.hi, -o.lo))
    }
    pub fn neg(&self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
    pub fn mul(&self, o: &Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        if a >= 0.0 && c >= 0.0 {
            return Interval::new(mul_down(a, c), mul_up(b, d));
        }
        let lo = mul_down(a, c).min(mul_down(a, d)).min(mul_down(b, c)).min(mul_down(b, d));
        let hi = mul_up(a, c).max(mul_up(a, d)).max(mul_up(b, c)).max(mul_up(b, d));
        Interval::new(lo, hi)
    }
    pub fn sqr(&self) -> Interval {
        if self.lo >= 0.0 {
            Interval::new(mul_down(self.lo, self.lo), mul_up(self.hi, self.hi))
        } else if self.hi <= 0.0 {
            Interval::new(mul_down(self.hi, self.hi), mul_up(self.lo, self.lo))
        } else {
            let m = self.mag();
            Interval::new(0.0, mul_up(m, m))
        }
    }
    pub fn div(&self, o: &Interval) -> Result<Interval, AlgebraError> {
        if o.contains_zero() {
            return Err(AlgebraError::PossiblePole);
        }
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        let lo = div_down(a, c).min(div_down(a, d)).min(div_down(b, c)).min(div_down(b, d));
        let hi = div_up(a, c).max(div_up(a, d)).max(div_up(b, c)).max(div_up(b, d));
        Ok(Interval::new(lo, hi))
    }
    pub fn sqrt(&self) -> Interval {
        Interval::new(sqrt_down(self.lo.max(0.0)), sqrt_up(self.hi.max(0.0)))
    }
    /// Split at the midpoint.
    pub fn bisect(&self) -> (Interval, Interval) {
        let m = self.mid();
        (Interval::new(self.lo, m), Interval::new(m, self.hi))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

/// Rectangle `[re_lo, re_hi] × [im_lo, im_hi]` in the complex plane.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ComplexBox {
    pub re: Interval,
    pub im: Interval,
}

impl ComplexBox {
    pub fn new(re: Interval, im: Interval) -> Self {
        ComplexBox { re, im }
    }
    pub fn from_bounds(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Self {
        ComplexBox { re: Interval::new(re_lo, re_hi), im: Interval::new(im_lo, im_hi) }
    }
    pub fn point(re: f64, im: f64) -> Self {
        ComplexBox { re: Interval::point(re), im: Interval::point(im) }
    }
    pub fn from_crat(z: &CRat) -> Self {
        ComplexBox { re: Interval::from_rat(&z.re), im: Interval::from_rat(&z.im) }
    }
    pub fn zero() -> Self {
        ComplexBox::point(0.0, 0.0)
    }
    pub fn contains_crat(&self, z: &CRat) -> bool {
        self.re.contains_rat(&z.re) && self.im.contains_rat(&z.im)
    }
    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }
    pub fn subset_of(&self, o: &ComplexBox) -> bool {
        self.re.subset_of(&o.re) && self.im.subset_of(&o.im)
    }
    pub fn add(&self, o: &ComplexBox) -> ComplexBox {
        ComplexBox { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }
    pub fn sub(&self, o: &ComplexBox) -> ComplexBox {
        ComplexBox { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }
    pub fn mul(&self, o: &ComplexBox) -> ComplexBox {
        ComplexBox {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }
    /// Enclosure of `|z|²`.
    pub fn norm_sqr(&self) -> Interval {
        self.re.sqr().add(&self.im.sqr())
    }
    /// Upper bound on `|z|` over the box.
    pub fn abs_upper(&self) -> f64 {
        self.norm_sqr().sqrt().hi
    }
    pub fn div(&self, o: &ComplexBox) -> Result<ComplexBox, AlgebraError> {
        let d = o.norm_sqr();
        if d.contains_zero() {
            return Err(AlgebraError::PossiblePole);
        }
        let conj = ComplexBox { re: o.re, im: o.im.neg() };
        let n = self.mul(&conj);
        Ok(ComplexBox { re: n.re.div(&d)?, im: n.im.div(&d)? })
    }
    /// Hex-float quadruple `[re_lo, re_hi, im_lo, im_hi]`.
    pub fn to_hex(&self) -> [String; 4] {
        [hex_f64(self.re.lo), hex_f64(self.re.hi), hex_f64(self.im.lo), hex_f64(self.im.hi)]
    }
    pub fn from_hex(q: &[String; 4]) -> Result<Self, AlgebraError> {
        let v: Vec<f64> = q.iter().map(|s| parse_hex_f64(s)).collect::<Result<_, _>>()?;
        if v[0] > v[1] || v[2] > v[3] {
            return Err(AlgebraError::Parse("inverted box".into()));
        }
        Ok(ComplexBox::from_bounds(v[0], v[1], v[2], v[3]))
    }
}

impl fmt::Display for ComplexBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + i{}", self.re, self.im)
    }
}

/// Horner enclosure of a polynomial over a box.
pub fn poly_enclose(p: &Poly<CRat>, b: &ComplexBox) -> ComplexBox {
    let mut acc = ComplexBox::zero();
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(b).add(&ComplexBox::from_crat(c));
    }
    acc
}

/// Enclosure of `f(λ)` for every `λ` in the box.
pub fn ratfunc_enclose(f: &RatFunc<CRat>, b: &ComplexBox) -> Result<ComplexBox, AlgebraError> {
    let n = poly_enclose(f.num(), b);
    let d = poly_enclose(f.den(), b);
    n.div(&d)
}

/// C99-style hexadecimal float, exact and round-trippable.
pub fn hex_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x == 0.0 {
        return format!("{sign}0x0p+0");
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let mut frac = format!("{mant:013x}");
    while frac.ends_with('0') {
        frac.pop();
    }
    let es = if e >= 0 { format!("+{e}") } else { e.to_string() };
    if frac.is_empty() {
        format!("{sign}0x{lead}p{es}")
    } else {
        format!("{sign}0x{lead}.{frac}p{es}")
    }
}

pub fn parse_hex_f64(s: &str) -> Result<f64, AlgebraError> {
    let bad = || AlgebraError::Parse(s.to_string());
    let t = s.trim();
    match t {
        "inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        "nan" => return Ok(f64::NAN),
        _ => {}
    }
    let (neg, t) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let t = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).ok_or_else(bad)?;
    let (m, e) = t.split_once(['p', 'P']).ok_or_else(bad)?;
    let e: i64 = e.parse().map_err(|_| bad())?;
    let (ip, fp) = m.split_once('.').unwrap_or((m, ""));
    let digits = format!("{ip}{fp}");
    if digits.is_empty() || digits.len() > 40 {
        return Err(bad());
    }
    let n = BigInt::parse_bytes(digits.as_bytes(), 16).ok_or_else(bad)?;
    let shift = e - 4 * fp.len() as i64;
    let two = BigInt::from(2);
    let r = if shift >= 0 {
        BigRational::from_integer(n * num_traits::pow(two, shift as usize))
    } else {
        BigRational::new(n, num_traits::pow(two, (-shift) as usize))
    };
    let x = r.to_f64().ok_or_else(bad)?;
    if BigRational::from_float(x) != Some(r) {
        return Err(bad());
    }
    Ok(if neg { -x } else { x })
}

/// Serializable hex quadruple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HexBox(pub [String; 4]);
