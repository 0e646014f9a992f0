//! Gaussian rationals `a + b i` with `a, b` arbitrary-precision rationals.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::field::{rat_int, ExactSqrt, Field, Rat, Ring};
use super::AlgebraError;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CRat {
    pub re: Rat,
    pub im: Rat,
}

impl CRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        CRat { re, im }
    }
    pub fn real(re: Rat) -> Self {
        CRat { re, im: <Rat as Zero>::zero() }
    }
    pub fn int(n: i64) -> Self {
        CRat::real(rat_int(n))
    }
    pub fn frac(n: i64, d: i64) -> Self {
        CRat::real(super::field::rat(n, d))
    }
    pub fn i() -> Self {
        CRat { re: <Rat as Zero>::zero(), im: rat_int(1) }
    }
    pub fn gauss(re: i64, im: i64) -> Self {
        CRat { re: rat_int(re), im: rat_int(im) }
    }
    pub fn is_real(&self) -> bool {
        Zero::is_zero(&self.im)
    }
    pub fn conj(&self) -> Self {
        CRat { re: self.re.clone(), im: -&self.im }
    }
    /// |z|² as an exact rational.
    pub fn norm_sqr(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    /// Exact image of a finite float pair.
    pub fn from_c64(z: Complex64) -> Option<Self> {
        Some(CRat {
            re: BigRational::from_float(z.re)?,
            im: BigRational::from_float(z.im)?,
        })
    }
}

impl Ring for CRat {
    fn zero() -> Self {
        CRat { re: <Rat as Zero>::zero(), im: <Rat as Zero>::zero() }
    }
    fn one() -> Self {
        CRat::int(1)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
    fn add(&self, o: &Self) -> Self {
        CRat { re: &self.re + &o.re, im: &self.im + &o.im }
    }
    fn sub(&self, o: &Self) -> Self {
        CRat { re: &self.re - &o.re, im: &self.im - &o.im }
    }
    fn mul(&self, o: &Self) -> Self {
        if self.is_real() && o.is_real() {
            return CRat::real(&self.re * &o.re);
        }
        CRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    fn neg(&self) -> Self {
        CRat { re: -&self.re, im: -&self.im }
    }
    fn from_i64(n: i64) -> Self {
        CRat::int(n)
    }
}

impl Field for CRat {
    fn inv(&self) -> Self {
        assert!(!Ring::is_zero(self), "inverse of zero");
        if self.is_real() {
            return CRat::real(self.re.recip());
        }
        let n = self.norm_sqr();
        CRat { re: &self.re / &n, im: -&self.im / &n }
    }
}

impl ExactSqrt for CRat {
    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_real() {
            return if !self.re.is_negative() {
                self.re.sqrt_exact().map(CRat::real)
            } else {
                (-&self.re).sqrt_exact().map(|r| CRat::new(<Rat as Zero>::zero(), r))
            };
        }
        // x + iy with x² − y² = a, 2xy = b, x² + y² = |z|.
        let m = self.norm_sqr().sqrt_exact()?;
        let two = rat_int(2);
        let x2 = (&m + &self.re) / &two;
        let x = x2.sqrt_exact()?;
        if Zero::is_zero(&x) {
            return None;
        }
        let y = &self.im / (&two * &x);
        let r = CRat::new(x, y);
        if r.mul(&r) == *self {
            Some(r)
        } else {
            None
        }
    }
}

fn fmt_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse `p`, `p/q` or a decimal such as `-1.25`.
pub fn parse_rat(s: &str) -> Result<Rat, AlgebraError> {
    let s = s.trim();
    let bad = || AlgebraError::Parse(s.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        let n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let r = BigRational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    BigInt::from_str(s).map(BigRational::from_integer).map_err(|_| bad())
}

/// `p/q`, or `p` for integers.
pub fn rat_to_string(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        fmt_rat(r)
    }
}

/// Parse `a`, `a+bi`, `bi`, `a-bi` with rational or decimal parts.
pub fn parse_crat(s: &str) -> Result<CRat, AlgebraError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || AlgebraError::Parse(s.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    if let Some(body) = t.strip_suffix('i') {
        // find the split between real and imaginary parts
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && bytes[k - 1] != b'e' {
                split = Some(k);
                break;
            }
        }
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1".to_string(),
            "-" => "-1".to_string(),
            x => x.trim_start_matches('+').to_string(),
        };
        return Ok(CRat::new(parse_rat(re)?, parse_rat(&im).map_err(|_| bad())?));
    }
    Ok(CRat::real(parse_rat(&t)?))
}

impl fmt::Display for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |r: &Rat| {
            if r.is_integer() {
                r.numer().to_string()
            } else {
                fmt_rat(r)
            }
        };
        if self.is_real() {
            return write!(f, "{}", show(&self.re));
        }
        if Zero::is_zero(&self.re) {
            return write!(f, "{}i", show(&self.im));
        }
        if self.im.is_negative() {
            write!(f, "{}-{}i", show(&self.re), show(&-&self.im))
        } else {
            write!(f, "{}+{}i", show(&self.re), show(&self.im))
        }
    }
}

/// Serde adapter for a single rational as `"p/q"`.
pub mod rat_serde {
    use super::*;
    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for vectors of rationals.
pub mod rat_vec_serde {
    use super::*;
    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(fmt_rat).collect();
        strs.serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_rat(s).map_err(serde::de::Error::custom)).collect()
    }
}

impl Serialize for CRat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [fmt_rat(&self.re), fmt_rat(&self.im)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for CRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [re, im] = <[String; 2]>::deserialize(d)?;
        Ok(CRat::new(
            parse_rat(&re).map_err(serde::de::Error::custom)?,
            parse_rat(&im).map_err(serde::de::Error::custom)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_crat("3/7").unwrap(), CRat::frac(3, 7));
        assert_eq!(parse_crat("1+2i").unwrap(), CRat::gauss(1, 2));
        assert_eq!(parse_crat("-i").unwrap(), CRat::gauss(0, -1));
        assert_eq!(parse_crat("0.5-1/3i").unwrap(), CRat::new(super::super::field::rat(1, 2), super::super::field::rat(-1, 3)));
        assert!(parse_crat("abc").is_err());
    }

    #[test]
    fn sqrt_gaussian() {
        let z = CRat::gauss(3, 4); // (2+i)²
        let r = z.sqrt_exact().unwrap();
        assert_eq!(r.mul(&r), z);
        assert_eq!(CRat::int(-4).sqrt_exact().unwrap(), CRat::gauss(0, 2));
        assert!(CRat::int(2).sqrt_exact().is_none());
    }

    #[test]
    fn display_roundtrip() {
        for z in [CRat::gauss(2, -3), CRat::frac(-5, 33), CRat::new(super::super::field::rat(1, 2), super::super::field::rat(7, 9))] {
            assert_eq!(parse_crat(&z.to_string()).unwrap(), z);
        }
    }
}
