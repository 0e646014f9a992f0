use std::fmt::Debug;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::Poly;

pub type Rat = BigRational;

/// Commutative ring with identity. Methods take references so the same code
/// serves big rationals, floats and nested function fields.
pub trait Ring: Clone + PartialEq + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_i64(n: i64) -> Self;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }
    fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
    fn scale_i64(&self, n: i64) -> Self {
        self.mul(&Self::from_i64(n))
    }
}

pub trait Field: Ring {
    /// Multiplicative inverse. Panics on zero; callers check first.
    fn inv(&self) -> Self;
    fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv())
    }
    /// Cheap sufficient test that two polynomials over the field are coprime.
    fn coprime_hint(_a: &Poly<Self>, _b: &Poly<Self>) -> bool
    where
        Self: Sized,
    {
        false
    }
}

/// Exact square roots where they exist in the field.
pub trait ExactSqrt: Field {
    fn sqrt_exact(&self) -> Option<Self>;
}

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

impl Ring for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_i64(n: i64) -> Self {
        rat_int(n)
    }
}

impl Field for BigRational {
    fn inv(&self) -> Self {
        assert!(!Ring::is_zero(self), "inverse of zero");
        self.recip()
    }
}

fn sqrt_bigint(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

impl ExactSqrt for BigRational {
    fn sqrt_exact(&self) -> Option<Self> {
        let n = sqrt_bigint(self.numer())?;
        let d = sqrt_bigint(self.denom())?;
        Some(BigRational::new(n, d))
    }
}

impl Ring for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
}

impl Field for Complex64 {
    fn inv(&self) -> Self {
        Complex64::new(1.0, 0.0) / self
    }
}
