//! Dense univariate polynomials over a ring, lowest degree first.

use std::fmt;

use super::field::{ExactSqrt, Field, Ring};

#[derive(Clone, PartialEq, Debug)]
pub struct Poly<R: Ring> {
    c: Vec<R>,
}

impl<R: Ring> Poly<R> {
    pub fn new(mut c: Vec<R>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }
    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }
    pub fn constant(a: R) -> Self {
        Poly::new(vec![a])
    }
    /// The variable itself.
    pub fn x() -> Self {
        Poly { c: vec![R::zero(), R::one()] }
    }
    /// `a·x^k`
    pub fn monomial(a: R, k: usize) -> Self {
        let mut c = vec![R::zero(); k];
        c.push(a);
        Poly::new(c)
    }
    /// `x − a`
    pub fn linear_root(a: &R) -> Self {
        Poly { c: vec![a.neg(), R::one()] }
    }
    pub fn coeffs(&self) -> &[R] {
        &self.c
    }
    pub fn into_coeffs(self) -> Vec<R> {
        self.c
    }
    pub fn coeff(&self, k: usize) -> R {
        self.c.get(k).cloned().unwrap_or_else(R::zero)
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }
    pub fn deg_i(&self) -> i64 {
        self.c.len() as i64 - 1
    }
    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }
    pub fn lead(&self) -> R {
        self.c.last().cloned().unwrap_or_else(R::zero)
    }
    /// Lowest power with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }
    pub fn eval(&self, x: &R) -> R {
        let mut acc = R::zero();
        for a in self.c.iter().rev() {
            acc = acc.mul(x).add(a);
        }
        acc
    }
    pub fn scale(&self, a: &R) -> Self {
        if a.is_zero() {
            return Poly::zero();
        }
        Poly::new(self.c.iter().map(|x| x.mul(a)).collect())
    }
    pub fn neg(&self) -> Self {
        Poly { c: self.c.iter().map(|x| x.neg()).collect() }
    }
    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let mut c = Vec::with_capacity(n);
        for k in 0..n {
            c.push(match (self.c.get(k), o.c.get(k)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        Poly::new(c)
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![R::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    c[i + j] = c[i + j].add(&a.mul(b));
                }
            }
        }
        Poly::new(c)
    }
    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Poly::constant(R::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
    /// Multiply by `x^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![R::zero(); k];
        c.extend(self.c.iter().cloned());
        Poly { c }
    }
    pub fn derivative(&self) -> Self {
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a.scale_i64(k as i64))
                .collect(),
        )
    }
    /// `self(g(x))`
    pub fn compose(&self, g: &Self) -> Self {
        let mut acc = Poly::zero();
        for a in self.c.iter().rev() {
            acc = acc.mul(g).add(&Poly::constant(a.clone()));
        }
        acc
    }
    /// `self(x + a)`
    pub fn taylor_shift(&self, a: &R) -> Self {
        self.compose(&Poly::new(vec![a.clone(), R::one()]))
    }
    /// `self(x^k)`
    pub fn inflate(&self, k: usize) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![R::zero(); (self.c.len() - 1) * k + 1];
        for (i, a) in self.c.iter().enumerate() {
            c[i * k] = a.clone();
        }
        Poly { c }
    }
    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> Poly<S> {
        Poly::new(self.c.iter().map(f).collect())
    }
    /// Truncated Taylor coefficients, padded with zeros to length `n`.
    pub fn truncated(&self, n: usize) -> Vec<R> {
        (0..n).map(|k| self.coeff(k)).collect()
    }
}

impl<F: Field> Poly<F> {
    /// Euclidean division: `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.c.len() - 1;
        if self.c.len() < d.c.len() {
            return (Poly::zero(), self.clone());
        }
        let inv_lead = d.lead().inv();
        let mut r = self.c.clone();
        let mut q = vec![F::zero(); self.c.len() - dd];
        for k in (0..q.len()).rev() {
            let coef = r[k + dd].mul(&inv_lead);
            if coef.is_zero() {
                continue;
            }
            for (j, b) in d.c.iter().enumerate() {
                if !b.is_zero() {
                    r[k + j] = r[k + j].sub(&coef.mul(b));
                }
            }
            q[k] = coef;
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }
    /// Exact quotient; panics if the remainder is nonzero.
    pub fn exact_div(&self, d: &Self) -> Self {
        let (q, r) = self.div_rem(d);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }
    pub fn divides(&self, o: &Self) -> bool {
        o.div_rem(self).1.is_zero()
    }
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let l = self.lead();
        if l.is_one() {
            return self.clone();
        }
        self.scale(&l.inv())
    }
    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.monic();
        }
        if o.is_zero() {
            return self.monic();
        }
        if self.is_constant() || o.is_constant() || F::coprime_hint(self, o) {
            return Poly::constant(F::one());
        }
        let (mut a, mut b) = if self.c.len() >= o.c.len() {
            (self.monic(), o.monic())
        } else {
            (o.monic(), self.monic())
        };
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r.monic();
            if b.is_constant() && !b.is_zero() {
                return Poly::constant(F::one());
            }
        }
        a
    }
}

impl<F: ExactSqrt> Poly<F> {
    /// Square root of a perfect square polynomial.
    pub fn sqrt_exact(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let n = self.c.len() - 1;
        if n % 2 == 1 {
            return None;
        }
        let d = n / 2;
        let top = self.lead().sqrt_exact()?;
        let two_top = top.scale_i64(2);
        let mut s = vec![F::zero(); d + 1];
        s[d] = top;
        for k in (0..d).rev() {
            let mut acc = self.c[d + k].clone();
            for i in (k + 1)..d {
                let j = d + k - i;
                if j > k && j < d {
                    acc = acc.sub(&s[i].mul(&s[j]));
                }
            }
            s[k] = acc.div(&two_top);
        }
        let r = Poly::new(s);
        if r.mul(&r) == *self {
            Some(r)
        } else {
            None
        }
    }
}

impl<R: Ring> Ring for Poly<R> {
    fn zero() -> Self {
        Poly::zero()
    }
    fn one() -> Self {
        Poly::constant(R::one())
    }
    fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    fn add(&self, o: &Self) -> Self {
        Poly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Poly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Poly::mul(self, o)
    }
    fn neg(&self) -> Self {
        Poly::neg(self)
    }
    fn from_i64(n: i64) -> Self {
        Poly::constant(R::from_i64(n))
    }
}

/// Formatting with an explicit variable name.
pub trait FmtVar {
    fn fmt_var(&self, var: &str) -> String;
}

impl<R: Ring + fmt::Display> FmtVar for Poly<R> {
    fn fmt_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let a_s = a.to_string();
            let simple = !a_s.contains(['+', '/', ' ']) && !a_s[1..].contains('-');
            let coef = if k == 0 {
                a_s
            } else if a.is_one() {
                String::new()
            } else if a_s == "-1" {
                "-".into()
            } else if simple {
                a_s
            } else {
                format!("({a_s})")
            };
            let mon = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            let sep = if k > 0 && !coef.is_empty() && coef != "-" { "*" } else { "" };
            parts.push(format!("{coef}{sep}{mon}"));
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

impl<R: Ring + fmt::Display> fmt::Display for Poly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_var("x"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::crat::CRat;

    fn p(c: &[i64]) -> Poly<CRat> {
        Poly::new(c.iter().map(|&x| CRat::int(x)).collect())
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = p(&[1, 2, 3, 4, 5]);
        let b = p(&[-1, 0, 2]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(q.mul(&b).add(&r), a);
        assert!(r.degree().unwrap() < 2);
    }

    #[test]
    fn gcd_of_products() {
        let common = p(&[-2, 1]).mul(&p(&[1, 0, 1]));
        let a = common.mul(&p(&[3, 1]));
        let b = common.mul(&p(&[5, 7, 1]));
        assert_eq!(a.gcd(&b), common);
        assert_eq!(p(&[1, 1]).gcd(&p(&[2, 1])), p(&[1]));
    }

    #[test]
    fn sqrt_of_square() {
        let a = p(&[3, -2, 5, 1]);
        assert_eq!(a.mul(&a).sqrt_exact().unwrap().mul(&a.mul(&a).sqrt_exact().unwrap()), a.mul(&a));
        assert!(p(&[1, 0, 2]).sqrt_exact().is_none());
    }

    #[test]
    fn compose_and_shift() {
        let a = p(&[1, 2, 1]);
        assert_eq!(a.taylor_shift(&CRat::int(-1)), p(&[0, 0, 1]));
        assert_eq!(a.inflate(2), p(&[1, 0, 2, 0, 1]));
    }
}
