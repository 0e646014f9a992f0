//! Rational functions over a field in canonical form: coprime numerator and
//! monic denominator.

use std::fmt;

use super::field::{ExactSqrt, Field, Ring};
use super::poly::{FmtVar, Poly};
use super::AlgebraError;

#[derive(Clone, PartialEq, Debug)]
pub struct RatFunc<F: Field> {
    num: Poly<F>,
    den: Poly<F>,
}

impl<F: Field> RatFunc<F> {
    /// Build and reduce `num/den`.
    pub fn new(num: Poly<F>, den: Poly<F>) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::ZeroDenominator);
        }
        Ok(Self::reduce(num, den))
    }
    /// Like [`RatFunc::new`] for callers that know the denominator is nonzero.
    pub fn frac(num: Poly<F>, den: Poly<F>) -> Self {
        Self::new(num, den).expect("zero denominator")
    }
    fn reduce(num: Poly<F>, den: Poly<F>) -> Self {
        if num.is_zero() {
            return RatFunc { num, den: Poly::constant(F::one()) };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_constant() { (num, den) } else { (num.exact_div(&g), den.exact_div(&g)) };
        Self::normalize_lead(num, den)
    }
    fn normalize_lead(num: Poly<F>, den: Poly<F>) -> Self {
        let l = den.lead();
        if l.is_one() {
            RatFunc { num, den }
        } else {
            let li = l.inv();
            RatFunc { num: num.scale(&li), den: den.scale(&li) }
        }
    }
    pub fn from_poly(p: Poly<F>) -> Self {
        RatFunc { num: p, den: Poly::constant(F::one()) }
    }
    pub fn constant(a: F) -> Self {
        Self::from_poly(Poly::constant(a))
    }
    pub fn x() -> Self {
        Self::from_poly(Poly::x())
    }
    pub fn num(&self) -> &Poly<F> {
        &self.num
    }
    pub fn den(&self) -> &Poly<F> {
        &self.den
    }
    pub fn is_poly(&self) -> bool {
        self.den.is_constant()
    }
    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }
    /// The constant value, if this is a constant.
    pub fn as_constant(&self) -> Option<F> {
        if self.is_constant() {
            Some(self.num.coeff(0))
        } else {
            None
        }
    }
    /// `deg num − deg den`; `None` for zero.
    pub fn degree(&self) -> Option<i64> {
        if self.num.is_zero() {
            None
        } else {
            Some(self.num.deg_i() - self.den.deg_i())
        }
    }
    pub fn eval(&self, x: &F) -> Result<F, AlgebraError> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(AlgebraError::Pole(format!("{x:?}")));
        }
        Ok(self.num.eval(x).div(&d))
    }
    pub fn derivative(&self) -> Self {
        let n = self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()));
        Self::reduce(n, self.den.mul(&self.den))
    }
    /// `self(g)` for a rational function `g`.
    pub fn compose(&self, g: &Self) -> Self {
        let big_n = self.num.coeffs().len().max(self.den.coeffs().len());
        if big_n == 0 {
            return self.clone();
        }
        let top = big_n - 1;
        let (a, b) = (&g.num, &g.den);
        let mut apow = vec![Poly::constant(F::one())];
        let mut bpow = vec![Poly::constant(F::one())];
        for k in 1..=top {
            apow.push(apow[k - 1].mul(a));
            bpow.push(bpow[k - 1].mul(b));
        }
        let homog = |p: &Poly<F>| {
            let mut acc = Poly::zero();
            for (k, c) in p.coeffs().iter().enumerate() {
                if !c.is_zero() {
                    acc = acc.add(&apow[k].mul(&bpow[top - k]).scale(c));
                }
            }
            acc
        };
        Self::reduce(homog(&self.num), homog(&self.den))
    }
    /// Apply a coefficient map to numerator and denominator.
    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> Result<RatFunc<G>, AlgebraError> {
        RatFunc::new(self.num.map(&f), self.den.map(&f))
    }
    pub fn powi(&self, e: i32) -> Self {
        let p = Ring::pow(self, e.unsigned_abs());
        if e < 0 {
            p.inv()
        } else {
            p
        }
    }
}

impl<F: ExactSqrt> RatFunc<F> {
    pub fn sqrt_exact(&self) -> Option<Self> {
        Some(Self::normalize_lead(self.num.sqrt_exact()?, self.den.sqrt_exact()?))
    }
}

impl<F: ExactSqrt> ExactSqrt for RatFunc<F> {
    fn sqrt_exact(&self) -> Option<Self> {
        RatFunc::sqrt_exact(self)
    }
}

impl<F: Field> Ring for RatFunc<F> {
    fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }
    fn one() -> Self {
        Self::constant(F::one())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn is_one(&self) -> bool {
        self.den.is_constant() && self.num.coeffs().len() == 1 && self.num.coeff(0).is_one()
    }
    fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return Self::reduce(self.num.add(&o.num), self.den.clone());
        }
        let g = self.den.gcd(&o.den);
        if g.is_constant() {
            let n = self.num.mul(&o.den).add(&o.num.mul(&self.den));
            let d = self.den.mul(&o.den);
            return Self::normalize_lead(n, d);
        }
        let b1 = self.den.exact_div(&g);
        let d1 = o.den.exact_div(&g);
        let n = self.num.mul(&d1).add(&o.num.mul(&b1));
        if n.is_zero() {
            return Self::zero();
        }
        let h = n.gcd(&g);
        let (n, g) = if h.is_constant() { (n, g) } else { (n.exact_div(&h), g.exact_div(&h)) };
        Self::normalize_lead(n, b1.mul(&d1).mul(&g))
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        if self.den.is_constant() && o.den.is_constant() {
            return Self::normalize_lead(self.num.mul(&o.num), self.den.mul(&o.den));
        }
        let g1 = self.num.gcd(&o.den);
        let g2 = o.num.gcd(&self.den);
        let q = |a: &Poly<F>, g: &Poly<F>| if g.is_constant() { a.clone() } else { a.exact_div(g) };
        let n = q(&self.num, &g1).mul(&q(&o.num, &g2));
        let d = q(&self.den, &g2).mul(&q(&o.den, &g1));
        Self::normalize_lead(n, d)
    }
    fn neg(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }
    fn from_i64(n: i64) -> Self {
        Self::constant(F::from_i64(n))
    }
}

impl<F: Field> Field for RatFunc<F> {
    fn inv(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero rational function");
        Self::normalize_lead(self.den.clone(), self.num.clone())
    }
    // Specialize the inner variable: with leads and all coefficient
    // denominators nonzero there, a constant gcd downstairs forces one upstairs.
    fn coprime_hint(a: &Poly<Self>, b: &Poly<Self>) -> bool {
        let mut tried = 0;
        for k in [3i64, -7, 11, 19, -23, 29] {
            let x = F::from_i64(k);
            let spec = |p: &Poly<Self>| -> Option<Poly<F>> {
                let cs: Option<Vec<F>> = p.coeffs().iter().map(|c| c.eval(&x).ok()).collect();
                let q = Poly::new(cs?);
                (q.degree() == p.degree()).then_some(q)
            };
            let (Some(sa), Some(sb)) = (spec(a), spec(b)) else { continue };
            if sa.gcd(&sb).is_constant() {
                return true;
            }
            tried += 1;
            if tried == 2 {
                break;
            }
        }
        false
    }
}

impl<F: Field + fmt::Display> FmtVar for RatFunc<F> {
    fn fmt_var(&self, var: &str) -> String {
        if self.den.is_constant() {
            return self.num.fmt_var(var);
        }
        format!("({})/({})", self.num.fmt_var(var), self.den.fmt_var(var))
    }
}

impl<F: Field + fmt::Display> fmt::Display for RatFunc<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_var("λ"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::crat::CRat;

    type Rf = RatFunc<CRat>;

    fn lin(a: i64) -> Poly<CRat> {
        Poly::linear_root(&CRat::int(a))
    }

    #[test]
    fn reduces_common_factor() {
        let f = Rf::frac(lin(1).mul(&lin(2)), lin(1).mul(&lin(3)).scale(&CRat::int(4)));
        assert_eq!(f.den(), &lin(3));
        assert_eq!(f.num(), &lin(2).scale(&CRat::frac(1, 4)));
    }

    #[test]
    fn add_cancels() {
        let a = Rf::frac(Poly::constant(CRat::int(1)), lin(1));
        let b = Rf::frac(Poly::constant(CRat::int(-1)), lin(1));
        assert!(a.add(&b).is_zero());
        let c = Rf::frac(Poly::constant(CRat::int(1)), lin(1).mul(&lin(2)));
        let d = Rf::frac(Poly::constant(CRat::int(1)), lin(1).mul(&lin(3)));
        let s = c.add(&d);
        assert_eq!(s.sub(&d), c);
    }

    #[test]
    fn compose_inverse_mobius() {
        // m(x) = 2x/(x+1), m⁻¹(z) = z/(2−z)
        let x = Rf::x();
        let m = x.scale_i64(2).div(&x.add(&Rf::one()));
        let minv = x.div(&Rf::from_i64(2).sub(&x));
        assert_eq!(m.compose(&minv), x);
    }

    #[test]
    fn derivative_quotient_rule() {
        let f = Rf::frac(lin(0), lin(1));
        // d/dx x/(x−1) = −1/(x−1)²
        assert_eq!(f.derivative(), Rf::frac(Poly::constant(CRat::int(-1)), lin(1).mul(&lin(1))));
    }
}
