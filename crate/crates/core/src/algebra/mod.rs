//! Exact arithmetic over the Gaussian rationals, polynomial and rational
//! function towers in `(z, λ)`, and outward-rounded complex intervals.

pub mod crat;
pub mod expr;
pub mod hexf;
pub mod field;
pub mod interval;
pub mod poly;
pub mod poly2;
pub mod ratfunc;
pub mod roots;
mod serde_impls;

use thiserror::Error;

pub use crat::{parse_crat, parse_rat, rat_to_string, CRat};
pub use expr::{parse_birat, parse_ratfunc};
pub use field::{rat, rat_int, ExactSqrt, Field, Rat, Ring};
pub use interval::{ratfunc_enclose, ComplexBox, Interval};
pub use poly::{FmtVar, Poly};
pub use poly2::Poly2;
pub use ratfunc::RatFunc;
pub use roots::{quadratic_roots, QuadraticRoots};

/// Rational function in λ with Gaussian rational coefficients.
pub type RatFuncL = RatFunc<CRat>;
/// Rational function in an outer variable over `Q(i)(λ)`.
pub type BiRatFunc = RatFunc<RatFuncL>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("pole at {0}")]
    Pole(String),
    #[error("denominator enclosure contains zero")]
    PossiblePole,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("expected degree {expected}, got {got}")]
    Degree { expected: i64, got: i64 },
    #[error("cannot parse {0:?}")]
    Parse(String),
}

/// Exact value of `f` at `λ`.
pub fn ratfunc_eval(f: &RatFuncL, lambda: &CRat) -> Result<CRat, AlgebraError> {
    f.eval(lambda)
}

/// Polynomial in λ from integer coefficients, lowest degree first.
pub fn poly_i(c: &[i64]) -> Poly<CRat> {
    Poly::new(c.iter().map(|&x| CRat::int(x)).collect())
}

/// Rational function in λ from integer numerator and denominator coefficients.
pub fn rf_i(num: &[i64], den: &[i64]) -> RatFuncL {
    RatFunc::frac(poly_i(num), poly_i(den))
}

/// The variable λ.
pub fn lam() -> RatFuncL {
    RatFunc::x()
}

/// Constant of the outer field.
pub fn kconst(c: RatFuncL) -> BiRatFunc {
    RatFunc::constant(c)
}

/// The outer variable `z` over `Q(i)(λ)`.
pub fn zvar() -> BiRatFunc {
    RatFunc::x()
}

/// Rational constant lifted to any tower level.
pub fn bq(n: i64, d: i64) -> BiRatFunc {
    kconst(RatFunc::constant(CRat::frac(n, d)))
}

/// Lift a rational function in one variable into the outer variable of the
/// tower (coefficients become constants in λ).
pub fn lift_outer(f: &RatFuncL) -> BiRatFunc {
    RatFunc::frac(f.num().map(|c| RatFunc::constant(c.clone())), f.den().map(|c| RatFunc::constant(c.clone())))
}

/// Substitute a concrete λ into every coefficient.
pub fn specialize(f: &BiRatFunc, lambda: &CRat) -> Result<RatFuncL, AlgebraError> {
    let n = f.num().map(|c| c.eval(lambda).unwrap_or_else(|_| CRat::zero()));
    let d = f.den().map(|c| c.eval(lambda).unwrap_or_else(|_| CRat::zero()));
    for c in f.num().coeffs().iter().chain(f.den().coeffs()) {
        c.eval(lambda)?;
    }
    RatFunc::new(n, d)
}
