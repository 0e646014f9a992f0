//! Dense bivariate polynomials over Q, `Σ c[i][j] x^i y^j`, with exact and
//! interval evaluation.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::crat::rat_vec_serde;
use super::field::{rat_int, Rat};
use super::interval::Interval;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly2 {
    /// Row `i` holds the coefficients of `x^i` as a polynomial in `y`.
    #[serde(with = "rows_serde")]
    c: Vec<Vec<Rat>>,
}

mod rows_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Row(#[serde(with = "rat_vec_serde")] Vec<Rat>);

    pub fn serialize<S: Serializer>(v: &[Vec<Rat>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Row> = v.iter().map(|r| Row(r.clone())).collect();
        rows.serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rat>>, D::Error> {
        Ok(Vec::<Row>::deserialize(d)?.into_iter().map(|r| r.0).collect())
    }
}

impl Poly2 {
    pub fn new(mut c: Vec<Vec<Rat>>) -> Self {
        for row in c.iter_mut() {
            while row.last().is_some_and(|x| x.is_zero()) {
                row.pop();
            }
        }
        while c.last().is_some_and(|r| r.is_empty()) {
            c.pop();
        }
        Poly2 { c }
    }
    pub fn zero() -> Self {
        Poly2 { c: Vec::new() }
    }
    /// Univariate polynomial in `x` (no `y` dependence).
    pub fn from_x(coeffs: Vec<Rat>) -> Self {
        Poly2::new(coeffs.into_iter().map(|a| vec![a]).collect())
    }
    pub fn rows(&self) -> &[Vec<Rat>] {
        &self.c
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    pub fn coeff(&self, i: usize, j: usize) -> Rat {
        self.c.get(i).and_then(|r| r.get(j)).cloned().unwrap_or_else(Rat::zero)
    }
    pub fn deg_x(&self) -> usize {
        self.c.len().saturating_sub(1)
    }
    pub fn deg_y(&self) -> usize {
        self.c.iter().map(|r| r.len()).max().unwrap_or(0).saturating_sub(1)
    }
    pub fn add(&self, o: &Poly2) -> Poly2 {
        let n = self.c.len().max(o.c.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.c.get(i).map(|r| r.as_slice()).unwrap_or(&[]);
            let b = o.c.get(i).map(|r| r.as_slice()).unwrap_or(&[]);
            let m = a.len().max(b.len());
            c.push((0..m).map(|j| a.get(j).cloned().unwrap_or_default() + b.get(j).cloned().unwrap_or_default()).collect());
        }
        Poly2::new(c)
    }
    pub fn scale(&self, a: &Rat) -> Poly2 {
        Poly2::new(self.c.iter().map(|r| r.iter().map(|x| x * a).collect()).collect())
    }
    pub fn sub(&self, o: &Poly2) -> Poly2 {
        self.add(&o.scale(&rat_int(-1)))
    }
    pub fn mul(&self, o: &Poly2) -> Poly2 {
        if self.is_zero() || o.is_zero() {
            return Poly2::zero();
        }
        let (dx, dy) = (self.deg_x() + o.deg_x() + 1, self.deg_y() + o.deg_y() + 1);
        let mut c = vec![vec![Rat::zero(); dy]; dx];
        for (i1, r1) in self.c.iter().enumerate() {
            for (j1, a) in r1.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (i2, r2) in o.c.iter().enumerate() {
                    for (j2, b) in r2.iter().enumerate() {
                        if !b.is_zero() {
                            c[i1 + i2][j1 + j2] += a * b;
                        }
                    }
                }
            }
        }
        Poly2::new(c)
    }
    pub fn d_dx(&self) -> Poly2 {
        Poly2::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, r)| r.iter().map(|a| a * rat_int(i as i64)).collect())
                .collect(),
        )
    }
    pub fn d_dy(&self) -> Poly2 {
        Poly2::new(
            self.c
                .iter()
                .map(|r| r.iter().enumerate().skip(1).map(|(j, a)| a * rat_int(j as i64)).collect())
                .collect(),
        )
    }
    pub fn eval(&self, x: &Rat, y: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for r in self.c.iter().rev() {
            let mut inner = Rat::zero();
            for a in r.iter().rev() {
                inner = inner * y + a;
            }
            acc = acc * x + inner;
        }
        acc
    }
    /// Restrict to a fixed `y`, giving coefficients in `x`.
    pub fn at_y(&self, y: &Rat) -> Vec<Rat> {
        self.c
            .iter()
            .map(|r| r.iter().rev().fold(Rat::zero(), |acc, a| acc * y + a))
            .collect()
    }
    /// Coefficients of `x^i` as polynomials in `y`.
    pub fn x_coeff_polys(&self) -> &[Vec<Rat>] {
        &self.c
    }
    pub fn to_interval(&self) -> IntervalPoly2 {
        IntervalPoly2 {
            c: self.c.iter().map(|r| r.iter().map(Interval::from_rat).collect()).collect(),
        }
    }
    /// True if every coefficient is nonnegative.
    pub fn all_nonnegative(&self) -> bool {
        self.c.iter().flatten().all(|a| !a.is_negative())
    }
}

/// Coefficients rounded outward for fast enclosure.
#[derive(Clone, Debug)]
pub struct IntervalPoly2 {
    c: Vec<Vec<Interval>>,
}

impl IntervalPoly2 {
    /// Nested Horner enclosure over `x × y`.
    pub fn eval(&self, x: Interval, y: Interval) -> Interval {
        let mut acc = Interval::zero();
        for r in self.c.iter().rev() {
            let mut inner = Interval::zero();
            for a in r.iter().rev() {
                inner = inner.mul(&y).add(a);
            }
            acc = acc.mul(&x).add(&inner);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::rat;

    #[test]
    fn enclosure_contains_exact() {
        let p = Poly2::new(vec![
            vec![rat(1, 3), rat(-2, 7)],
            vec![rat(5, 1), rat(0, 1), rat(1, 9)],
            vec![rat(-1, 11)],
        ]);
        let ip = p.to_interval();
        let e = ip.eval(Interval::new(0.25, 0.5), Interval::new(-1.0, 0.125));
        for (x, y) in [(rat(1, 4), rat(-1, 1)), (rat(3, 8), rat(0, 1)), (rat(1, 2), rat(1, 8))] {
            assert!(e.contains_rat(&p.eval(&x, &y)));
        }
    }

    #[test]
    fn derivatives() {
        let p = Poly2::new(vec![vec![rat(0, 1), rat(0, 1), rat(1, 1)], vec![rat(0, 1), rat(3, 1)]]); // y² + 3xy
        assert_eq!(p.d_dx(), Poly2::new(vec![vec![rat(0, 1), rat(3, 1)]]));
        assert_eq!(p.d_dy(), Poly2::new(vec![vec![rat(0, 1), rat(2, 1)], vec![rat(3, 1)]]));
    }
}
