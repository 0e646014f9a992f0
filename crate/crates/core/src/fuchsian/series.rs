use num_complex::Complex64;
use serde::Serialize;

use super::{FuchsError, ParamODE, Point};
use crate::algebra::{kconst, specialize, BiRatFunc, CRat, Field, Poly, RatFunc, RatFuncL, Ring};

/// `x·p(c + x)` and `x²·q(c + x)` as rational functions of `x` over `Q(i)(λ)`.
#[derive(Clone, Debug)]
pub struct LocalForm {
    pub p: BiRatFunc,
    pub q: BiRatFunc,
}

impl LocalForm {
    pub fn new(ode: &ParamODE, center: &CRat) -> Self {
        let x: BiRatFunc = RatFunc::x();
        let shift = x.add(&kconst(RatFunc::constant(center.clone())));
        LocalForm {
            p: ode.p.compose(&shift).mul(&x),
            q: ode.q.compose(&shift).mul(&x.mul(&x)),
        }
    }
    pub fn at_exact(&self, lambda: &CRat) -> Result<LocalExpansion<CRat>, FuchsError> {
        let p = specialize(&self.p, lambda)?;
        let q = specialize(&self.q, lambda)?;
        LocalExpansion::new(p.num().clone(), p.den().clone(), q.num().clone(), q.den().clone())
    }
    pub fn at_c64(&self, lambda: Complex64) -> Result<LocalExpansion<Complex64>, FuchsError> {
        let ev = |poly: &Poly<RatFuncL>| -> Result<Poly<Complex64>, FuchsError> {
            let mut out = Vec::with_capacity(poly.coeffs().len());
            for c in poly.coeffs() {
                let n = c.num().map(|x| x.to_c64()).eval(&lambda);
                let d = c.den().map(|x| x.to_c64()).eval(&lambda);
                if d.norm() == 0.0 {
                    return Err(crate::algebra::AlgebraError::Pole(lambda.to_string()).into());
                }
                out.push(n / d);
            }
            Ok(Poly::new(out))
        };
        LocalExpansion::new(ev(self.p.num())?, ev(self.p.den())?, ev(self.q.num())?, ev(self.q.den())?)
    }
}

/// Taylor coefficients of the local coefficient functions, extended on demand.
#[derive(Clone, Debug)]
pub struct LocalExpansion<F: Field> {
    pn: Vec<F>,
    pd: Vec<F>,
    qn: Vec<F>,
    qd: Vec<F>,
    pk: Vec<F>,
    qk: Vec<F>,
}

fn series_div_next<F: Field>(num: &[F], den: &[F], out: &[F]) -> F {
    let n = out.len();
    let mut acc = num.get(n).cloned().unwrap_or_else(F::zero);
    for k in 1..=n.min(den.len().saturating_sub(1)) {
        acc = acc.sub(&den[k].mul(&out[n - k]));
    }
    acc.div(&den[0])
}

impl<F: Field> LocalExpansion<F> {
    pub fn new(pn: Poly<F>, pd: Poly<F>, qn: Poly<F>, qd: Poly<F>) -> Result<Self, FuchsError> {
        if pd.coeff(0).is_zero() || qd.coeff(0).is_zero() {
            return Err(FuchsError::NotFuchsian { point: Point::int(0), which: "local", order: 1 });
        }
        Ok(LocalExpansion {
            pn: pn.into_coeffs(),
            pd: pd.into_coeffs(),
            qn: qn.into_coeffs(),
            qd: qd.into_coeffs(),
            pk: Vec::new(),
            qk: Vec::new(),
        })
    }
    fn fill(&mut self, k: usize) {
        while self.pk.len() <= k {
            let v = series_div_next(&self.pn, &self.pd, &self.pk);
            self.pk.push(v);
        }
        while self.qk.len() <= k {
            let v = series_div_next(&self.qn, &self.qd, &self.qk);
            self.qk.push(v);
        }
    }
    pub fn p(&mut self, k: usize) -> F {
        self.fill(k);
        self.pk[k].clone()
    }
    pub fn q(&mut self, k: usize) -> F {
        self.fill(k);
        self.qk[k].clone()
    }
    /// `P(s) = s(s−1) + p₀ s + q₀`
    pub fn indicial(&mut self, s: &F) -> F {
        s.mul(&s.sub(&F::one())).add(&self.p(0).mul(s)).add(&self.q(0))
    }
    /// Next Frobenius coefficient from the previous ones; `None` on a
    /// vanishing indicial value with nonzero right-hand side.
    pub fn next_coeff(&mut self, sigma: &F, a: &[F]) -> Option<F> {
        let n = a.len();
        self.fill(n);
        let mut rhs = F::zero();
        for k in 1..=n {
            let s = sigma.add(&F::from_i64((n - k) as i64));
            let term = s.mul(&self.pk[k]).add(&self.qk[k]);
            if !term.is_zero() {
                rhs = rhs.sub(&term.mul(&a[n - k]));
            }
        }
        let den = self.indicial(&sigma.add(&F::from_i64(n as i64)));
        if den.is_zero() {
            return if rhs.is_zero() { Some(F::zero()) } else { None };
        }
        Some(rhs.div(&den))
    }
    /// Magnitude data for float error propagation.
    fn term_weights(&mut self, sigma: &F, n: usize) -> Vec<F> {
        self.fill(n);
        (1..=n)
            .map(|k| sigma.add(&F::from_i64((n - k) as i64)).mul(&self.pk[k]).add(&self.qk[k]))
            .collect()
    }
}

/// Exact Frobenius series `(z − c)^σ Σ a_k (z − c)^k`.
#[derive(Clone, Debug)]
pub struct SeriesSolution {
    pub center: Point,
    pub lambda: CRat,
    pub exponent: CRat,
    pub coeffs: Vec<CRat>,
    pub radius: f64,
    local: LocalExpansion<CRat>,
}

impl SeriesSolution {
    pub fn new(center: Point, lambda: CRat, exponent: CRat, local: LocalExpansion<CRat>, radius: f64) -> Self {
        SeriesSolution { center, lambda, exponent, coeffs: vec![CRat::one()], radius, local }
    }
    /// Make sure `a_0 … a_order` are available.
    pub fn extend(&mut self, order: usize) -> Result<(), FuchsError> {
        while self.coeffs.len() <= order {
            let a = self.local.next_coeff(&self.exponent, &self.coeffs).ok_or_else(|| FuchsError::LogCase {
                point: self.center.clone(),
                difference: format!("index {}", self.coeffs.len()),
            })?;
            self.coeffs.push(a);
        }
        Ok(())
    }
    pub fn truncated(&self, order: usize) -> &[CRat] {
        &self.coeffs[..=order.min(self.coeffs.len() - 1)]
    }
    /// Residual of the ODE applied to the truncated series, as a Laurent
    /// polynomial `x^{σ−2} Σ r_k x^k`; returns the first index with `r_k ≠ 0`.
    pub fn residual_valuation(&mut self, order: usize) -> Option<usize> {
        let a = self.coeffs[..=order].to_vec();
        let s = &self.exponent;
        let kmax = order + 40;
        for n in 0..kmax {
            // coefficient of x^{σ+n−2} in x² f'' + x P f' + Q f, divided out
            let mut r = CRat::zero();
            for (k, ak) in a.iter().enumerate().take(n + 1) {
                let j = n - k;
                let sk = s.add(&CRat::int(k as i64));
                let mut c = sk.mul(&self.local.p(j)).add(&self.local.q(j));
                if j == 0 {
                    c = c.add(&sk.mul(&sk.sub(&CRat::one())));
                }
                r = r.add(&c.mul(ak));
            }
            if !r.is_zero() {
                return Some(n);
            }
        }
        None
    }
}

/// Floating Frobenius series with first-order roundoff bounds per coefficient.
#[derive(Clone, Debug)]
pub struct FloatSeries {
    pub center: Point,
    pub center_value: Complex64,
    pub lambda: Complex64,
    pub exponent: Complex64,
    pub coeffs: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub radius: f64,
    local: LocalExpansion<Complex64>,
}

impl FloatSeries {
    pub fn extend(&mut self, order: usize) -> Result<(), FuchsError> {
        while self.coeffs.len() <= order {
            let n = self.coeffs.len();
            let a = self.local.next_coeff(&self.exponent, &self.coeffs).ok_or_else(|| FuchsError::LogCase {
                point: self.center.clone(),
                difference: format!("index {n}"),
            })?;
            let w = self.local.term_weights(&self.exponent, n);
            let den = self.local.indicial(&(self.exponent + n as f64)).norm();
            let mut e = 4.0 * f64::EPSILON * a.norm();
            for (k, wk) in w.iter().enumerate() {
                let idx = n - 1 - k;
                e += wk.norm() * (self.errors[idx] + 4.0 * f64::EPSILON * self.coeffs[idx].norm()) / den;
            }
            self.coeffs.push(a);
            self.errors.push(e);
        }
        Ok(())
    }
    /// Value and derivative at a local offset `x`, summed until the terms fall
    /// below `tol` relative to the sum.
    pub fn eval_local(&mut self, x: Complex64, tol: f64, max_order: usize) -> Result<(Complex64, Complex64, usize), FuchsError> {
        if x.norm() >= self.radius {
            return Err(FuchsError::OutsideDisk { dist: x.norm(), radius: self.radius });
        }
        let mut sum = Complex64::new(0.0, 0.0);
        let mut dsum = Complex64::new(0.0, 0.0);
        let mut xp = Complex64::new(1.0, 0.0);
        let mut quiet = 0;
        let mut n = 0;
        while n <= max_order {
            self.extend(n)?;
            let t = self.coeffs[n] * xp;
            sum += t;
            dsum += t * (self.exponent + n as f64);
            if t.norm() <= tol * sum.norm().max(1e-300) {
                quiet += 1;
                if quiet >= 4 {
                    break;
                }
            } else {
                quiet = 0;
            }
            xp *= x;
            n += 1;
        }
        let pw = local_power(x, self.exponent);
        let val = pw * sum;
        let der = if x.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { pw * dsum / x };
        Ok((val, der, n))
    }
}

/// Principal power with exact integer exponents.
fn local_power(x: Complex64, s: Complex64) -> Complex64 {
    if s.im == 0.0 && s.re == s.re.round() && s.re.abs() < 64.0 {
        return x.powi(s.re as i32);
    }
    if x.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    x.powc(s)
}

/// Floating-point Frobenius series at a regular singular point.
pub fn frobenius_float(
    form: &LocalForm,
    point: &Point,
    exponent: Complex64,
    lambda: Complex64,
    radius: f64,
) -> Result<FloatSeries, FuchsError> {
    let local = form.at_c64(lambda)?;
    let center_value = match point {
        Point::Finite(z) => z.to_c64(),
        Point::Infinity => Complex64::new(f64::INFINITY, 0.0),
    };
    Ok(FloatSeries {
        center: point.clone(),
        center_value,
        lambda,
        exponent,
        coeffs: vec![Complex64::new(1.0, 0.0)],
        errors: vec![0.0],
        radius,
        local,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesEval {
    pub value: Complex64,
    /// Heuristic size of the omitted tail from the last retained terms.
    pub tail_estimate: f64,
    pub order: usize,
}

/// Evaluate an exact series at `z` with `order + 1` terms.
pub fn series_eval(s: &mut SeriesSolution, z: Complex64, order: usize) -> Result<SeriesEval, FuchsError> {
    let x = match &s.center {
        Point::Finite(c) => z - c.to_c64(),
        Point::Infinity => 1.0 / z,
    };
    if x.norm() >= s.radius {
        return Err(FuchsError::OutsideDisk { dist: x.norm(), radius: s.radius });
    }
    s.extend(order)?;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut xp = Complex64::new(1.0, 0.0);
    let mut terms = Vec::with_capacity(order + 1);
    for a in &s.coeffs[..=order] {
        let t = a.to_c64() * xp;
        terms.push(t.norm());
        sum += t;
        xp *= x;
    }
    let pw = local_power(x, s.exponent.to_c64());
    let last = *terms.last().unwrap_or(&0.0);
    let tail = if order == 0 {
        0.0
    } else {
        let k0 = order.saturating_sub(5).max(1);
        let mut q: f64 = 0.0;
        for k in k0..=order {
            if terms[k - 1] > 0.0 {
                q = q.max(terms[k] / terms[k - 1]);
            }
        }
        if q < 1.0 {
            last * q / (1.0 - q)
        } else {
            f64::INFINITY
        }
    };
    Ok(SeriesEval { value: pw * sum, tail_estimate: tail * pw.norm(), order })
}
