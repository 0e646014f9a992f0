use modestab::algebra::{ratfunc_enclose, rat, ComplexBox, CRat, Field, Poly, RatFunc, RatFuncL, Ring};
use modestab::fuchsian::{fuchs_check, frobenius_series, indicial, registry, Branch, Point};
use modestab::recurrence::{coefficients, derive_recurrence, Mode, Values};
use modestab::shooting::{Settings, Shooter};
use modestab::simcoords::{cos_prop, sin_prop, sobolev_norm, test_class, Resolution};
use modestab::transform::{gauge, mobius, GaugeFactor, MobiusMap};
use num_complex::Complex64;
use proptest::prelude::*;

fn small_crat() -> impl Strategy<Value = CRat> {
    (-6i64..=6, -6i64..=6, 1i64..=4).prop_map(|(a, b, d)| CRat::new(rat(a, d), rat(b, d)))
}

fn real_crat() -> impl Strategy<Value = CRat> {
    (-8i64..=8, 1i64..=5).prop_map(|(a, d)| CRat::frac(a, d))
}

fn poly() -> impl Strategy<Value = Poly<CRat>> {
    prop::collection::vec(small_crat(), 0..4).prop_map(Poly::new)
}

fn ratfunc() -> impl Strategy<Value = RatFuncL> {
    (poly(), poly()).prop_filter_map("zero denominator", |(n, d)| RatFunc::new(n, d).ok())
}

fn rec() -> modestab::recurrence::RecurrenceSystem {
    derive_recurrence(&registry::specss_heun()).unwrap()
}

fn exact(v: Values) -> Vec<CRat> {
    match v {
        Values::Exact(v) => v,
        Values::Float { .. } => panic!("expected exact values"),
    }
}

/// λ values with no integer exponent difference at ρ = 0 for the spec branch.
fn generic_lambda() -> impl Strategy<Value = CRat> {
    (-5i64..=5, 1i64..=5, 1i64..=3).prop_map(|(a, b, d)| CRat::new(rat(a, d), rat(b, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn crat_field_axioms(a in small_crat(), b in small_crat(), c in small_crat()) {
        prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.sub(&a), CRat::zero());
        if !a.is_zero() {
            prop_assert_eq!(a.mul(&a.inv()), CRat::one());
        }
    }

    #[test]
    fn poly_ring_axioms(p in poly(), q in poly(), r in poly(), x in small_crat()) {
        prop_assert_eq!(p.add(&q).mul(&r), p.mul(&r).add(&q.mul(&r)));
        prop_assert_eq!(p.mul(&q), q.mul(&p));
        prop_assert_eq!(p.mul(&q).eval(&x), p.eval(&x).mul(&q.eval(&x)));
        prop_assert_eq!(p.compose(&q).eval(&x), p.eval(&q.eval(&x)));
        prop_assert_eq!(p.mul(&q).derivative(), p.derivative().mul(&q).add(&p.mul(&q.derivative())));
    }

    #[test]
    fn ratfunc_field_axioms(f in ratfunc(), g in ratfunc(), h in ratfunc()) {
        prop_assert_eq!(f.add(&g).mul(&h), f.mul(&h).add(&g.mul(&h)));
        prop_assert_eq!(f.add(&g).sub(&g), f.clone());
        if !g.is_zero() {
            prop_assert_eq!(f.mul(&g).div(&g), f.clone());
        }
    }

    #[test]
    fn ratfunc_normal_form_is_idempotent(f in ratfunc(), g in poly()) {
        prop_assume!(!g.is_zero());
        let again = RatFunc::new(f.num().mul(&g), f.den().mul(&g)).unwrap();
        prop_assert_eq!(&again, &f);
        prop_assert_eq!(RatFunc::new(f.num().clone(), f.den().clone()).unwrap(), f);
    }

    #[test]
    fn enclosures_nest_and_contain(
        f in ratfunc(),
        (x0, y0) in (-16i64..16, -16i64..16),
        (w, h) in (1i64..8, 1i64..8),
        (u, v) in (0i64..=8, 0i64..=8),
    ) {
        let big = ComplexBox::from_bounds(x0 as f64 / 8.0, (x0 + w) as f64 / 8.0, y0 as f64 / 8.0, (y0 + h) as f64 / 8.0);
        let small = ComplexBox::from_bounds(x0 as f64 / 8.0, (x0 as f64 + w as f64 / 2.0) / 8.0, y0 as f64 / 8.0, (y0 as f64 + h as f64 / 2.0) / 8.0);
        let z = CRat::new(rat(2 * x0 * 8 + u * w, 128), rat(2 * y0 * 8 + v * h, 128));
        prop_assert!(small.contains_crat(&z));
        if let (Ok(eb), Ok(es)) = (ratfunc_enclose(&f, &big), ratfunc_enclose(&f, &small)) {
            prop_assert!(es.subset_of(&eb));
            if let Ok(val) = f.eval(&z) {
                prop_assert!(es.contains_crat(&val));
            }
        }
    }

    #[test]
    fn gauge_exponents_add(m1 in real_crat(), m2 in real_crat(), m3 in real_crat()) {
        let ode = registry::specss_heun0();
        let g1 = GaugeFactor::new(vec![(CRat::int(1), RatFunc::constant(m1)), (CRat::int(-1), RatFunc::constant(m2))]);
        let g2 = GaugeFactor::new(vec![(CRat::int(1), RatFunc::constant(m3))]);
        let both = g1.compose(&g2);
        prop_assert_eq!(both.log_derivative(), g1.log_derivative().add(&g2.log_derivative()));
        prop_assert!(gauge(&gauge(&ode, &g1), &g2).same_equation(&gauge(&ode, &both)));
        prop_assert!(gauge(&gauge(&ode, &g1), &g1.inverse()).same_equation(&ode));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn frobenius_residual_and_prefix(lam in generic_lambda(), n in 4usize..14, extra in 1usize..8) {
        let ode = registry::spec();
        let at = Point::int(0);
        let mut s = frobenius_series(&ode, &at, Branch::Top, &lam, n).unwrap();
        let v = s.residual_valuation(n);
        prop_assert!(v.map_or(true, |k| k > n), "residual starts at {:?} for order {}", v, n);
        let longer = frobenius_series(&ode, &at, Branch::Top, &lam, n + extra).unwrap();
        prop_assert_eq!(longer.truncated(n), s.truncated(n));
    }

    #[test]
    fn indicial_roots_are_zeros(lam in generic_lambda()) {
        let ode = registry::specss_heun();
        for p in [Point::int(0), Point::int(1), Point::int(2), Point::Infinity] {
            let d = indicial(&ode, &p).unwrap();
            if let Ok((top, sub)) = d.exponents_at(&lam) {
                let poly = d.indicial_at(&lam).unwrap();
                prop_assert!(poly.eval(&top).is_zero());
                prop_assert!(poly.eval(&sub).is_zero());
            }
        }
    }

    #[test]
    fn mobius_moves_singular_points(a in -3i64..=3, b in -3i64..=3, c in -3i64..=3, d in -3i64..=3) {
        prop_assume!(a * d - b * c != 0);
        let ode = registry::specss_heun0();
        let m = MobiusMap::ints(a, b, c, d).unwrap();
        let before: Vec<Point> = fuchs_check(&ode).unwrap().into_iter().map(|s| s.location).collect();
        let mut want: Vec<String> = before.iter().map(|p| m.apply(p).to_string()).collect();
        let moved = mobius(&ode, &m, &GaugeFactor::default()).unwrap();
        let mut got: Vec<String> = fuchs_check(&moved).unwrap().into_iter().map(|s| s.location.to_string()).collect();
        want.sort();
        got.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn recurrence_matches_frobenius(lam in small_crat(), n in 2usize..12) {
        let r = rec();
        let a = exact(coefficients(&r, &lam, n, Mode::Exact).unwrap());
        let s = frobenius_series(&registry::specss_heun(), &Point::int(0), Branch::Top, &lam, n).unwrap();
        prop_assert_eq!(a.as_slice(), s.truncated(n));
    }

    #[test]
    fn float_tracks_exact(lam in small_crat(), n in 10usize..100) {
        let r = rec();
        let e = exact(coefficients(&r, &lam, n, Mode::Exact).unwrap());
        let f = coefficients(&r, &lam, n, Mode::Float).unwrap().to_c64();
        for (x, y) in e.iter().zip(&f) {
            let x = x.to_c64();
            prop_assert!((x - y).norm() <= 1e-10 * x.norm().max(1e-300), "{} vs {}", x, y);
        }
    }

    #[test]
    fn shooting_mismatch_is_analytic(re in 0.05f64..2.4, im in -9.0f64..9.0) {
        let sh = Shooter::new(Settings::default()).unwrap();
        let r = sh.cauchy_riemann_residual(&[Complex64::new(re, im)], 1e-4).unwrap();
        prop_assert!(r < 1e-6, "CR residual {:e} at {}+{}i", r, re, im);
    }
}

#[test]
fn recurrence_identity_on_grid() {
    let r = rec();
    for lam in [CRat::int(0), CRat::int(1), CRat::i(), CRat::gauss(2, 3)] {
        let a = exact(coefficients(&r, &lam, 52, Mode::Exact).unwrap());
        for n in 0..=50usize {
            let an = r.a_n(n as i64).unwrap().eval(&lam).unwrap();
            let bn = r.b_n(n as i64).unwrap().eval(&lam).unwrap();
            let lhs = a[n + 2].sub(&an.mul(&a[n + 1])).sub(&bn.mul(&a[n]));
            assert!(lhs.is_zero(), "λ = {lam}, n = {n}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn free_propagators_do_not_grow(pick in 0usize..4, t in 0.05f64..1.5, s in prop::sample::select(vec![1.0, 2.0, 3.0])) {
        let f = test_class()[pick].profile(&Resolution::default()).unwrap();
        let base = sobolev_norm(&f, s).unwrap();
        prop_assert!(sobolev_norm(&cos_prop(&f, t), s).unwrap() <= base * (1.0 + 1e-9));
        prop_assert!(sobolev_norm(&sin_prop(&f, t), s + 1.0).unwrap() <= base * (1.0 + 1e-9));
    }
}

#[test]
fn certificates_are_deterministic() {
    let a = modestab::certify::certify_mode_stability("wavemaps-corotational").unwrap();
    let b = modestab::certify::certify_mode_stability("wavemaps-corotational").unwrap();
    let (ja, jb) = (serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(ja, jb);
    let back: modestab::certify::Certificate = serde_json::from_str(&ja).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), ja);
}
