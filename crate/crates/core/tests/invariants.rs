mod common;

use proptest::prelude::*;

use orlicz::discretization::{GridFunction, KernelSpec};
use orlicz::functionals::{eval_F, eval_ell};
use orlicz::norms::{luxemburg, Modular};
use orlicz::phi::{build_phi, conjugate, PhiExpression};
use orlicz::solver::Energy;

use common::*;

const CELLS: usize = 12;

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, CELLS)
}

fn phi_expr() -> impl Strategy<Value = PhiExpression> {
    prop_oneof![
        (1.2f64..4.0).prop_map(|p| PhiExpression::power(p, 1.0)),
        (1.2f64..2.5, 2.5f64..4.0)
            .prop_map(|(p, q)| PhiExpression::sum(vec![PhiExpression::power(p, 1.0), PhiExpression::power(q, 0.5)])),
    ]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1e-300 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn functional_is_even_and_shift_invariant(v in values(), c in -10.0f64..10.0, e in phi_expr()) {
        let disc = unit_disc(CELLS, &gaussian(SIGMA));
        let phi = build_phi(&e).unwrap();
        let u = GridFunction::new(disc.grid().clone(), v).unwrap();
        let f = eval_F(&disc, &phi, &u).unwrap().value();
        prop_assert!(f >= 0.0);
        prop_assert!(rel(eval_F(&disc, &phi, &u.scale(-1.0)).unwrap().value(), f) < 1e-13);
        prop_assert!(rel(eval_F(&disc, &phi, &u.shift(c)).unwrap().value(), f) < 1e-9);
    }

    #[test]
    fn luxemburg_norm_is_a_seminorm(a in values(), b in values(), s in -4.0f64..4.0, e in phi_expr()) {
        let disc = unit_disc(CELLS, &gaussian(SIGMA));
        let phi = build_phi(&e).unwrap();
        let u = GridFunction::new(disc.grid().clone(), a).unwrap();
        let v = GridFunction::new(disc.grid().clone(), b).unwrap();
        let lux = |w: &GridFunction| luxemburg(&disc, &phi, Modular::F(w)).unwrap().value;
        let (nu, nv) = (lux(&u), lux(&v));
        prop_assert!(rel(lux(&u.scale(s)), s.abs() * nu) < 1e-8 || s.abs() * nu < 1e-12);
        prop_assert!(lux(&u.add(&v).unwrap()) <= (nu + nv) * (1.0 + 1e-9));
    }

    #[test]
    fn modular_at_the_norm_is_one(a in values(), e in phi_expr()) {
        let disc = unit_disc(CELLS, &gaussian(SIGMA));
        let phi = build_phi(&e).unwrap();
        let u = GridFunction::new(disc.grid().clone(), a).unwrap();
        let lam = luxemburg(&disc, &phi, Modular::F(&u)).unwrap().value;
        prop_assume!(lam > 1e-6);
        let f = eval_F(&disc, &phi, &u.scale(1.0 / lam)).unwrap().value();
        prop_assert!((f - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn young_inequality(s in 0.0f64..20.0, t in 0.0f64..20.0, x in 0.0f64..1.0, y in 0.0f64..1.0, e in phi_expr()) {
        let phi = build_phi(&e).unwrap();
        let lhs = s * t;
        let rhs = phi.eval(s, &[x], &[y]) + conjugate(&phi, t, &[x], &[y]).unwrap();
        prop_assert!(lhs <= rhs + 1e-8 * (1.0 + lhs));
    }

    #[test]
    fn energy_is_convex_along_segments(a in values(), b in values(), t in 0.0f64..1.0, e in phi_expr()) {
        let disc = unit_disc(CELLS, &KernelSpec::constant_on(1.0));
        let phi = build_phi(&e).unwrap();
        let g = GridFunction::from_expr(disc.grid(), "x0").unwrap();
        let en = Energy::new(&disc, &phi, phi.p_minus(), &g).unwrap();
        let u = GridFunction::new(disc.grid().clone(), a).unwrap();
        let v = GridFunction::new(disc.grid().clone(), b).unwrap();
        let m = u.lincomb(1.0 - t, &v, t).unwrap();
        let (eu, ev, em) = (en.value(&u).unwrap(), en.value(&v).unwrap(), en.value(&m).unwrap());
        prop_assert!(em <= (1.0 - t) * eu + t * ev + 1e-9 * (1.0 + eu.abs() + ev.abs()));
    }

    #[test]
    fn first_variation_is_linear(a in values(), b in values(), c in values(), e in phi_expr()) {
        let disc = unit_disc(CELLS, &gaussian(SIGMA));
        let phi = build_phi(&e).unwrap();
        let mk = |v: Vec<f64>| GridFunction::new(disc.grid().clone(), v).unwrap();
        let (u, v, w) = (mk(a), mk(b), mk(c));
        let sum = eval_ell(&disc, &phi, &u, &v.lincomb(2.0, &w, -3.0).unwrap()).unwrap();
        let parts = 2.0 * eval_ell(&disc, &phi, &u, &v).unwrap() - 3.0 * eval_ell(&disc, &phi, &u, &w).unwrap();
        prop_assert!((sum - parts).abs() <= 1e-9 * (1.0 + sum.abs() + parts.abs()));
    }

    #[test]
    fn expression_json_round_trips(e in phi_expr()) {
        let back = PhiExpression::from_json(&e.to_json()).unwrap();
        prop_assert_eq!(build_phi(&back).unwrap().hash(), build_phi(&e).unwrap().hash());
    }
}
