use std::f64::consts::FRAC_1_SQRT_2;

use proptest::prelude::*;
use rgclt::charfn::eval_cf;
use rgclt::flow::{contraction_ratio, lyapunov_decrease_check, renorm_step, CONTRACTION_CONSTANT};
use rgclt::metric::{
    check_convolution_invariance, check_convolution_subadditivity, check_scaling_ideality,
    check_self_convolution_bound, check_triangle, ds_distance, ds_distance_unchecked,
};
use rgclt::{GridSpec, Measure};

fn coarse() -> GridSpec {
    GridSpec { xi_min: 1e-3, xi_max: 50.0, points_per_decade: 40, symmetric: true }
}

prop_compose! {
    fn raw_atoms(max: usize)(atoms in prop::collection::vec((-5.0f64..5.0, 0.05f64..1.0), 2..=max)) -> Vec<(f64, f64)> {
        atoms
    }
}

/// Standardized atomic law with at least two distinct atoms.
fn standardized(max: usize) -> impl Strategy<Value = Measure> {
    raw_atoms(max)
        .prop_map(|atoms| Measure::atomic(atoms).unwrap())
        .prop_filter("needs spread", |m| m.variance() > 1e-6)
        .prop_map(|m| m.standardize().unwrap())
}

prop_compose! {
    fn parametric_std()(which in 0usize..4) -> Measure {
        let r3 = 3f64.sqrt();
        match which {
            0 => Measure::parametric("uniform", &[-r3, r3]).unwrap(),
            1 => Measure::parametric("laplace", &[0.0, FRAC_1_SQRT_2]).unwrap(),
            2 => Measure::parametric("exponential", &[1.0, -1.0]).unwrap(),
            _ => Measure::standard_gaussian(),
        }
    }
}

fn any_standardized() -> impl Strategy<Value = Measure> {
    prop_oneof![standardized(5), parametric_std()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn atomic_weights_sum_to_one(atoms in raw_atoms(8)) {
        let m = Measure::atomic(atoms).unwrap();
        let a = m.atoms().unwrap();
        let total: f64 = a.iter().map(|x| x.weight).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(a.windows(2).all(|w| w[0].position < w[1].position));
    }

    #[test]
    fn standardize_is_idempotent(m in standardized(6)) {
        prop_assert!(m.mean().abs() < 1e-12);
        prop_assert!((m.variance() - 1.0).abs() < 1e-12);
        let again = m.standardize().unwrap();
        for (a, b) in m.atoms().unwrap().iter().zip(again.atoms().unwrap()) {
            prop_assert!((a.position - b.position).abs() < 1e-12);
        }
    }

    #[test]
    fn moments_scale_as_powers(atoms in raw_atoms(6), lambda in 0.1f64..4.0) {
        let m = Measure::atomic(atoms).unwrap();
        let scaled = m.scale(lambda).unwrap();
        for k in 1..=4 {
            for absolute in [false, true] {
                let a = m.moment(k, absolute).unwrap() * lambda.powi(k as i32);
                let b = scaled.moment(k, absolute).unwrap();
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "k={} {} vs {}", k, a, b);
            }
        }
    }

    #[test]
    fn convolution_adds_cumulants(a in any_standardized(), b in any_standardized(), shift in -2.0f64..2.0) {
        let b = b.affine(shift, 1.5).unwrap();
        let c = a.convolve(&b);
        prop_assert!((c.mean() - a.mean() - b.mean()).abs() < 1e-12);
        prop_assert!((c.variance() - a.variance() - b.variance()).abs() < 1e-10);
        let k3 = |m: &Measure| {
            let mu = m.mean();
            m.moment(3, false).unwrap() - 3.0 * mu * m.moment(2, false).unwrap() + 2.0 * mu.powi(3)
        };
        prop_assert!((k3(&c) - k3(&a) - k3(&b)).abs() < 1e-9);
    }

    #[test]
    fn cf_is_bounded_by_one(m in any_standardized(), level in 0u32..8, xi in -60.0f64..60.0) {
        let l = m.cf_level(level).unwrap();
        prop_assert!(eval_cf(&l, xi).norm() <= 1.0 + 1e-12);
        prop_assert!((eval_cf(&l, 0.0) - 1.0).norm() == 0.0);
    }

    #[test]
    fn cf_of_convolution_is_product(a in any_standardized(), b in any_standardized(), xi in -20.0f64..20.0) {
        let c = a.convolve(&b);
        let want = eval_cf(&a, xi) * eval_cf(&b, xi);
        prop_assert!((eval_cf(&c, xi) - want).norm() < 1e-12);
    }

    #[test]
    fn distance_is_symmetric(a in any_standardized(), b in any_standardized()) {
        for s in [2.0, 3.0] {
            let ab = ds_distance_unchecked(&a, &b, s, &coarse()).unwrap();
            let ba = ds_distance_unchecked(&b, &a, s, &coarse()).unwrap();
            prop_assert_eq!(ab.value, ba.value);
        }
    }

    #[test]
    fn exact_atomic_flow_matches_cf_level(m in standardized(3), n in 1u32..=5, xi in 0.001f64..30.0) {
        let mut exact = m.clone();
        for _ in 0..n {
            exact = renorm_step(&exact).unwrap();
        }
        prop_assert!(exact.atoms().is_some());
        let level = m.cf_level(n).unwrap();
        prop_assert!((eval_cf(&exact, xi) - eval_cf(&level, xi)).norm() < 1e-10);
    }

    #[test]
    fn renormalization_contracts(a in any_standardized(), b in any_standardized()) {
        let d = ds_distance(&a, &b, 3.0, &coarse()).unwrap().value;
        prop_assume!(d > 1e-9);
        let c = contraction_ratio(&a, &b, &coarse()).unwrap();
        prop_assert!(c.ratio <= CONTRACTION_CONSTANT + 1e-6, "{:?}", c);
    }

    #[test]
    fn lyapunov_decreases(m in standardized(5)) {
        let c = lyapunov_decrease_check(&m, &coarse()).unwrap();
        prop_assert!(c.holds, "{:?}", c);
    }

    #[test]
    fn ideal_metric_inequalities(a in any_standardized(), b in any_standardized(), c in any_standardized(), d in any_standardized()) {
        let g = coarse();
        for s in [2.0, 3.0] {
            prop_assert!(check_convolution_subadditivity(&a, &b, &c, &d, s, &g).unwrap().holds);
            prop_assert!(check_convolution_invariance(&a, &b, &c, s, &g).unwrap().holds);
            prop_assert!(check_triangle(&a, &b, &c, s, &g).unwrap().holds);
            prop_assert!(check_self_convolution_bound(&a, &b, s, &g).unwrap().holds);
        }
    }

    #[test]
    fn scaling_is_exact_on_matched_grids(a in any_standardized(), b in any_standardized(), lambda in 0.2f64..5.0) {
        for s in [2.0, 3.0] {
            let c = check_scaling_ideality(&a, &b, lambda, s, &coarse()).unwrap();
            prop_assert!(c.holds, "{:?}", c);
        }
    }
}
