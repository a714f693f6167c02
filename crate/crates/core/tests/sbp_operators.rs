use esdg_core::sbp::{
    build_sbp, gauss_legendre_rule, interpolation_matrix, lgl_rule, sbp_operators, SbpError,
};
use nalgebra::DVector;
use proptest::prelude::*;

#[test]
fn identities_hold_for_orders_one_to_ten() {
    for n in 1..=10 {
        let ops = sbp_operators(n).unwrap();
        assert!(ops.sbp_residual() < 1e-13, "N={n}: {}", ops.sbp_residual());
        assert!(
            ops.consistency_residual() < 1e-13,
            "N={n}: {}",
            ops.consistency_residual()
        );
        assert!(
            ops.rearranged_residual() < 1e-12,
            "N={n}: {}",
            ops.rearranged_residual()
        );
    }
}

#[test]
fn lgl_integrates_like_gauss_up_to_degree_2n_minus_1() {
    for n in 1..=10 {
        let lgl = lgl_rule(n).unwrap();
        let gauss = gauss_legendre_rule(n + 1).unwrap();
        for degree in 0..2 * n {
            let f = |x: f64| x.powi(degree as i32);
            let a = lgl.integrate(f);
            let b = gauss.integrate(f);
            assert!(
                (a - b).abs() <= 1e-12 * b.abs().max(1.0),
                "N={n} degree {degree}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn lgl_is_not_exact_at_degree_2n() {
    for n in 1..=6 {
        let lgl = lgl_rule(n).unwrap();
        let exact = 2.0 / (2 * n + 1) as f64;
        assert!((lgl.integrate(|x| x.powi(2 * n as i32)) - exact).abs() > 1e-6);
    }
}

#[test]
fn order_zero_is_rejected() {
    assert!(matches!(lgl_rule(0), Err(SbpError::OrderTooLow(0))));
    assert!(build_sbp(0).is_err());
}

#[test]
fn registry_returns_shared_operators() {
    let a = sbp_operators(5).unwrap();
    let b = sbp_operators(5).unwrap();
    assert!(std::sync::Arc::ptr_eq(&a, &b));
    assert_eq!(*a, build_sbp(5).unwrap());
}

#[test]
fn operators_csv_lists_every_entry() {
    let ops = sbp_operators(2).unwrap();
    let csv = ops.to_csv();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("i,node,weight,D_0,D_1,D_2"));
}

proptest! {
    #[test]
    fn derivative_is_exact_on_polynomials(n in 1usize..=8, coeffs in prop::collection::vec(-2.0f64..2.0, 9)) {
        let ops = sbp_operators(n).unwrap();
        let x = ops.nodes();
        let p = |t: f64| (0..=n).map(|k| coeffs[k] * t.powi(k as i32)).sum::<f64>();
        let dp = |t: f64| (1..=n).map(|k| k as f64 * coeffs[k] * t.powi(k as i32 - 1)).sum::<f64>();
        let values = DVector::from_iterator(n + 1, x.iter().map(|&t| p(t)));
        let d = &ops.d * values;
        for (i, &t) in x.iter().enumerate() {
            prop_assert!((d[i] - dp(t)).abs() < 1e-10, "N={} node {}: {} vs {}", n, i, d[i], dp(t));
        }
    }

    #[test]
    fn interpolation_reproduces_polynomials(n in 1usize..=8, at in prop::collection::vec(-1.0f64..1.0, 1..6), c in prop::collection::vec(-1.0f64..1.0, 9)) {
        let ops = sbp_operators(n).unwrap();
        let p = |t: f64| (0..=n).map(|k| c[k] * t.powi(k as i32)).sum::<f64>();
        let values = DVector::from_iterator(n + 1, ops.nodes().iter().map(|&t| p(t)));
        let out = interpolation_matrix(ops.nodes(), &at) * values;
        for (k, &t) in at.iter().enumerate() {
            prop_assert!((out[k] - p(t)).abs() < 1e-11);
        }
    }
}
