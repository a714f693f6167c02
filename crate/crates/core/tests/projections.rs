mod common;

use esdg_core::projection::{
    build_h_pairs, build_p_pair, compatibility_residual, diag_extract, h_pairs, p_pair,
    InterfaceGeometry, ProjectionError,
};
use esdg_core::sbp::sbp_operators;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

fn weights(n: usize) -> Vec<f64> {
    sbp_operators(n).unwrap().weights().to_vec()
}

fn geometries() -> Vec<(usize, usize, InterfaceGeometry)> {
    let mut out = Vec::new();
    for fine in 1..=8 {
        for coarse in 1..=8 {
            out.push((fine, coarse, InterfaceGeometry::matching(fine, coarse, 1.0)));
            for e in 1..=3 {
                out.push((
                    fine,
                    coarse,
                    InterfaceGeometry::uniform_split(coarse, vec![fine; e], 1.0),
                ));
            }
        }
    }
    out
}

fn pairs_of(
    fine: usize,
    coarse: usize,
    g: &InterfaceGeometry,
) -> Vec<esdg_core::projection::ProjectionPair> {
    if g.sub_count() == 1 && g.fine_extents[0] == g.coarse_extent && fine != coarse {
        vec![build_p_pair(fine, coarse).unwrap()]
    } else {
        build_h_pairs(g).unwrap()
    }
}

#[test]
fn compatibility_and_constants_for_all_pairs() {
    for (fine, coarse, g) in geometries() {
        let (wl, wr) = (weights(fine), weights(coarse));
        let pairs = pairs_of(fine, coarse, &g);
        let mut back = DVector::zeros(coarse + 1);
        for (i, p) in pairs.iter().enumerate() {
            let r = compatibility_residual(p, &wl, &wr, g.fine_extents[i], g.coarse_extent);
            assert!(
                r < 1e-12,
                "({fine},{coarse}) E={} sub {i}: {r}",
                g.sub_count()
            );
            let to_fine = &p.to_fine * DVector::from_element(coarse + 1, 1.0);
            assert!(to_fine.iter().all(|v| (v - 1.0).abs() < 1e-13));
            back += &p.to_coarse * DVector::from_element(fine + 1, 1.0);
        }
        // The restrictions of a constant sum back to the constant.
        assert!(
            back.iter().all(|v| (v - 1.0).abs() < 1e-13),
            "({fine},{coarse}) E={}: {back}",
            g.sub_count()
        );
    }
}

#[test]
fn adjoint_identity_on_random_vectors() {
    let mut rng = common::rng(7);
    for (fine, coarse, g) in geometries() {
        let (wl, wr) = (weights(fine), weights(coarse));
        for (i, p) in pairs_of(fine, coarse, &g).iter().enumerate() {
            let a = DVector::from_fn(fine + 1, |_, _| rng.random_range(-1.0..1.0));
            let b = DVector::from_fn(coarse + 1, |_, _| rng.random_range(-1.0..1.0));
            let pb = &p.to_fine * &b;
            let pa = &p.to_coarse * &a;
            let lhs: f64 =
                g.fine_extents[i] * (0..=fine).map(|k| wl[k] * a[k] * pb[k]).sum::<f64>();
            let rhs: f64 =
                g.coarse_extent * (0..=coarse).map(|k| wr[k] * pa[k] * b[k]).sum::<f64>();
            assert!(
                (lhs - rhs).abs() < 1e-12,
                "({fine},{coarse}) E={}: {lhs} vs {rhs}",
                g.sub_count()
            );
        }
    }
}

#[test]
fn diagonal_extraction_identity_on_random_matrices() {
    let mut rng = common::rng(11);
    for (fine, coarse, g) in geometries() {
        let (wl, wr) = (weights(fine), weights(coarse));
        for (i, p) in pairs_of(fine, coarse, &g).iter().enumerate() {
            let a: Vec<f64> = (0..=fine).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b = DMatrix::from_fn(fine + 1, coarse + 1, |_, _| rng.random_range(-1.0..1.0));
            let left = diag_extract(&(&p.to_fine * b.transpose()));
            let lhs: f64 =
                g.fine_extents[i] * (0..=fine).map(|k| wl[k] * a[k] * left[k]).sum::<f64>();
            let right = diag_extract(
                &(&p.to_coarse * DMatrix::from_diagonal(&DVector::from_vec(a.clone())) * &b),
            );
            let rhs: f64 = g.coarse_extent * (0..=coarse).map(|k| wr[k] * right[k]).sum::<f64>();
            assert!(
                (lhs - rhs).abs() < 1e-12,
                "({fine},{coarse}) E={}: {lhs} vs {rhs}",
                g.sub_count()
            );
        }
    }
}

fn nodal(order: usize, f: impl Fn(f64) -> f64) -> DVector<f64> {
    DVector::from_iterator(
        order + 1,
        sbp_operators(order).unwrap().nodes().iter().map(|&s| f(s)),
    )
}

fn poly(degree: usize) -> impl Fn(f64) -> f64 {
    move |s: f64| {
        (0..=degree)
            .map(|k| (k as f64 + 1.0) * s.powi(k as i32) / 3.0)
            .sum::<f64>()
    }
}

#[test]
fn p_projections_reproduce_polynomials() {
    for fine in 1..=8 {
        for coarse in 1..=8 {
            let p = build_p_pair(fine, coarse).unwrap();
            // Maps into the lower order side are lumped-mass projections and
            // lose one degree; maps into the higher order side interpolate.
            let d = if coarse < fine { coarse - 1 } else { fine };
            let back = &p.to_coarse * nodal(fine, poly(d));
            assert!(
                (back - nodal(coarse, poly(d))).amax() < 1e-11,
                "P_L2R ({fine},{coarse})"
            );
            let d = if fine < coarse { fine - 1 } else { coarse };
            let to_fine = &p.to_fine * nodal(coarse, poly(d));
            assert!(
                (to_fine - nodal(fine, poly(d))).amax() < 1e-11,
                "P_R2L ({fine},{coarse})"
            );
        }
    }
}

#[test]
fn h_restrictions_reproduce_polynomials() {
    for (fine, coarse, g) in geometries()
        .into_iter()
        .filter(|(_, _, g)| g.sub_count() > 1)
    {
        let d = fine.min(coarse);
        for (i, p) in build_h_pairs(&g).unwrap().iter().enumerate() {
            let (o, h) = (g.fine_offsets[i], g.fine_extents[i]);
            let map = |s: f64| -1.0 + 2.0 * (o + h * (s + 1.0) / 2.0) / g.coarse_extent;
            let got = &p.to_fine * nodal(coarse, poly(d));
            let expect = nodal(fine, |s| poly(d)(map(s)));
            assert!(
                (got - expect).amax() < 1e-11,
                "({fine},{coarse}) E={} sub {i}",
                g.sub_count()
            );
        }
    }
}

#[test]
fn caches_are_shared_and_match_fresh_builds() {
    let g = InterfaceGeometry::uniform_split(4, vec![2, 3], 0.5);
    let a = h_pairs(&g).unwrap();
    assert!(std::sync::Arc::ptr_eq(&a, &h_pairs(&g).unwrap()));
    assert_eq!(*a, build_h_pairs(&g).unwrap());
    assert_eq!(*p_pair(2, 5).unwrap(), build_p_pair(2, 5).unwrap());
}

#[test]
fn bad_geometries_are_rejected() {
    let mut g = InterfaceGeometry::uniform_split(3, vec![2, 2], 1.0);
    g.fine_extents[1] = 0.0;
    assert!(matches!(
        build_h_pairs(&g),
        Err(ProjectionError::DegenerateSubEdge { .. })
    ));
    let mut g = InterfaceGeometry::uniform_split(3, vec![2, 2], 1.0);
    g.fine_extents[1] = 0.4;
    assert!(matches!(
        build_h_pairs(&g),
        Err(ProjectionError::NotTiled(_))
    ));
    let g = InterfaceGeometry::uniform_split(3, vec![], 1.0);
    assert!(matches!(
        build_h_pairs(&g),
        Err(ProjectionError::NoSubEdges)
    ));
}
