//! Direct summation of the split-form residual on conforming periodic
//! meshes, written without any of the solver's assembly machinery.

use esdg_core::dg::Field;
use esdg_core::mesh::Mesh;
use esdg_core::physics::{Axis, ConservationLaw, Euler, EulerNode};
use esdg_core::sbp::sbp_operators;

fn neighbour(mesh: &Mesh, k: usize, dir: (i32, i32)) -> usize {
    let e = &mesh.elements[k];
    let (lx, ly) = (
        mesh.domain.x[1] - mesh.domain.x[0],
        mesh.domain.y[1] - mesh.domain.y[0],
    );
    let wrap = |v: f64, lo: f64, len: f64| lo + (v - lo).rem_euclid(len);
    let cx = wrap(
        0.5 * (e.x[0] + e.x[1]) + dir.0 as f64 * e.dx(),
        mesh.domain.x[0],
        lx,
    );
    let cy = wrap(
        0.5 * (e.y[0] + e.y[1]) + dir.1 as f64 * e.dy(),
        mesh.domain.y[0],
        ly,
    );
    mesh.elements
        .iter()
        .position(|o| o.x[0] < cx && cx < o.x[1] && o.y[0] < cy && cy < o.y[1])
        .unwrap()
}

fn state(u: &Field<4>, k: usize, i: usize, j: usize) -> EulerNode {
    Euler.node(u.at(k, i, j)).unwrap()
}

/// Interface flux between `a` (left/below) and `b` (right/above), with
/// `lambda` the dissipation coefficient (zero for the conservative flux).
fn star(a: &EulerNode, b: &EulerNode, axis: Axis, lambda: f64) -> [f64; 4] {
    let mut f = Euler.ec_flux(a, b, axis);
    let (va, vb) = (Euler.entropy_vars(a), Euler.entropy_vars(b));
    for q in 0..4 {
        f[q] -= 0.5 * lambda * (vb[q] - va[q]);
    }
    f
}

pub fn naive_residual(mesh: &Mesh, u: &Field<4>, dissipative: bool) -> Vec<Vec<[f64; 4]>> {
    let mut out = Vec::new();
    for (k, e) in mesh.elements.iter().enumerate() {
        let n = e.order;
        let ops = sbp_operators(n).unwrap();
        let (d, w) = (&ops.d, ops.weights());
        let (hx, hy) = (e.dy() / 2.0, e.dx() / 2.0);
        let east = neighbour(mesh, k, (1, 0));
        let west = neighbour(mesh, k, (-1, 0));
        let north = neighbour(mesh, k, (0, 1));
        let south = neighbour(mesh, k, (0, -1));
        let lambda = |axis: Axis, mine: &[EulerNode], theirs: &[EulerNode]| {
            if !dissipative {
                return 0.0;
            }
            0.5 * mine
                .iter()
                .chain(theirs)
                .map(|s| Euler.wave_speed(s, axis))
                .fold(0.0, f64::max)
        };
        let column = |el: usize, i: usize| (0..=n).map(|j| state(u, el, i, j)).collect::<Vec<_>>();
        let row = |el: usize, j: usize| (0..=n).map(|i| state(u, el, i, j)).collect::<Vec<_>>();
        let lam_e = lambda(Axis::X, &column(k, n), &column(east, 0));
        let lam_w = lambda(Axis::X, &column(west, n), &column(k, 0));
        let lam_n = lambda(Axis::Y, &row(k, n), &row(north, 0));
        let lam_s = lambda(Axis::Y, &row(south, n), &row(k, 0));
        let mut r = vec![[0.0; 4]; (n + 1) * (n + 1)];
        for j in 0..=n {
            for i in 0..=n {
                let me = state(u, k, i, j);
                let mut acc = [0.0; 4];
                for m in 0..=n {
                    let fx = Euler.ec_flux(&me, &state(u, k, m, j), Axis::X);
                    let fy = Euler.ec_flux(&me, &state(u, k, i, m), Axis::Y);
                    for q in 0..4 {
                        acc[q] += 2.0 * d[(i, m)] * hx * fx[q] + 2.0 * d[(j, m)] * hy * fy[q];
                    }
                }
                let fx = Euler.flux(&me, Axis::X);
                let fy = Euler.flux(&me, Axis::Y);
                if i == n {
                    let s = star(&me, &state(u, east, 0, j), Axis::X, lam_e);
                    (0..4).for_each(|q| acc[q] += hx * (s[q] - fx[q]) / w[n]);
                }
                if i == 0 {
                    let s = star(&state(u, west, n, j), &me, Axis::X, lam_w);
                    (0..4).for_each(|q| acc[q] -= hx * (s[q] - fx[q]) / w[0]);
                }
                if j == n {
                    let s = star(&me, &state(u, north, i, 0), Axis::Y, lam_n);
                    (0..4).for_each(|q| acc[q] += hy * (s[q] - fy[q]) / w[n]);
                }
                if j == 0 {
                    let s = star(&state(u, south, i, n), &me, Axis::Y, lam_s);
                    (0..4).for_each(|q| acc[q] -= hy * (s[q] - fy[q]) / w[0]);
                }
                r[i + (n + 1) * j] = acc;
            }
        }
        out.push(r);
    }
    out
}

/// Largest deviation of `r` from the oracle, relative to the oracle's
/// largest entry (or one).
pub fn relative_deviation(mesh: &Mesh, u: &Field<4>, r: &Field<4>, dissipative: bool) -> f64 {
    let oracle = naive_residual(mesh, u, dissipative);
    let scale = oracle
        .iter()
        .flatten()
        .flatten()
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for (k, el) in oracle.iter().enumerate() {
        for (idx, v) in el.iter().enumerate() {
            for q in 0..4 {
                worst = worst.max((r.element(k)[idx][q] - v[q]).abs());
            }
        }
    }
    worst / scale
}
