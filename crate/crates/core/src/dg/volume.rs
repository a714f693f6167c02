use crate::physics::{Axis, ConservationLaw};
use crate::sbp::SbpOperators;

/// Flux-differencing volume terms of one element, written into `r`:
/// `2 Σ_m D_im F̃(U_ij, U_mj) + 2 Σ_m D_jm G̃(U_ij, U_im)` with the
/// contravariant fluxes `F̃ = (Δy/2) f`, `G̃ = (Δx/2) g`.
///
/// Each symmetric pair is evaluated once.
pub fn volume_terms<L: ConservationLaw<M>, const M: usize>(
    law: &L,
    ops: &SbpOperators,
    dx: f64,
    dy: f64,
    nodes: &[L::Node],
    r: &mut [[f64; M]],
) {
    let n = ops.order() + 1;
    debug_assert_eq!(nodes.len(), n * n);
    debug_assert_eq!(r.len(), n * n);
    let d = ops.d.as_slice();
    // Column-major: D_im = d[i + n m].
    let dm = |i: usize, m: usize| d[i + n * m];
    r.fill([0.0; M]);
    for (axis, scale) in [(Axis::X, dy), (Axis::Y, dx)] {
        let at = |line: usize, s: usize| match axis {
            Axis::X => s + n * line,
            Axis::Y => line + n * s,
        };
        for line in 0..n {
            for i in 0..n {
                let a = at(line, i);
                let dii = dm(i, i);
                if dii != 0.0 {
                    let f = law.flux(&nodes[a], axis);
                    for q in 0..M {
                        r[a][q] += scale * dii * f[q];
                    }
                }
                for m in i + 1..n {
                    let b = at(line, m);
                    let f = law.ec_flux(&nodes[a], &nodes[b], axis);
                    let (dim, dmi) = (scale * dm(i, m), scale * dm(m, i));
                    for q in 0..M {
                        r[a][q] += dim * f[q];
                        r[b][q] += dmi * f[q];
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{Burgers, Euler};
    use crate::sbp::sbp_operators;

    #[test]
    fn constant_state_has_no_volume_term() {
        let ops = sbp_operators(4).unwrap();
        let node = Euler.node_from_primitive(&[1.2, 0.3, -0.4, 0.9]).unwrap();
        let nodes = vec![node; 25];
        let mut r = vec![[1.0; 4]; 25];
        volume_terms(&Euler, &ops, 0.5, 2.0, &nodes, &mut r);
        assert!(r.iter().flatten().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn burgers_linear_element_by_hand() {
        // N = 1: D = [[-1/2, 1/2], [-1/2, 1/2]], data varies in x only.
        let ops = sbp_operators(1).unwrap();
        let (ul, ur) = (1.0, 3.0);
        let nodes = vec![ul, ur, ul, ur];
        let mut r = vec![[0.0; 1]; 4];
        let (dx, dy) = (2.0, 4.0);
        volume_terms(&Burgers, &ops, dx, dy, &nodes, &mut r);
        let pair = (ul * ul + ul * ur + ur * ur) / 6.0;
        let f = |u: f64| 0.5 * u * u;
        // 2 Σ_m D_im (Δy/2) F(U_i, U_m); the y sweep sees constant lines
        // and contributes D_jj g(U) + D_jm g(U) = 0.
        let r0 = dy * (-0.5 * f(ul) + 0.5 * pair);
        let r1 = dy * (-0.5 * pair + 0.5 * f(ur));
        for (k, expected) in [r0, r1, r0, r1].into_iter().enumerate() {
            assert!(
                (r[k][0] - expected).abs() < 1e-14,
                "{k}: {} vs {expected}",
                r[k][0]
            );
        }
    }
}
