use super::{Coupler, Coupling, DgError, Field, LambdaPolicy, SemiDiscretization};
use crate::mesh::Side;
use crate::physics::{Axis, ConservationLaw};

/// Numerical surface fluxes of one interface in the `+axis` direction,
/// already scaled by each side's own `Δ/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceFluxSet<const M: usize> {
    /// One value per node of the coarse (`R`) edge.
    pub coarse: Vec<[f64; M]>,
    /// One vector per fine sub-edge.
    pub fine: Vec<Vec<[f64; M]>>,
}

fn scaled<const M: usize>(mut v: Vec<[f64; M]>, s: f64) -> Vec<[f64; M]> {
    for x in v.iter_mut().flatten() {
        *x *= s;
    }
    v
}

impl<L: ConservationLaw<M>, const M: usize> SemiDiscretization<L, M> {
    fn max_speed<'a>(&self, axis: Axis, nodes: impl IntoIterator<Item = &'a L::Node>) -> f64
    where
        L::Node: 'a,
    {
        nodes
            .into_iter()
            .fold(0.0, |m, n| m.max(self.law.wave_speed(n, axis)))
    }

    /// Nodewise flux between matching node sets. Physical, not scaled.
    pub(super) fn conforming_flux(
        &self,
        axis: Axis,
        minus: &[L::Node],
        plus: &[L::Node],
        minus_q: &[[f64; M]],
        plus_q: &[[f64; M]],
    ) -> Vec<[f64; M]> {
        let mut out: Vec<[f64; M]> = minus
            .iter()
            .zip(plus)
            .map(|(a, b)| self.law.ec_flux(a, b, axis))
            .collect();
        if matches!(self.coupling, Coupling::Ec | Coupling::Mortar) {
            return out;
        }
        let global = 0.5 * self.max_speed(axis, minus.iter().chain(plus));
        for (j, f) in out.iter_mut().enumerate() {
            let lambda = match self.lambda {
                LambdaPolicy::Interface => global,
                LambdaPolicy::Nodewise => {
                    0.5 * self
                        .law
                        .wave_speed(&minus[j], axis)
                        .max(self.law.wave_speed(&plus[j], axis))
                }
            };
            let jump: [f64; M] = if self.coupling == Coupling::Es {
                let (vm, vp) = (
                    self.law.entropy_vars(&minus[j]),
                    self.law.entropy_vars(&plus[j]),
                );
                std::array::from_fn(|q| vp[q] - vm[q])
            } else {
                std::array::from_fn(|q| plus_q[j][q] - minus_q[j][q])
            };
            for q in 0..M {
                f[q] -= 0.5 * lambda * jump[q];
            }
        }
        out
    }

    pub(super) fn interface_fluxes_with(
        &self,
        k: usize,
        u: &Field<M>,
        nodes: &[Vec<L::Node>],
    ) -> Result<InterfaceFluxSet<M>, DgError> {
        let iface = &self.mesh.interfaces[k];
        let axis = iface.axis;
        let g = &iface.geometry;
        let gather = |element: usize, side: Side| -> (Vec<L::Node>, Vec<[f64; M]>) {
            let idx = self.face_indices(element, side.face(axis));
            (
                idx.iter().map(|&i| nodes[element][i]).collect(),
                idx.iter().map(|&i| u.element(element)[i]).collect(),
            )
        };
        let (coarse_nodes, coarse_q) = gather(iface.coarse, iface.coarse_side);
        let fine: Vec<_> = iface
            .fine
            .iter()
            .map(|&f| gather(f, iface.fine_side()))
            .collect();
        let coarse_is_minus = iface.coarse_side == Side::Minus;

        match &self.couplers[k] {
            Coupler::Conforming => {
                let (fine_nodes, fine_q) = &fine[0];
                let flux = if coarse_is_minus {
                    self.conforming_flux(axis, &coarse_nodes, fine_nodes, &coarse_q, fine_q)
                } else {
                    self.conforming_flux(axis, fine_nodes, &coarse_nodes, fine_q, &coarse_q)
                };
                let flux = scaled(flux, 0.5 * g.coarse_extent);
                Ok(InterfaceFluxSet {
                    coarse: flux.clone(),
                    fine: vec![flux],
                })
            }
            Coupler::Projected(pairs) => {
                let nr = coarse_nodes.len();
                let mut coarse = vec![[0.0; M]; nr];
                let mut fine_out = Vec::with_capacity(fine.len());
                let dissipate = self.coupling == Coupling::Es;
                let sign = if coarse_is_minus { -1.0 } else { 1.0 };
                let vr: Vec<[f64; M]> = if dissipate {
                    coarse_nodes
                        .iter()
                        .map(|n| self.law.entropy_vars(n))
                        .collect()
                } else {
                    Vec::new()
                };
                let coarse_speed = self.max_speed(axis, &coarse_nodes);
                let global = fine.iter().fold(coarse_speed, |m, (fnodes, _)| {
                    m.max(self.max_speed(axis, fnodes))
                });
                for (i, (fnodes, _)) in fine.iter().enumerate() {
                    let pair = &pairs[i];
                    let (to_fine, to_coarse) = (&pair.to_fine, &pair.to_coarse);
                    let nl = fnodes.len();
                    let mut f_fine = vec![[0.0; M]; nl];
                    for (a, la) in fnodes.iter().enumerate() {
                        for (b, rb) in coarse_nodes.iter().enumerate() {
                            let f = self.law.ec_flux(la, rb, axis);
                            let (pf, pc) = (to_fine[(a, b)], to_coarse[(b, a)]);
                            for q in 0..M {
                                f_fine[a][q] += pf * f[q];
                                coarse[b][q] += pc * f[q];
                            }
                        }
                    }
                    if dissipate {
                        let lambda = match self.lambda {
                            LambdaPolicy::Interface => 0.5 * global,
                            LambdaPolicy::Nodewise => {
                                0.5 * coarse_speed.max(self.max_speed(axis, fnodes))
                            }
                        };
                        let half = 0.5 * lambda;
                        for (a, la) in fnodes.iter().enumerate() {
                            let vl = self.law.entropy_vars(la);
                            let mut jump = [0.0; M];
                            for (b, vb) in vr.iter().enumerate() {
                                let p = to_fine[(a, b)];
                                for q in 0..M {
                                    jump[q] += p * vb[q];
                                }
                            }
                            for q in 0..M {
                                jump[q] = sign * (jump[q] - vl[q]);
                                f_fine[a][q] -= half * jump[q];
                            }
                            for (b, c) in coarse.iter_mut().enumerate() {
                                let p = to_coarse[(b, a)];
                                for q in 0..M {
                                    c[q] -= half * p * jump[q];
                                }
                            }
                        }
                    }
                    fine_out.push(scaled(f_fine, 0.5 * g.fine_extents[i]));
                }
                Ok(InterfaceFluxSet {
                    coarse: scaled(coarse, 0.5 * g.coarse_extent),
                    fine: fine_out,
                })
            }
            Coupler::Mortar(segments) => {
                let nr = coarse_nodes.len();
                let mut coarse = vec![[0.0; M]; nr];
                let mut fine_out = Vec::with_capacity(fine.len());
                let err = |source| DgError::Interface {
                    interface: k,
                    source,
                };
                let apply = |m: &nalgebra::DMatrix<f64>, v: &[[f64; M]]| -> Vec<[f64; M]> {
                    (0..m.nrows())
                        .map(|r| {
                            let mut acc = [0.0; M];
                            for (c, x) in v.iter().enumerate() {
                                let p = m[(r, c)];
                                for q in 0..M {
                                    acc[q] += p * x[q];
                                }
                            }
                            acc
                        })
                        .collect()
                };
                for (i, (_, fq)) in fine.iter().enumerate() {
                    let seg = &segments[i];
                    let coarse_m = apply(&seg.coarse.to_fine, &coarse_q);
                    let fine_m = apply(&seg.fine.to_coarse, fq);
                    let to_nodes = |v: &[[f64; M]]| {
                        v.iter()
                            .map(|x| self.law.node(x))
                            .collect::<Result<Vec<_>, _>>()
                    };
                    let coarse_mn = to_nodes(&coarse_m).map_err(err)?;
                    let fine_mn = to_nodes(&fine_m).map_err(err)?;
                    let flux = if coarse_is_minus {
                        self.conforming_flux(axis, &coarse_mn, &fine_mn, &coarse_m, &fine_m)
                    } else {
                        self.conforming_flux(axis, &fine_mn, &coarse_mn, &fine_m, &coarse_m)
                    };
                    fine_out.push(scaled(
                        apply(&seg.fine.to_fine, &flux),
                        0.5 * g.fine_extents[i],
                    ));
                    for (c, x) in coarse.iter_mut().zip(apply(&seg.coarse.to_coarse, &flux)) {
                        for q in 0..M {
                            c[q] += x[q];
                        }
                    }
                }
                Ok(InterfaceFluxSet {
                    coarse: scaled(coarse, 0.5 * g.coarse_extent),
                    fine: fine_out,
                })
            }
        }
    }
}
