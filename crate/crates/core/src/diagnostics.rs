//! Conservation and accuracy measurements: growth rates contracted from
//! the residual, total entropy, L2 errors, convergence tables and
//! interface entropy balances.

use std::fmt::Write as _;

use thiserror::Error;

use crate::dg::{DgError, Field, InterfaceFluxSet, LambdaPolicy, SemiDiscretization};
use crate::mesh::Side;
use crate::physics::ConservationLaw;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Dg(#[from] DgError),
    #[error("DOF counts must increase strictly: {0} follows {1}")]
    NonIncreasingDofs(usize, usize),
    #[error("error norms must be positive and finite, got {0}")]
    BadError(f64),
}

/// Instantaneous domain totals `U̇` (per equation) and `Ṡ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthReport<const M: usize> {
    pub primary: [f64; M],
    pub entropy: f64,
}

fn tensor_sum<const M: usize, T>(
    sd: &SemiDiscretization<impl ConservationLaw<M>, M>,
    per_element: impl Fn(usize) -> T,
    mut node: impl FnMut(&T, usize, f64),
) {
    for k in 0..sd.mesh().len() {
        let w = sd.operators(k).weights();
        let n = w.len();
        let data = per_element(k);
        for j in 0..n {
            for i in 0..n {
                node(&data, i + n * j, w[i] * w[j]);
            }
        }
    }
}

/// `-Σ_k Σ_ij ω_i ω_j R_ij` per equation.
pub fn primary_growth<L: ConservationLaw<M>, const M: usize>(
    sd: &SemiDiscretization<L, M>,
    r: &Field<M>,
) -> [f64; M] {
    let mut total = [0.0; M];
    tensor_sum(
        sd,
        |k| r.element(k),
        |e, idx, w| {
            for q in 0..M {
                total[q] -= w * e[idx][q];
            }
        },
    );
    total
}

/// `-Σ_k Σ_ij ω_i ω_j V_ijᵀ R_ij`.
pub fn entropy_growth<L: ConservationLaw<M>, const M: usize>(
    sd: &SemiDiscretization<L, M>,
    u: &Field<M>,
    r: &Field<M>,
) -> Result<f64, DgError> {
    let nodes = sd.nodes(u)?;
    let law = sd.law();
    let mut total = 0.0;
    tensor_sum(
        sd,
        |k| (&nodes[k], r.element(k)),
        |(n, e), idx, w| {
            let v = law.entropy_vars(&n[idx]);
            total -= w * (0..M).map(|q| v[q] * e[idx][q]).sum::<f64>();
        },
    );
    Ok(total)
}

/// Residual followed by both contractions.
pub fn growth<L: ConservationLaw<M>, const M: usize>(
    sd: &SemiDiscretization<L, M>,
    u: &Field<M>,
    t: f64,
) -> Result<GrowthReport<M>, DgError> {
    let r = sd.residual(u, t)?;
    Ok(GrowthReport {
        primary: primary_growth(sd, &r),
        entropy: entropy_growth(sd, u, &r)?,
    })
}

/// `Σ_k J_k Σ_ij ω_i ω_j S(U_ij)`.
pub fn total_entropy<L: ConservationLaw<M>, const M: usize>(
    sd: &SemiDiscretization<L, M>,
    u: &Field<M>,
) -> Result<f64, DgError> {
    let nodes = sd.nodes(u)?;
    let mut total = 0.0;
    tensor_sum(
        sd,
        |k| (&nodes[k], sd.mesh().elements[k].jacobian()),
        |(n, jac), idx, w| {
            total += jac * w * sd.law().entropy(&n[idx]);
        },
    );
    Ok(total)
}

/// `Σ_k J_k Σ_ij ω_i ω_j U_ij` per equation.
pub fn total_primary<L: ConservationLaw<M>, const M: usize>(
    sd: &SemiDiscretization<L, M>,
    u: &Field<M>,
) -> [f64; M] {
    let mut total = [0.0; M];
    tensor_sum(
        sd,
        |k| (u.element(k), sd.mesh().elements[k].jacobian()),
        |(e, jac), idx, w| {
            for q in 0..M {
                total[q] += jac * w * e[idx][q];
            }
        },
    );
    total
}

/// Discrete L2 norm of `U - exact` over all variables, plus the per
/// variable norms.
pub fn l2_error<L: ConservationLaw<M>, const M: usize>(
    sd: &SemiDiscretization<L, M>,
    u: &Field<M>,
    exact: impl Fn(f64, f64) -> [f64; M],
) -> (f64, [f64; M]) {
    let mut per = [0.0; M];
    for (k, e) in sd.mesh().elements.iter().enumerate() {
        let nodes = sd.operators(k).nodes();
        let w = sd.operators(k).weights();
        let n = w.len();
        let jac = e.jacobian();
        let values = u.element(k);
        for j in 0..n {
            for i in 0..n {
                let (x, y) = e.map(nodes[i], nodes[j]);
                let ex = exact(x, y);
                for q in 0..M {
                    let d = values[i + n * j][q] - ex[q];
                    per[q] += jac * w[i] * w[j] * d * d;
                }
            }
        }
    }
    (per.iter().sum::<f64>().sqrt(), per.map(f64::sqrt))
}

/// Entropy produced at interface `k` by the given numerical fluxes:
/// `Σ_sides σ Σ_s ω_s (V_sᵀ F*_s - (Δ/2) Ψ_s)` with `σ = +1` for the side
/// whose west (south) face lies on the interface.
pub fn interface_entropy_balance<L: ConservationLaw<M>, const M: usize>(
    sd: &SemiDiscretization<L, M>,
    k: usize,
    u: &Field<M>,
    fluxes: &InterfaceFluxSet<M>,
) -> Result<f64, DgError> {
    let mesh = sd.mesh();
    let iface = &mesh.interfaces[k];
    let law = sd.law();
    let side_term = |element: usize, side: Side, flux: &[[f64; M]]| -> Result<f64, DgError> {
        let e = &mesh.elements[element];
        let face = side.face(iface.axis);
        let scale = 0.5 * e.face_extent(face);
        let w = sd.operators(element).weights();
        let sigma = if side == Side::Plus { 1.0 } else { -1.0 };
        let mut acc = 0.0;
        for (s, idx) in sd.face_indices(element, face).into_iter().enumerate() {
            let n = law
                .node(&u.element(element)[idx])
                .map_err(|source| DgError::Node {
                    element,
                    i: idx % w.len(),
                    j: idx / w.len(),
                    source,
                })?;
            let v = law.entropy_vars(&n);
            let vf: f64 = (0..M).map(|q| v[q] * flux[s][q]).sum();
            acc += w[s] * (vf - scale * law.potential(&n, iface.axis));
        }
        Ok(sigma * acc)
    };
    let mut total = side_term(iface.coarse, iface.coarse_side, &fluxes.coarse)?;
    for (i, &f) in iface.fine.iter().enumerate() {
        total += side_term(f, iface.fine_side(), &fluxes.fine[i])?;
    }
    Ok(total)
}

/// The quadratic form the entropy stable coupling should dissipate at a
/// non-conforming interface, `-Σ_i (λ Δ_i / 4) Σ_q |P_R2L_i V^R - V^L_i|²_M`.
pub fn es_dissipation<L: ConservationLaw<M>, const M: usize>(
    sd: &SemiDiscretization<L, M>,
    k: usize,
    u: &Field<M>,
    pairs: &[crate::projection::ProjectionPair],
) -> Result<f64, DgError> {
    let mesh = sd.mesh();
    let iface = &mesh.interfaces[k];
    let law = sd.law();
    let nodes = sd.nodes(u)?;
    let gather = |element: usize, side: Side| -> Vec<L::Node> {
        sd.face_indices(element, side.face(iface.axis))
            .into_iter()
            .map(|i| nodes[element][i])
            .collect()
    };
    let coarse = gather(iface.coarse, iface.coarse_side);
    let fine: Vec<_> = iface
        .fine
        .iter()
        .map(|&f| gather(f, iface.fine_side()))
        .collect();
    let speed = |ns: &[L::Node]| {
        ns.iter()
            .fold(0.0f64, |m, n| m.max(law.wave_speed(n, iface.axis)))
    };
    let global = fine.iter().fold(speed(&coarse), |m, f| m.max(speed(f)));
    let vr: Vec<[f64; M]> = coarse.iter().map(|n| law.entropy_vars(n)).collect();
    let mut total = 0.0;
    for (i, fnodes) in fine.iter().enumerate() {
        let lambda = match sd.lambda_policy() {
            LambdaPolicy::Interface => 0.5 * global,
            LambdaPolicy::Nodewise => 0.5 * speed(&coarse).max(speed(fnodes)),
        };
        let w = sd.operators(iface.fine[i]).weights();
        let mut form = 0.0;
        for (a, la) in fnodes.iter().enumerate() {
            let vl = law.entropy_vars(la);
            for q in 0..M {
                let pv: f64 = vr
                    .iter()
                    .enumerate()
                    .map(|(b, v)| pairs[i].to_fine[(a, b)] * v[q])
                    .sum();
                form += w[a] * (pv - vl[q]).powi(2);
            }
        }
        total -= lambda * iface.geometry.fine_extents[i] / 4.0 * form;
    }
    Ok(total)
}

/// Experimental orders of convergence measured against degrees of freedom
/// in two dimensions, `EOC_k = 2 ln(e_{k-1}/e_k) / ln(DOF_k/DOF_{k-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct EocTable {
    pub rows: Vec<EocRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EocRow {
    pub dofs: usize,
    pub l2: f64,
    pub eoc: Option<f64>,
}

impl EocTable {
    pub fn new(samples: &[(usize, f64)]) -> Result<Self, DiagnosticsError> {
        let mut rows: Vec<EocRow> = Vec::with_capacity(samples.len());
        for &(dofs, l2) in samples {
            if !(l2.is_finite() && l2 > 0.0) {
                return Err(DiagnosticsError::BadError(l2));
            }
            let eoc = match rows.last() {
                Some(prev) if dofs <= prev.dofs => {
                    return Err(DiagnosticsError::NonIncreasingDofs(dofs, prev.dofs))
                }
                Some(prev) => {
                    Some(2.0 * (prev.l2 / l2).ln() / (dofs as f64 / prev.dofs as f64).ln())
                }
                None => None,
            };
            rows.push(EocRow { dofs, l2, eoc });
        }
        Ok(Self { rows })
    }

    pub fn last_eoc(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.eoc)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("dofs,l2,eoc\n");
        for r in &self.rows {
            let eoc = r.eoc.map(|e| format!("{e:.6}")).unwrap_or_default();
            let _ = writeln!(s, "{},{:.6e},{}", r.dofs, r.l2, eoc);
        }
        s
    }
}

/// One observer sample of a time integration.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSample<const M: usize> {
    pub step: usize,
    pub t: f64,
    pub total_entropy: f64,
    pub growth: GrowthReport<M>,
}

pub fn time_series_csv<const M: usize>(samples: &[TimeSample<M>]) -> String {
    let mut s = String::from("step,t,total_entropy");
    for q in 0..M {
        let _ = write!(s, ",primary_growth_{q}");
    }
    s.push_str(",entropy_growth\n");
    for x in samples {
        let _ = write!(s, "{},{:.12e},{:.16e}", x.step, x.t, x.total_entropy);
        for q in 0..M {
            let _ = write!(s, ",{:.6e}", x.growth.primary[q]);
        }
        let _ = writeln!(s, ",{:.6e}", x.growth.entropy);
    }
    s
}

/// Root mean square of each growth component over an ensemble.
pub fn rms<const M: usize>(reports: &[GrowthReport<M>]) -> GrowthReport<M> {
    let n = reports.len().max(1) as f64;
    let mut primary = [0.0; M];
    let mut entropy = 0.0;
    for r in reports {
        for q in 0..M {
            primary[q] += r.primary[q] * r.primary[q];
        }
        entropy += r.entropy * r.entropy;
    }
    GrowthReport {
        primary: primary.map(|p| (p / n).sqrt()),
        entropy: (entropy / n).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eoc_is_scale_invariant() {
        let samples = [(100, 1e-2), (400, 1.25e-3), (1600, 1.5625e-4)];
        let t = EocTable::new(&samples).unwrap();
        assert_eq!(t.rows[0].eoc, None);
        assert!((t.rows[1].eoc.unwrap() - 3.0).abs() < 1e-12);
        let scaled: Vec<_> = samples.iter().map(|&(d, e)| (d, 7.0 * e)).collect();
        let u = EocTable::new(&scaled).unwrap();
        assert!((u.last_eoc().unwrap() - t.last_eoc().unwrap()).abs() < 1e-12);
        assert!(t.to_csv().starts_with("dofs,l2,eoc\n100,"));
    }

    #[test]
    fn eoc_rejects_bad_input() {
        assert!(matches!(
            EocTable::new(&[(10, 1.0), (10, 0.5)]),
            Err(DiagnosticsError::NonIncreasingDofs(10, 10))
        ));
        assert!(matches!(
            EocTable::new(&[(10, 0.0)]),
            Err(DiagnosticsError::BadError(_))
        ));
    }

    #[test]
    fn rms_of_ensemble() {
        let r = rms(&[
            GrowthReport {
                primary: [3.0],
                entropy: 1.0,
            },
            GrowthReport {
                primary: [-4.0],
                entropy: -1.0,
            },
        ]);
        assert!((r.primary[0] - 12.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.entropy, 1.0);
    }
}
