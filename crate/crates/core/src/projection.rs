//! Projection operator pairs coupling the nodal distributions on the two
//! sides of a non-conforming interface.
//!
//! Every pair satisfies the extent-scaled M-compatibility condition
//!
//! ```text
//! Δ_L · P_R2Lᵀ · M_L = Δ_R · M_R · P_L2R
//! ```
//!
//! so that the two projections are adjoint under the discrete inner
//! products. `R` is the coarse (or, for pure p-interfaces, the canonical
//! right) side and `L` a fine side.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::sbp::{self, gauss_legendre_rule, interpolation_matrix, lagrange_basis_at, SbpError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error(transparent)]
    Sbp(#[from] SbpError),
    #[error("sub-edge {index} has non-positive extent {extent}")]
    DegenerateSubEdge { index: usize, extent: f64 },
    #[error("interface has no fine sub-edges")]
    NoSubEdges,
    #[error("fine orders, extents and offsets have different lengths")]
    LengthMismatch,
    #[error("sub-edges do not tile the coarse edge: {0}")]
    NotTiled(String),
    #[error("fine mass matrix is not positive definite")]
    SingularMass,
}

/// Geometry of one coarse edge `R` facing `E` fine sub-edges `L_1 … L_E`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceGeometry {
    pub coarse_order: usize,
    pub coarse_extent: f64,
    pub fine_orders: Vec<usize>,
    pub fine_extents: Vec<f64>,
    /// Start of each sub-edge measured from the start of the coarse edge.
    pub fine_offsets: Vec<f64>,
}

impl InterfaceGeometry {
    /// A single fine side covering the whole coarse edge.
    pub fn matching(fine_order: usize, coarse_order: usize, extent: f64) -> Self {
        Self {
            coarse_order,
            coarse_extent: extent,
            fine_orders: vec![fine_order],
            fine_extents: vec![extent],
            fine_offsets: vec![0.0],
        }
    }

    /// `E` equal sub-edges.
    pub fn uniform_split(coarse_order: usize, fine_orders: Vec<usize>, coarse_extent: f64) -> Self {
        let e = fine_orders.len();
        let h = coarse_extent / e as f64;
        Self {
            coarse_order,
            coarse_extent,
            fine_orders,
            fine_extents: vec![h; e],
            fine_offsets: (0..e).map(|i| i as f64 * h).collect(),
        }
    }

    pub fn sub_count(&self) -> usize {
        self.fine_orders.len()
    }

    pub fn validate(&self) -> Result<(), ProjectionError> {
        let e = self.fine_orders.len();
        if e == 0 {
            return Err(ProjectionError::NoSubEdges);
        }
        if self.fine_extents.len() != e || self.fine_offsets.len() != e {
            return Err(ProjectionError::LengthMismatch);
        }
        if self.coarse_order == 0 {
            return Err(SbpError::OrderTooLow(0).into());
        }
        if let Some(&n) = self.fine_orders.iter().find(|&&n| n == 0) {
            return Err(SbpError::OrderTooLow(n).into());
        }
        for (index, &extent) in self.fine_extents.iter().enumerate() {
            if !(extent > 0.0) {
                return Err(ProjectionError::DegenerateSubEdge { index, extent });
            }
        }
        let tol = 1e-12 * self.coarse_extent.abs().max(1.0);
        let mut cursor = 0.0;
        for (i, (&o, &d)) in self.fine_offsets.iter().zip(&self.fine_extents).enumerate() {
            if (o - cursor).abs() > tol {
                return Err(ProjectionError::NotTiled(format!(
                    "sub-edge {i} starts at {o}, expected {cursor}"
                )));
            }
            cursor = o + d;
        }
        if (cursor - self.coarse_extent).abs() > tol {
            return Err(ProjectionError::NotTiled(format!(
                "sub-edges end at {cursor}, coarse edge has extent {}",
                self.coarse_extent
            )));
        }
        Ok(())
    }
}

/// `to_coarse = P_L2R` is `(N_R+1)×(N_L+1)`, `to_fine = P_R2L` is
/// `(N_L+1)×(N_R+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionPair {
    pub to_coarse: DMatrix<f64>,
    pub to_fine: DMatrix<f64>,
}

impl ProjectionPair {
    pub fn identity(order: usize) -> Self {
        Self {
            to_coarse: DMatrix::identity(order + 1, order + 1),
            to_fine: DMatrix::identity(order + 1, order + 1),
        }
    }

    pub fn fine_order(&self) -> usize {
        self.to_fine.nrows() - 1
    }

    pub fn coarse_order(&self) -> usize {
        self.to_coarse.nrows() - 1
    }
}

fn diag(w: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(w))
}

fn diag_inv(w: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        w.len(),
        w.iter().map(|x| 1.0 / x),
    ))
}

/// Pair for two distributions on the same geometric edge.
///
/// The mortar has order `max(N_L, N_R)`. The lower order side reaches the
/// mortar by interpolation and returns by the discrete L2 projection
/// `M_low⁻¹ Lᵀ M_mortar`; the higher order side copies.
pub fn build_p_pair(
    fine_order: usize,
    coarse_order: usize,
) -> Result<ProjectionPair, ProjectionError> {
    let l = sbp::lgl_rule(fine_order)?;
    let r = sbp::lgl_rule(coarse_order)?;
    if fine_order == coarse_order {
        return Ok(ProjectionPair::identity(fine_order));
    }
    let pair = if fine_order < coarse_order {
        let interp = interpolation_matrix(&l.nodes, &r.nodes);
        let back = diag_inv(&l.weights) * interp.transpose() * diag(&r.weights);
        ProjectionPair {
            to_coarse: interp,
            to_fine: back,
        }
    } else {
        let interp = interpolation_matrix(&r.nodes, &l.nodes);
        let back = diag_inv(&r.weights) * interp.transpose() * diag(&l.weights);
        ProjectionPair {
            to_coarse: back,
            to_fine: interp,
        }
    };
    Ok(pair)
}

/// One pair per sub-edge of a hanging-node interface.
///
/// `P_R2L_i` is the exact L2 projection of the coarse polynomial, restricted
/// to sub-edge `i`, onto the degree `N_L_i` space. `P_L_i2R` follows from the
/// compatibility condition, `P_L_i2R = (Δ_L_i/Δ_R) M_R⁻¹ P_R2L_iᵀ M_L_i`.
pub fn build_h_pairs(geom: &InterfaceGeometry) -> Result<Vec<ProjectionPair>, ProjectionError> {
    geom.validate()?;
    let r = sbp::lgl_rule(geom.coarse_order)?;
    let nr = geom.coarse_order;
    let scale_r = geom.coarse_extent;
    let mut pairs = Vec::with_capacity(geom.sub_count());
    for i in 0..geom.sub_count() {
        let nl = geom.fine_orders[i];
        let extent = geom.fine_extents[i];
        let offset = geom.fine_offsets[i];
        if nl == nr && offset == 0.0 && extent == scale_r {
            pairs.push(ProjectionPair::identity(nl));
            continue;
        }
        let l = sbp::lgl_rule(nl)?;
        let points = ((nl + nr).div_ceil(2) + 1).max(nl + 1);
        let gauss = gauss_legendre_rule(points)?;
        // Fine reference coordinate -> coarse reference coordinate.
        let to_coarse_ref = |eta: f64| -1.0 + 2.0 * (offset + 0.5 * (eta + 1.0) * extent) / scale_r;

        let basis_l: Vec<Vec<f64>> = (0..=nl)
            .map(|a| {
                gauss
                    .nodes
                    .iter()
                    .map(|&t| lagrange_basis_at(&l.nodes, a, t))
                    .collect()
            })
            .collect();
        let basis_r: Vec<Vec<f64>> = (0..=nr)
            .map(|c| {
                gauss
                    .nodes
                    .iter()
                    .map(|&t| lagrange_basis_at(&r.nodes, c, to_coarse_ref(t)))
                    .collect()
            })
            .collect();
        let inner = |u: &[f64], v: &[f64]| -> f64 {
            gauss
                .weights
                .iter()
                .zip(u.iter().zip(v))
                .map(|(w, (a, b))| w * a * b)
                .sum()
        };
        let mass = DMatrix::from_fn(nl + 1, nl + 1, |a, b| inner(&basis_l[a], &basis_l[b]));
        let mixed = DMatrix::from_fn(nl + 1, nr + 1, |a, c| inner(&basis_l[a], &basis_r[c]));
        let chol = mass.cholesky().ok_or(ProjectionError::SingularMass)?;
        let to_fine = chol.solve(&mixed);
        let to_coarse =
            (extent / scale_r) * diag_inv(&r.weights) * to_fine.transpose() * diag(&l.weights);
        pairs.push(ProjectionPair { to_coarse, to_fine });
    }
    Ok(pairs)
}

/// `max |Δ_L P_R2Lᵀ M_L - Δ_R M_R P_L2R|`.
pub fn compatibility_residual(
    pair: &ProjectionPair,
    fine_weights: &[f64],
    coarse_weights: &[f64],
    fine_extent: f64,
    coarse_extent: f64,
) -> f64 {
    let lhs = fine_extent * pair.to_fine.transpose() * diag(fine_weights);
    let rhs = coarse_extent * diag(coarse_weights) * &pair.to_coarse;
    (lhs - rhs).amax()
}

/// Main diagonal of a (product) matrix, the `𝔼` operator.
pub fn diag_extract(m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).collect()
}

type HKey = (usize, Vec<(usize, u64, u64)>);

fn p_cache() -> &'static RwLock<HashMap<(usize, usize), Arc<ProjectionPair>>> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, usize), Arc<ProjectionPair>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn h_cache() -> &'static RwLock<HashMap<HKey, Arc<Vec<ProjectionPair>>>> {
    static CACHE: OnceLock<RwLock<HashMap<HKey, Arc<Vec<ProjectionPair>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Cached [`build_p_pair`].
pub fn p_pair(
    fine_order: usize,
    coarse_order: usize,
) -> Result<Arc<ProjectionPair>, ProjectionError> {
    let key = (fine_order, coarse_order);
    if let Some(p) = p_cache()
        .read()
        .expect("projection cache poisoned")
        .get(&key)
    {
        return Ok(Arc::clone(p));
    }
    let pair = Arc::new(build_p_pair(fine_order, coarse_order)?);
    let mut map = p_cache().write().expect("projection cache poisoned");
    Ok(Arc::clone(map.entry(key).or_insert(pair)))
}

/// Cached [`build_h_pairs`], keyed on orders and extent ratios.
pub fn h_pairs(geom: &InterfaceGeometry) -> Result<Arc<Vec<ProjectionPair>>, ProjectionError> {
    geom.validate()?;
    let key: HKey = (
        geom.coarse_order,
        (0..geom.sub_count())
            .map(|i| {
                (
                    geom.fine_orders[i],
                    (geom.fine_extents[i] / geom.coarse_extent).to_bits(),
                    (geom.fine_offsets[i] / geom.coarse_extent).to_bits(),
                )
            })
            .collect(),
    );
    if let Some(p) = h_cache()
        .read()
        .expect("projection cache poisoned")
        .get(&key)
    {
        return Ok(Arc::clone(p));
    }
    let pairs = Arc::new(build_h_pairs(geom)?);
    let mut map = h_cache().write().expect("projection cache poisoned");
    Ok(Arc::clone(map.entry(key).or_insert(pairs)))
}
