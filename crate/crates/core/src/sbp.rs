//! Legendre-Gauss-Lobatto collocation and the diagonal-norm SBP operators
//! built on it.
//!
//! Every element of order `N` uses the `N + 1` LGL nodes in each direction.
//! Collocating interpolation and quadrature on these nodes gives a diagonal
//! mass matrix `M` and a derivative matrix `D` with
//! `Q + Qᵀ = B = diag(-1, 0, …, 0, 1)` where `Q = M D`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SbpError {
    #[error("polynomial order must be at least 1, got {0}")]
    OrderTooLow(usize),
    #[error("Gauss-Legendre rule needs at least one point")]
    NoPoints,
}

/// One-dimensional quadrature rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D {
    /// Polynomial order `N`; the rule has `N + 1` nodes. For Gauss-Legendre
    /// rules this is `points - 1`.
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Legendre polynomial `P_n(x)` and its predecessor `P_{n-1}(x)` by the
/// three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    (p, p_prev)
}

/// Mirror a rule about the origin so nodes and weights are exactly symmetric.
fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

/// The `N + 1` point Legendre-Gauss-Lobatto rule: nodes are the roots of
/// `(1 - ξ²) P'_N(ξ)`, weights `2 / (N (N + 1) P_N(ξ_i)²)`.
pub fn lgl_rule(order: usize) -> Result<QuadratureRule1D, SbpError> {
    if order == 0 {
        return Err(SbpError::OrderTooLow(order));
    }
    let n = order;
    let nf = n as f64;
    let mut nodes = vec![0.0; n + 1];
    let mut weights = vec![0.0; n + 1];
    for (i, node) in nodes.iter_mut().enumerate() {
        // Chebyshev-Gauss-Lobatto initial guess.
        let mut x = -(std::f64::consts::PI * i as f64 / nf).cos();
        if i == 0 || i == n {
            *node = x.signum();
            continue;
        }
        for _ in 0..100 {
            let (p, p_prev) = legendre_pair(n, x);
            // (1 - x²) P'_N = N (P_{N-1} - x P_N); Newton on x P_N - P_{N-1}
            // with derivative (N + 1) P_N.
            let dx = (x * p - p_prev) / ((nf + 1.0) * p);
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        *node = x;
    }
    for (w, &x) in weights.iter_mut().zip(&nodes) {
        let (p, _) = legendre_pair(n, x);
        *w = 2.0 / (nf * (nf + 1.0) * p * p);
    }
    symmetrize(&mut nodes, &mut weights);
    Ok(QuadratureRule1D {
        order,
        nodes,
        weights,
    })
}

/// `points`-point Gauss-Legendre rule, exact for degree `2 points - 1`.
pub fn gauss_legendre_rule(points: usize) -> Result<QuadratureRule1D, SbpError> {
    if points == 0 {
        return Err(SbpError::NoPoints);
    }
    let n = points;
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let derivative = |x: f64| {
            let (p, p_prev) = legendre_pair(n, x);
            (p, nf * (x * p - p_prev) / (x * x - 1.0))
        };
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = derivative(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = derivative(x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    symmetrize(&mut nodes, &mut weights);
    Ok(QuadratureRule1D {
        order: n - 1,
        nodes,
        weights,
    })
}

/// Value of the `j`-th Lagrange basis polynomial of `rule` at `x`.
pub fn lagrange_eval(rule: &QuadratureRule1D, j: usize, x: f64) -> f64 {
    lagrange_basis_at(&rule.nodes, j, x)
}

pub(crate) fn lagrange_basis_at(nodes: &[f64], j: usize, x: f64) -> f64 {
    let xj = nodes[j];
    nodes
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, &xk)| (x - xk) / (xj - xk))
        .product()
}

/// Barycentric weights `1 / Π_{k≠j} (x_j - x_k)`.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let prod: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &xk)| nodes[j] - xk)
                .product();
            1.0 / prod
        })
        .collect()
}

/// Matrix evaluating the interpolant through `from_nodes` at the points
/// `at`: `[I]_{ij} = ℓ_j(at_i)`.
pub fn interpolation_matrix(from_nodes: &[f64], at: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(at.len(), from_nodes.len(), |i, j| {
        // Exact Kronecker delta when a target coincides with a source node.
        match from_nodes.iter().position(|&x| x == at[i]) {
            Some(k) => {
                if k == j {
                    1.0
                } else {
                    0.0
                }
            }
            None => lagrange_basis_at(from_nodes, j, at[i]),
        }
    })
}

/// Polynomial differentiation matrix `D_ij = ℓ'_j(x_i)` from the barycentric
/// formulas, diagonal by the negative-sum trick.
pub fn derivative_matrix(nodes: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let bw = barycentric_weights(nodes);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bw[j] / bw[i]) / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

/// The `(M, D, Q, B)` operator set of one polynomial order.
#[derive(Debug, Clone, PartialEq)]
pub struct SbpOperators {
    pub rule: QuadratureRule1D,
    pub m: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl SbpOperators {
    pub fn order(&self) -> usize {
        self.rule.order
    }

    pub fn weights(&self) -> &[f64] {
        &self.rule.weights
    }

    pub fn nodes(&self) -> &[f64] {
        &self.rule.nodes
    }

    /// `max |Q + Qᵀ - B|`.
    pub fn sbp_residual(&self) -> f64 {
        (&self.q + self.q.transpose() - &self.b).amax()
    }

    /// `max |D 1|`.
    pub fn consistency_residual(&self) -> f64 {
        self.d.row_iter().map(|r| r.sum().abs()).fold(0.0, f64::max)
    }

    /// `max |D - (M⁻¹B - M⁻¹DᵀM)|`.
    pub fn rearranged_residual(&self) -> f64 {
        let n = self.rule.len();
        let m_inv = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / self.m[(i, i)] } else { 0.0 });
        let rhs = &m_inv * &self.b - &m_inv * self.d.transpose() * &self.m;
        (&self.d - rhs).amax()
    }

    /// Nodes, weights and `D` as CSV with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.rule.len();
        let mut out = String::from("i,node,weight");
        for j in 0..n {
            let _ = write!(out, ",D_{j}");
        }
        out.push('\n');
        for i in 0..n {
            let _ = write!(
                out,
                "{i},{:.16e},{:.16e}",
                self.rule.nodes[i], self.rule.weights[i]
            );
            for j in 0..n {
                let _ = write!(out, ",{:.16e}", self.d[(i, j)]);
            }
            out.push('\n');
        }
        out
    }
}

pub fn build_sbp(order: usize) -> Result<SbpOperators, SbpError> {
    let rule = lgl_rule(order)?;
    let n = order + 1;
    let d = derivative_matrix(&rule.nodes);
    let m = DMatrix::from_fn(n, n, |i, j| if i == j { rule.weights[i] } else { 0.0 });
    let q = &m * &d;
    let mut b = DMatrix::zeros(n, n);
    b[(0, 0)] = -1.0;
    b[(n - 1, n - 1)] = 1.0;
    Ok(SbpOperators { rule, m, d, q, b })
}

fn registry() -> &'static RwLock<HashMap<usize, Arc<SbpOperators>>> {
    static REGISTRY: OnceLock<RwLock<HashMap<usize, Arc<SbpOperators>>>> = OnceLock::new();
    REGISTRY.get_or_init(Default::default)
}

/// Shared operators of order `order`, built on first use.
pub fn sbp_operators(order: usize) -> Result<Arc<SbpOperators>, SbpError> {
    if let Some(ops) = registry()
        .read()
        .expect("sbp registry poisoned")
        .get(&order)
    {
        return Ok(Arc::clone(ops));
    }
    let ops = Arc::new(build_sbp(order)?);
    let mut map = registry().write().expect("sbp registry poisoned");
    Ok(Arc::clone(map.entry(order).or_insert(ops)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn order_zero_is_rejected() {
        assert_eq!(lgl_rule(0), Err(SbpError::OrderTooLow(0)));
        assert!(build_sbp(0).is_err());
    }

    #[test]
    fn low_order_rules() {
        let r1 = lgl_rule(1).unwrap();
        assert_eq!(r1.nodes, vec![-1.0, 1.0]);
        assert_eq!(r1.weights, vec![1.0, 1.0]);

        let r2 = lgl_rule(2).unwrap();
        for (a, b) in r2.nodes.iter().zip([-1.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        for (a, b) in r2.weights.iter().zip([1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }

        let r3 = lgl_rule(3).unwrap();
        let s = 1.0 / 5f64.sqrt();
        for (a, b) in r3.nodes.iter().zip([-1.0, -s, s, 1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        for (a, b) in r3
            .weights
            .iter()
            .zip([1.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 6.0])
        {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn lagrange_values() {
        let r2 = lgl_rule(2).unwrap();
        assert_abs_diff_eq!(lagrange_eval(&r2, 1, 0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lagrange_eval(&r2, 0, 0.5), -0.125, epsilon = 1e-15);
        let r6 = lgl_rule(6).unwrap();
        for x in [-0.93, -0.2, 0.0, 0.41, 0.77] {
            let s: f64 = (0..=6).map(|j| lagrange_eval(&r6, j, x)).sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn linear_operators() {
        let ops = build_sbp(1).unwrap();
        let d = DMatrix::from_row_slice(2, 2, &[-0.5, 0.5, -0.5, 0.5]);
        assert_abs_diff_eq!((&ops.d - d).amax(), 0.0, epsilon = 1e-15);
        let qq = &ops.q + ops.q.transpose();
        assert_abs_diff_eq!(
            (qq - DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0])).amax(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn order_five_sbp_identity() {
        assert!(build_sbp(5).unwrap().sbp_residual() < 1e-13);
    }

    #[test]
    fn gauss_rule_integrates_to_degree() {
        let g = gauss_legendre_rule(5).unwrap();
        for k in 0..10 {
            let exact = if k % 2 == 0 {
                2.0 / (k as f64 + 1.0)
            } else {
                0.0
            };
            assert_abs_diff_eq!(g.integrate(|x| x.powi(k)), exact, epsilon = 1e-14);
        }
    }

    #[test]
    fn registry_returns_shared_operators() {
        let a = sbp_operators(4).unwrap();
        let b = sbp_operators(4).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let csv = build_sbp(2).unwrap().to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "i,node,weight,D_0,D_1,D_2");
    }
}
