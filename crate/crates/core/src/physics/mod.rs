//! Conservation laws: fluxes, entropy pairs and two-point entropy
//! conservative fluxes.

mod burgers;
mod euler;
pub mod initial;

pub use burgers::Burgers;
pub use euler::{llf_lambda, Euler, EulerNode, GAMMA};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("non-admissible state: density {density:e}, pressure {pressure:e}")]
    NonAdmissible { density: f64, pressure: f64 },
    #[error("non-finite state component {component} = {value}")]
    NonFinite { component: usize, value: f64 },
    #[error("logarithmic mean needs positive arguments, got {0:e} and {1:e}")]
    LogMeanDomain(f64, f64),
}

/// Coordinate direction of a flux or an interface normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Self {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

/// A hyperbolic system `u_t + f(u)_x + g(u)_y = 0` with `M` conserved
/// variables and a convex entropy `S`.
///
/// Pointwise quantities are evaluated through [`ConservationLaw::Node`], a
/// per-node cache of whatever the law needs repeatedly (primitive variables,
/// logarithms). Building one checks admissibility.
pub trait ConservationLaw<const M: usize>: Send + Sync {
    type Node: Copy + Send + Sync + std::fmt::Debug;

    fn name(&self) -> &'static str;

    fn node(&self, u: &[f64; M]) -> Result<Self::Node, PhysicsError>;

    fn conserved(&self, n: &Self::Node) -> [f64; M];

    fn flux(&self, n: &Self::Node, axis: Axis) -> [f64; M];

    fn entropy(&self, n: &Self::Node) -> f64;

    fn entropy_vars(&self, n: &Self::Node) -> [f64; M];

    fn entropy_flux(&self, n: &Self::Node, axis: Axis) -> f64;

    /// `Ψ = vᵀf - F` in the given direction.
    fn potential(&self, n: &Self::Node, axis: Axis) -> f64;

    /// Symmetric, consistent two-point flux with `⟦v⟧ᵀ f = ⟦Ψ⟧`.
    fn ec_flux(&self, a: &Self::Node, b: &Self::Node, axis: Axis) -> [f64; M];

    /// Largest characteristic speed magnitude along `axis`.
    fn wave_speed(&self, n: &Self::Node, axis: Axis) -> f64;

    /// Speed used for the explicit time step restriction.
    fn max_wave_speed(&self, n: &Self::Node) -> f64 {
        self.wave_speed(n, Axis::X).max(self.wave_speed(n, Axis::Y))
    }

    fn ec_flux_states(
        &self,
        a: &[f64; M],
        b: &[f64; M],
        axis: Axis,
    ) -> Result<[f64; M], PhysicsError> {
        Ok(self.ec_flux(&self.node(a)?, &self.node(b)?, axis))
    }
}

/// `(b - a) / (ln b - ln a)` for positive `a`, `b`, with a series branch
/// when the arguments are close.
pub fn log_mean(a: f64, b: f64) -> Result<f64, PhysicsError> {
    if !(a > 0.0 && b > 0.0) {
        return Err(PhysicsError::LogMeanDomain(a, b));
    }
    Ok(log_mean_with_logs(a, b, a.ln(), b.ln()))
}

/// [`log_mean`] given precomputed logarithms.
#[inline]
pub fn log_mean_with_logs(a: f64, b: f64, ln_a: f64, ln_b: f64) -> f64 {
    let f = (b - a) / (b + a);
    let u = f * f;
    if u < 1e-4 {
        // ln(b/a) = 2 atanh f = 2f (1 + u/3 + u²/5 + u³/7 + …)
        0.5 * (a + b) / (1.0 + u * (1.0 / 3.0 + u * (0.2 + u / 7.0)))
    } else {
        (b - a) / (ln_b - ln_a)
    }
}
