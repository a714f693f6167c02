use super::{Axis, ConservationLaw, PhysicsError};

/// Scalar Burgers equation `u_t + (u²/2)_x + (u²/2)_y = 0` with the square
/// entropy `S = u²/2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Burgers;

impl Burgers {
    pub fn ec_flux_scalar(ul: f64, ur: f64) -> f64 {
        (ul * ul + ul * ur + ur * ur) / 6.0
    }
}

impl ConservationLaw<1> for Burgers {
    type Node = f64;

    fn name(&self) -> &'static str {
        "burgers"
    }

    fn node(&self, u: &[f64; 1]) -> Result<f64, PhysicsError> {
        if u[0].is_finite() {
            Ok(u[0])
        } else {
            Err(PhysicsError::NonFinite {
                component: 0,
                value: u[0],
            })
        }
    }

    fn conserved(&self, n: &f64) -> [f64; 1] {
        [*n]
    }

    fn flux(&self, n: &f64, _axis: Axis) -> [f64; 1] {
        [0.5 * n * n]
    }

    fn entropy(&self, n: &f64) -> f64 {
        0.5 * n * n
    }

    fn entropy_vars(&self, n: &f64) -> [f64; 1] {
        [*n]
    }

    fn entropy_flux(&self, n: &f64, _axis: Axis) -> f64 {
        n * n * n / 3.0
    }

    fn potential(&self, n: &f64, _axis: Axis) -> f64 {
        n * n * n / 6.0
    }

    fn ec_flux(&self, a: &f64, b: &f64, _axis: Axis) -> [f64; 1] {
        [Self::ec_flux_scalar(*a, *b)]
    }

    fn wave_speed(&self, n: &f64, _axis: Axis) -> f64 {
        n.abs()
    }
}
