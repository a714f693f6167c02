//! Benchmark initial and exact solutions, in primitive variables
//! `(ρ, u, v, p)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GAMMA;

const VORTEX_EPS: f64 = 5.0 / (2.0 * std::f64::consts::PI);
const VORTEX_ALPHA: f64 = 0.5;
const VORTEX_CENTER: f64 = 5.0;

/// Initial vortex centred at `(5, 5)` on a unit diagonal background flow.
pub fn vortex_initial(x: f64, y: f64) -> [f64; 4] {
    let dx = x - VORTEX_CENTER;
    let dy = y - VORTEX_CENTER;
    let r2 = dx * dx + dy * dy;
    let phi = VORTEX_EPS * (VORTEX_ALPHA * (1.0 - r2)).exp();
    let t = 1.0 - (GAMMA - 1.0) / (2.0 * GAMMA) * phi * phi;
    [
        t.powf(1.0 / (GAMMA - 1.0)),
        1.0 - dy * phi,
        1.0 + dx * phi,
        t.powf(GAMMA / (GAMMA - 1.0)),
    ]
}

/// Exact solution: the vortex translated along the diagonal.
pub fn vortex_solution(x: f64, y: f64, t: f64) -> [f64; 4] {
    vortex_initial(x - t, y - t)
}

/// Two constant states separated by the diagonal `x = y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalSplit {
    /// Used where `x ≤ y`.
    pub upper: [f64; 4],
    /// Used where `x > y`.
    pub lower: [f64; 4],
}

impl DiagonalSplit {
    pub fn at(&self, x: f64, y: f64) -> [f64; 4] {
        if x <= y {
            self.upper
        } else {
            self.lower
        }
    }

    /// Near-stationary jump used for long-time robustness runs.
    pub fn preset() -> Self {
        Self {
            upper: [1.08, 0.2, 0.01, 0.95],
            lower: [1.0, 1e-12, 1e-12, 1.0],
        }
    }
}

/// Both states drawn uniformly from `[0, 1]` per component, reproducibly.
pub fn random_discontinuous_ic(seed: u64) -> DiagonalSplit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        let mut w = [0.0; 4];
        for (k, c) in w.iter_mut().enumerate() {
            *c = rng.random::<f64>();
            // Density and pressure must stay strictly positive.
            while (k == 0 || k == 3) && *c == 0.0 {
                *c = rng.random::<f64>();
            }
        }
        w
    };
    let upper = draw();
    let lower = draw();
    DiagonalSplit { upper, lower }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vortex_far_field_and_center() {
        let w = vortex_initial(-40.0, 60.0);
        for c in w {
            assert!((c - 1.0).abs() < 1e-14);
        }
        let c = vortex_initial(5.0, 5.0);
        assert_eq!(c[1], 1.0);
        assert_eq!(c[2], 1.0);
        assert!(c[0] < 1.0 && c[3] < 1.0);
    }

    #[test]
    fn vortex_is_isentropic_and_advects() {
        let w = vortex_initial(5.3, 4.1);
        assert!((w[3] - w[0].powf(GAMMA)).abs() < 1e-14);
        assert_eq!(vortex_solution(6.3, 5.1, 1.0), w);
    }

    #[test]
    fn random_ic_is_deterministic_and_admissible() {
        let a = random_discontinuous_ic(42);
        assert_eq!(a, random_discontinuous_ic(42));
        assert_ne!(a, random_discontinuous_ic(43));
        for w in [a.upper, a.lower] {
            assert!(w.iter().all(|c| (0.0..=1.0).contains(c)));
            assert!(w[0] > 0.0 && w[3] > 0.0);
        }
        assert_eq!(a.at(0.2, 0.2), a.upper);
        assert_eq!(a.at(0.3, 0.2), a.lower);
    }
}
