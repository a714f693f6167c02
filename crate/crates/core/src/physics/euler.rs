use super::{log_mean_with_logs, Axis, ConservationLaw, PhysicsError};

pub const GAMMA: f64 = 1.4;

/// Two-dimensional compressible Euler equations for an ideal gas with
/// `γ = 1.4`. State `(ρ, ρu, ρv, E)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Euler;

/// Per-node cache: primitives plus the parameter vector
/// `z = √(ρ/p) (1, u, v, p)` and the logarithms its means need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerNode {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub p: f64,
    pub energy: f64,
    z1: f64,
    z4: f64,
    ln_z1: f64,
    ln_z4: f64,
}

impl EulerNode {
    pub fn sound_speed(&self) -> f64 {
        (GAMMA * self.p / self.rho).sqrt()
    }

    fn normal_velocity(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.u,
            Axis::Y => self.v,
        }
    }
}

impl Euler {
    pub fn primitive_to_conserved(w: &[f64; 4]) -> [f64; 4] {
        let [rho, u, v, p] = *w;
        [
            rho,
            rho * u,
            rho * v,
            p / (GAMMA - 1.0) + 0.5 * rho * (u * u + v * v),
        ]
    }

    pub fn conserved_to_primitive(q: &[f64; 4]) -> [f64; 4] {
        let rho = q[0];
        let u = q[1] / rho;
        let v = q[2] / rho;
        [
            rho,
            u,
            v,
            (GAMMA - 1.0) * (q[3] - 0.5 * rho * (u * u + v * v)),
        ]
    }

    pub fn node_from_primitive(&self, w: &[f64; 4]) -> Result<EulerNode, PhysicsError> {
        self.node(&Self::primitive_to_conserved(w))
    }
}

impl ConservationLaw<4> for Euler {
    type Node = EulerNode;

    fn name(&self) -> &'static str {
        "euler"
    }

    #[inline]
    fn node(&self, q: &[f64; 4]) -> Result<EulerNode, PhysicsError> {
        for (component, &value) in q.iter().enumerate() {
            if !value.is_finite() {
                return Err(PhysicsError::NonFinite { component, value });
            }
        }
        let [rho, u, v, p] = Self::conserved_to_primitive(q);
        if !(rho > 0.0 && p > 0.0) {
            return Err(PhysicsError::NonAdmissible {
                density: rho,
                pressure: p,
            });
        }
        let (ln_rho, ln_p) = (rho.ln(), p.ln());
        let ln_z1 = 0.5 * (ln_rho - ln_p);
        let ln_z4 = 0.5 * (ln_rho + ln_p);
        Ok(EulerNode {
            rho,
            u,
            v,
            p,
            energy: q[3],
            z1: (rho / p).sqrt(),
            z4: (rho * p).sqrt(),
            ln_z1,
            ln_z4,
        })
    }

    fn conserved(&self, n: &EulerNode) -> [f64; 4] {
        [n.rho, n.rho * n.u, n.rho * n.v, n.energy]
    }

    #[inline]
    fn flux(&self, n: &EulerNode, axis: Axis) -> [f64; 4] {
        let vn = n.normal_velocity(axis);
        let m = n.rho * vn;
        match axis {
            Axis::X => [m, m * n.u + n.p, m * n.v, vn * (n.energy + n.p)],
            Axis::Y => [m, m * n.u, m * n.v + n.p, vn * (n.energy + n.p)],
        }
    }

    fn entropy(&self, n: &EulerNode) -> f64 {
        let s = n.p.ln() - GAMMA * n.rho.ln();
        -n.rho * s / (GAMMA - 1.0)
    }

    #[inline]
    fn entropy_vars(&self, n: &EulerNode) -> [f64; 4] {
        let s = n.p.ln() - GAMMA * n.rho.ln();
        let beta = n.rho / n.p;
        [
            (GAMMA - s) / (GAMMA - 1.0) - 0.5 * beta * (n.u * n.u + n.v * n.v),
            beta * n.u,
            beta * n.v,
            -beta,
        ]
    }

    fn entropy_flux(&self, n: &EulerNode, axis: Axis) -> f64 {
        n.normal_velocity(axis) * self.entropy(n)
    }

    #[inline]
    fn potential(&self, n: &EulerNode, axis: Axis) -> f64 {
        n.rho * n.normal_velocity(axis)
    }

    #[inline]
    fn ec_flux(&self, a: &EulerNode, b: &EulerNode, axis: Axis) -> [f64; 4] {
        // Ismail-Roe flux in parameter-vector form.
        let z1_avg = 0.5 * (a.z1 + b.z1);
        let z2_avg = 0.5 * (a.z1 * a.u + b.z1 * b.u);
        let z3_avg = 0.5 * (a.z1 * a.v + b.z1 * b.v);
        let z4_avg = 0.5 * (a.z4 + b.z4);
        let z1_ln = log_mean_with_logs(a.z1, b.z1, a.ln_z1, b.ln_z1);
        let z4_ln = log_mean_with_logs(a.z4, b.z4, a.ln_z4, b.ln_z4);

        let rho = z1_avg * z4_ln;
        let u = z2_avg / z1_avg;
        let v = z3_avg / z1_avg;
        let p1 = z4_avg / z1_avg;
        let p2 = (GAMMA + 1.0) / (2.0 * GAMMA) * z4_ln / z1_ln + (GAMMA - 1.0) / (2.0 * GAMMA) * p1;
        let h = GAMMA * p2 / (rho * (GAMMA - 1.0)) + 0.5 * (u * u + v * v);
        match axis {
            Axis::X => {
                let m = rho * u;
                [m, m * u + p1, m * v, m * h]
            }
            Axis::Y => {
                let m = rho * v;
                [m, m * u, m * v + p1, m * h]
            }
        }
    }

    #[inline]
    fn wave_speed(&self, n: &EulerNode, axis: Axis) -> f64 {
        n.normal_velocity(axis).abs() + n.sound_speed()
    }
}

/// Local Lax-Friedrichs coefficient `½ max(λ_L, λ_R)` for a unit normal,
/// `λ = max(|z + c|, |z|, |z - c|)` with `z = n·(u, v)`.
pub fn llf_lambda(
    left: &[f64; 4],
    right: &[f64; 4],
    normal: [f64; 2],
) -> Result<f64, PhysicsError> {
    let side = |q: &[f64; 4]| -> Result<f64, PhysicsError> {
        let n = Euler.node(q)?;
        let z = normal[0] * n.u + normal[1] * n.v;
        let c = n.sound_speed();
        Ok((z + c).abs().max(z.abs()).max((z - c).abs()))
    };
    Ok(0.5 * side(left)?.max(side(right)?))
}
