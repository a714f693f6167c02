//! Five-stage, fourth-order low-storage Runge-Kutta integration with a
//! CFL-limited step.

use thiserror::Error;

use crate::dg::{DgError, Field, SemiDiscretization};
use crate::physics::ConservationLaw;

/// Carpenter-Kennedy 2N-storage coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lsrk54 {
    pub a: [f64; 5],
    pub b: [f64; 5],
    pub c: [f64; 5],
}

impl Default for Lsrk54 {
    fn default() -> Self {
        Self {
            a: [
                0.0,
                -567301805773.0 / 1357537059087.0,
                -2404267990393.0 / 2016746695238.0,
                -3550918686646.0 / 2091501179385.0,
                -1275806237668.0 / 842570457699.0,
            ],
            b: [
                1432997174477.0 / 9575080441755.0,
                5161836677717.0 / 13612068292357.0,
                1720146321549.0 / 2090206949498.0,
                3134564353537.0 / 4481467310338.0,
                2277821191437.0 / 14882151754819.0,
            ],
            c: [
                0.0,
                1432997174477.0 / 9575080441755.0,
                2526269341429.0 / 6820363183471.0,
                2006345519317.0 / 3224310063776.0,
                2802321613138.0 / 2924317926251.0,
            ],
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("stage {stage}: {source}")]
pub struct StageFailure<E: std::error::Error + 'static> {
    pub stage: usize,
    #[source]
    pub source: E,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeError {
    #[error("CFL number must be positive, got {0}")]
    BadCfl(f64),
    #[error("maximum wave speed is {0}; no admissible time step")]
    NoWaveSpeed(f64),
    #[error("end time {0} is negative or not finite")]
    BadEndTime(f64),
    #[error("step {step} at t = {t}: {source}")]
    Step {
        step: usize,
        t: f64,
        stage: Option<usize>,
        source: DgError,
    },
}

impl TimeError {
    /// Time at which the run failed, if it failed inside the solver.
    pub fn time(&self) -> Option<f64> {
        match self {
            TimeError::Step { t, .. } => Some(*t),
            _ => None,
        }
    }
}

/// `Δt = CFL min_k(Δx_k/2 Δy_k/2) / (max_k(N_k + 1) λ_max)`.
pub fn cfl_dt<L: ConservationLaw<M>, const M: usize>(
    sd: &SemiDiscretization<L, M>,
    u: &Field<M>,
    cfl: f64,
) -> Result<f64, TimeError> {
    if !(cfl > 0.0 && cfl.is_finite()) {
        return Err(TimeError::BadCfl(cfl));
    }
    let nodes = sd.nodes(u).map_err(|source| TimeError::Step {
        step: 0,
        t: f64::NAN,
        stage: None,
        source,
    })?;
    let lambda = nodes
        .iter()
        .flatten()
        .fold(0.0f64, |m, n| m.max(sd.law().max_wave_speed(n)));
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(TimeError::NoWaveSpeed(lambda));
    }
    let mesh = sd.mesh();
    let h = mesh
        .elements
        .iter()
        .fold(f64::INFINITY, |m, e| m.min(0.25 * e.dx() * e.dy()));
    Ok(cfl * h / ((mesh.max_order() + 1) as f64 * lambda))
}

/// One low-storage step. `du` is the second register; `k` receives each
/// right-hand side evaluation.
pub fn lsrk54_step<const M: usize, E: std::error::Error + 'static>(
    u: &mut Field<M>,
    du: &mut Field<M>,
    k: &mut Field<M>,
    t: f64,
    dt: f64,
    mut rhs: impl FnMut(&Field<M>, f64, &mut Field<M>) -> Result<(), E>,
) -> Result<(), StageFailure<E>> {
    let rk = Lsrk54::default();
    for stage in 0..5 {
        rhs(u, t + rk.c[stage] * dt, k).map_err(|source| StageFailure { stage, source })?;
        let a = rk.a[stage];
        let b = rk.b[stage];
        for ((ui, di), ki) in u
            .data_mut()
            .iter_mut()
            .zip(du.data_mut().iter_mut())
            .zip(k.data())
        {
            for q in 0..M {
                di[q] = a * di[q] + dt * ki[q];
                ui[q] += b * di[q];
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub t_end: f64,
    pub cfl: f64,
    /// Observer cadence in steps; the initial and final states are always
    /// observed.
    pub observe_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub t: f64,
    pub steps: usize,
}

/// Advances `u` to `t_end`, recomputing the step from the current field
/// each time and clipping the last step. The observer sees the state
/// between steps only.
pub fn integrate<L: ConservationLaw<M>, const M: usize>(
    sd: &SemiDiscretization<L, M>,
    u: &mut Field<M>,
    t0: f64,
    options: IntegrateOptions,
    mut observer: impl FnMut(usize, f64, &Field<M>) -> Result<(), DgError>,
) -> Result<RunSummary, TimeError> {
    if !(options.t_end.is_finite() && options.t_end >= t0) {
        return Err(TimeError::BadEndTime(options.t_end));
    }
    let cadence = options.observe_every.max(1);
    let mut du = sd.zeros();
    let mut k = sd.zeros();
    let mut t = t0;
    let mut step = 0;
    let fail = |step, t, stage, source| TimeError::Step {
        step,
        t,
        stage,
        source,
    };
    observer(step, t, u).map_err(|e| fail(step, t, None, e))?;
    while t < options.t_end {
        let dt = match cfl_dt(sd, u, options.cfl) {
            Ok(dt) => dt,
            Err(TimeError::Step { source, .. }) => return Err(fail(step, t, None, source)),
            Err(e) => return Err(e),
        };
        let last = t + dt >= options.t_end;
        let dt = if last { options.t_end - t } else { dt };
        du.fill([0.0; M]);
        lsrk54_step(u, &mut du, &mut k, t, dt, |v, s, out| {
            sd.time_derivative_into(v, s, out)
        })
        .map_err(|e| fail(step + 1, t, Some(e.stage), e.source))?;
        step += 1;
        t = if last { options.t_end } else { t + dt };
        if step % cadence == 0 || last {
            observer(step, t, u).map_err(|e| fail(step, t, None, e))?;
        }
    }
    Ok(RunSummary { t, steps: step })
}
