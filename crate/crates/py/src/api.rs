use std::sync::Arc;

use esdg_core::config::{ConfigError, RunConfig};
use esdg_core::dg::{Coupling, DgError, Field, SemiDiscretization, UnknownCoupling};
use esdg_core::diagnostics;
use esdg_core::experiments::{self, Check, ExperimentError};
use esdg_core::mesh::{
    build_three_region_mesh, BoundaryConditions, BoundaryKind, Domain, MeshError,
};
use esdg_core::physics::initial::random_discontinuous_ic;
use esdg_core::physics::Euler;
use esdg_core::sbp::{sbp_operators as operators, SbpError};
use esdg_core::time::{integrate, IntegrateOptions, TimeError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{0}")]
    Argument(String),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Dg(#[from] DgError),
    #[error(transparent)]
    Time(#[from] TimeError),
}

impl From<UnknownCoupling> for ApiError {
    fn from(e: UnknownCoupling) -> Self {
        Self::Argument(e.to_string())
    }
}

impl From<ConfigError> for ApiError {
    fn from(e: ConfigError) -> Self {
        Self::Argument(e.to_string())
    }
}

impl From<MeshError> for ApiError {
    fn from(e: MeshError) -> Self {
        Self::Argument(e.to_string())
    }
}

impl From<SbpError> for ApiError {
    fn from(e: SbpError) -> Self {
        Self::Argument(e.to_string())
    }
}

fn triples(checks: Vec<Check>) -> Vec<(String, bool, String)> {
    checks
        .into_iter()
        .map(|c| (c.name, c.passed, c.detail))
        .collect()
}

pub fn sbp_operators(order: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>), ApiError> {
    let ops = operators(order)?;
    let n = order + 1;
    let d = (0..n)
        .map(|i| (0..n).map(|j| ops.d[(i, j)]).collect())
        .collect();
    Ok((ops.nodes().to_vec(), ops.weights().to_vec(), d))
}

pub fn operator_checks(
    max_order: usize,
    max_projection_order: usize,
) -> Result<Vec<(String, bool, String)>, ApiError> {
    if max_order == 0 || max_projection_order == 0 {
        return Err(ApiError::Argument("orders must be at least 1".into()));
    }
    Ok(triples(
        experiments::operators_report(max_order, max_projection_order)?.checks(),
    ))
}

pub fn entropy_ensemble(
    coupling: &str,
    level: usize,
    orders: [usize; 3],
    trials: usize,
    seed: u64,
) -> Result<([f64; 4], f64, usize, usize), ApiError> {
    let report = experiments::entropy_ensemble(level, orders, coupling.parse()?, trials, seed)?;
    let rms = report.rms();
    Ok((
        rms.primary,
        rms.entropy,
        report.evaluated().len(),
        report.failures(),
    ))
}

pub type ConvergenceRows = (Vec<(usize, usize, f64)>, Option<f64>);

pub fn convergence(
    orders: [usize; 3],
    min_level: usize,
    max_level: usize,
    coupling: &str,
    cfl: f64,
    t_end: f64,
) -> Result<ConvergenceRows, ApiError> {
    if min_level == 0 || min_level > max_level {
        return Err(ApiError::Argument(format!(
            "bad level range {min_level}..={max_level}"
        )));
    }
    let report =
        experiments::convergence(orders, min_level..=max_level, coupling.parse()?, cfl, t_end)?;
    if let Some((level, msg)) = report.failure {
        return Err(ApiError::Argument(format!("level {level} failed: {msg}")));
    }
    let rows = report
        .levels
        .iter()
        .map(|l| (l.level, l.dofs, l.l2))
        .collect();
    Ok((rows, report.table.and_then(|t| t.last_eoc())))
}

pub fn run_config(toml: &str) -> Result<(String, Vec<(String, bool, String)>), ApiError> {
    let config = RunConfig::from_toml(toml)?;
    let out = experiments::run_config(&config)?;
    Ok((out.series_csv(), triples(out.checks())))
}

pub struct EulerSolver {
    sd: SemiDiscretization<Euler, 4>,
    u: Field<4>,
    t: f64,
}

impl EulerSolver {
    pub fn three_region(
        level: usize,
        orders: [usize; 3],
        coupling: &str,
        domain: [f64; 4],
        periodic: bool,
    ) -> Result<Self, ApiError> {
        let coupling: Coupling = coupling.parse()?;
        let domain = Domain::new(domain[0], domain[1], domain[2], domain[3])?;
        let kind = if periodic {
            BoundaryKind::Periodic
        } else {
            BoundaryKind::Dirichlet
        };
        let mesh =
            build_three_region_mesh(level, orders, domain, BoundaryConditions::uniform(kind))?;
        let sd = SemiDiscretization::new(Euler, Arc::new(mesh), coupling)?
            .with_boundary_state(Arc::new(experiments::vortex_state));
        let u =
            experiments::split_field(&sd, &esdg_core::physics::initial::DiagonalSplit::preset())?;
        Ok(Self { sd, u, t: 0.0 })
    }

    pub fn set_random_jump(&mut self, seed: u64) -> Result<(), ApiError> {
        self.u = experiments::split_field(&self.sd, &random_discontinuous_ic(seed))?;
        self.t = 0.0;
        Ok(())
    }

    pub fn set_vortex(&mut self, t: f64) -> Result<(), ApiError> {
        self.u = self.sd.project(|x, y| experiments::vortex_state(x, y, t))?;
        self.t = t;
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn dofs(&self) -> usize {
        self.sd.mesh().dofs(4)
    }

    pub fn total_entropy(&self) -> Result<f64, ApiError> {
        Ok(diagnostics::total_entropy(&self.sd, &self.u)?)
    }

    pub fn growth(&self) -> Result<([f64; 4], f64), ApiError> {
        let g = diagnostics::growth(&self.sd, &self.u, self.t)?;
        Ok((g.primary, g.entropy))
    }

    /// On failure the state is left as it was before the call.
    pub fn advance(&mut self, t_end: f64, cfl: f64) -> Result<usize, ApiError> {
        if t_end < self.t {
            return Err(ApiError::Argument(format!(
                "t_end {t_end} is before the current time {}",
                self.t
            )));
        }
        let mut u = self.u.clone();
        let options = IntegrateOptions {
            t_end,
            cfl,
            observe_every: usize::MAX,
        };
        let run = integrate(&self.sd, &mut u, self.t, options, |_, _, _| Ok(()))?;
        self.u = u;
        self.t = run.t;
        Ok(run.steps)
    }

    pub fn nodal_values(&self) -> Vec<(f64, f64, f64, f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.u.data().len());
        for (k, e) in self.sd.mesh().elements.iter().enumerate() {
            let nodes = self.sd.operators(k).nodes();
            let n = nodes.len();
            for j in 0..n {
                for i in 0..n {
                    let (x, y) = e.map(nodes[i], nodes[j]);
                    let q = self.u.at(k, i, j);
                    out.push((x, y, q[0], q[1], q[2], q[3]));
                }
            }
        }
        out
    }
}
