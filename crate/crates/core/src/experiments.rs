//! Drivers for the verification experiments, shared by the command line
//! tool and the Python bindings. Each report knows its own pass/fail
//! checks.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, InitialSpec, PhysicsKind, RunConfig};
use crate::dg::{Coupling, DgError, Field, SemiDiscretization, StateFn};
use crate::diagnostics::{self, DiagnosticsError, EocTable, GrowthReport, TimeSample};
use crate::mesh::{
    build_three_region_mesh, BoundaryConditions, BoundaryKind, Domain, Mesh, MeshError,
};
use crate::physics::initial::{
    random_discontinuous_ic, vortex_initial, vortex_solution, DiagonalSplit,
};
use crate::physics::{Burgers, ConservationLaw, Euler};
use crate::projection::{self, build_h_pairs, build_p_pair, InterfaceGeometry, ProjectionError};
use crate::sbp::{gauss_legendre_rule, sbp_operators, SbpError, SbpOperators};
use crate::time::{integrate, IntegrateOptions, TimeError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Dg(#[from] DgError),
    #[error(transparent)]
    Time(#[from] TimeError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Sbp(#[from] SbpError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

/// One named pass/fail line.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

pub fn format_checks(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let _ = writeln!(
            s,
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    s
}

/// `name,passed,detail` rows.
pub fn checks_csv(checks: &[Check]) -> String {
    let mut s = String::from("name,passed,detail\n");
    for c in checks {
        let _ = writeln!(
            s,
            "\"{}\",{},\"{}\"",
            c.name.replace('"', "'"),
            c.passed,
            c.detail.replace('"', "'")
        );
    }
    s
}

/// Prefixes CSV text with `# key: value` comment lines naming the code
/// version and the configuration hash.
pub fn with_metadata(csv: &str, config_hash: u64, extra: &[(&str, String)]) -> String {
    let mut s = format!(
        "# esdg {}\n# config_hash: {config_hash:016x}\n",
        env!("CARGO_PKG_VERSION")
    );
    for (k, v) in extra {
        let _ = writeln!(s, "# {k}: {v}");
    }
    s.push_str(csv);
    s
}

// ---------------------------------------------------------------- operators

pub const SBP_TOL: f64 = 1e-13;
pub const QUADRATURE_TOL: f64 = 1e-12;
pub const COMPATIBILITY_TOL: f64 = 1e-12;
pub const CONSTANT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorRow {
    pub order: usize,
    /// `max |Q + Qᵀ - B|`.
    pub sbp: f64,
    /// `max |D 1|`.
    pub consistency: f64,
    /// Worst relative error integrating monomials up to degree `2N - 1`
    /// against a Gauss-Legendre rule.
    pub exactness: f64,
}

impl OperatorRow {
    pub fn from_operators(ops: &SbpOperators) -> Result<Self, SbpError> {
        let n = ops.order();
        let gauss = gauss_legendre_rule(n + 1)?;
        let mut exactness = 0.0f64;
        for degree in 0..2 * n {
            let f = |x: f64| x.powi(degree as i32);
            let weights = ops.weights();
            let lgl: f64 = ops
                .nodes()
                .iter()
                .zip(weights)
                .map(|(&x, w)| w * f(x))
                .sum();
            let reference = gauss.integrate(f);
            let scale = reference.abs().max(1.0);
            exactness = exactness.max((lgl - reference).abs() / scale);
        }
        Ok(Self {
            order: n,
            sbp: ops.sbp_residual(),
            consistency: ops.consistency_residual(),
            exactness,
        })
    }

    pub fn passed(&self) -> bool {
        self.sbp < SBP_TOL && self.consistency < SBP_TOL && self.exactness < QUADRATURE_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionRow {
    pub fine_order: usize,
    pub coarse_order: usize,
    pub sub_edges: usize,
    pub compatibility: f64,
    pub constants: f64,
}

impl ProjectionRow {
    pub fn passed(&self) -> bool {
        self.compatibility < COMPATIBILITY_TOL && self.constants < CONSTANT_TOL
    }
}

fn projection_row(
    fine: usize,
    coarse: usize,
    sub_edges: usize,
) -> Result<ProjectionRow, ExperimentError> {
    let wl = sbp_operators(fine)?.weights().to_vec();
    let wr = sbp_operators(coarse)?.weights().to_vec();
    let ones = |n: usize| nalgebra::DVector::from_element(n + 1, 1.0);
    let (pairs, geometry) = if sub_edges == 0 {
        (
            vec![build_p_pair(fine, coarse)?],
            InterfaceGeometry::matching(fine, coarse, 1.0),
        )
    } else {
        let g = InterfaceGeometry::uniform_split(coarse, vec![fine; sub_edges], 1.0);
        (build_h_pairs(&g)?, g)
    };
    let mut compatibility = 0.0f64;
    let mut constants = 0.0f64;
    let mut restored = nalgebra::DVector::zeros(coarse + 1);
    for (i, p) in pairs.iter().enumerate() {
        compatibility = compatibility.max(projection::compatibility_residual(
            p,
            &wl,
            &wr,
            geometry.fine_extents[i],
            geometry.coarse_extent,
        ));
        constants = constants.max((&p.to_fine * ones(coarse) - ones(fine)).amax());
        let back = &p.to_coarse * ones(fine);
        if sub_edges == 0 {
            constants = constants.max((back - ones(coarse)).amax());
        } else {
            restored += back;
        }
    }
    if sub_edges > 0 {
        constants = constants.max((restored - ones(coarse)).amax());
    }
    Ok(ProjectionRow {
        fine_order: fine,
        coarse_order: coarse,
        sub_edges,
        compatibility,
        constants,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorsReport {
    pub sbp: Vec<OperatorRow>,
    pub projections: Vec<ProjectionRow>,
}

/// SBP identities for orders `1..=max_order`, projection identities for
/// every order pair up to `max_projection_order` with one to three
/// sub-edges (`sub_edges = 0` marks a pure p-interface).
pub fn operators_report(
    max_order: usize,
    max_projection_order: usize,
) -> Result<OperatorsReport, ExperimentError> {
    let sbp = (1..=max_order)
        .map(|n| Ok(OperatorRow::from_operators(&*sbp_operators(n)?)?))
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let mut projections = Vec::new();
    for fine in 1..=max_projection_order {
        for coarse in 1..=max_projection_order {
            for sub_edges in 0..=3 {
                projections.push(projection_row(fine, coarse, sub_edges)?);
            }
        }
    }
    Ok(OperatorsReport { sbp, projections })
}

impl OperatorsReport {
    pub fn checks(&self) -> Vec<Check> {
        let mut out: Vec<Check> = self
            .sbp
            .iter()
            .map(|r| {
                Check::new(
                    format!("sbp N={}", r.order),
                    r.passed(),
                    format!(
                        "|Q+Qt-B| {:.2e}, |D1| {:.2e}, quadrature {:.2e}",
                        r.sbp, r.consistency, r.exactness
                    ),
                )
            })
            .collect();
        let worst_c = self
            .projections
            .iter()
            .map(|r| r.compatibility)
            .fold(0.0, f64::max);
        let worst_k = self
            .projections
            .iter()
            .map(|r| r.constants)
            .fold(0.0, f64::max);
        out.push(Check::new(
            "projections",
            self.projections.iter().all(ProjectionRow::passed),
            format!(
                "{} pairs, compatibility {:.2e}, constants {:.2e}",
                self.projections.len(),
                worst_c,
                worst_k
            ),
        ));
        out
    }

    pub fn sbp_csv(&self) -> String {
        let mut s = String::from("order,sbp_residual,consistency_residual,quadrature_error\n");
        for r in &self.sbp {
            let _ = writeln!(
                s,
                "{},{:.3e},{:.3e},{:.3e}",
                r.order, r.sbp, r.consistency, r.exactness
            );
        }
        s
    }

    pub fn projection_csv(&self) -> String {
        let mut s = String::from(
            "fine_order,coarse_order,sub_edges,compatibility_residual,constant_residual\n",
        );
        for r in &self.projections {
            let _ = writeln!(
                s,
                "{},{},{},{:.3e},{:.3e}",
                r.fine_order, r.coarse_order, r.sub_edges, r.compatibility, r.constants
            );
        }
        s
    }
}

// ------------------------------------------------------------- convergence

pub fn vortex_state(x: f64, y: f64, t: f64) -> [f64; 4] {
    Euler::primitive_to_conserved(&vortex_solution(x, y, t))
}

/// Euler discretization on the three-region mesh over `[0, 10]²` with the
/// vortex as Dirichlet data.
pub fn vortex_discretization(
    level: usize,
    orders: [usize; 3],
    coupling: Coupling,
) -> Result<SemiDiscretization<Euler, 4>, ExperimentError> {
    let domain = Domain::new(0.0, 10.0, 0.0, 10.0)?;
    let mesh = build_three_region_mesh(
        level,
        orders,
        domain,
        BoundaryConditions::uniform(BoundaryKind::Dirichlet),
    )?;
    Ok(SemiDiscretization::new(Euler, Arc::new(mesh), coupling)?
        .with_boundary_state(Arc::new(vortex_state)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceLevel {
    pub level: usize,
    pub dofs: usize,
    pub steps: usize,
    pub l2: f64,
    pub per_variable: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub orders: [usize; 3],
    pub coupling: Coupling,
    pub levels: Vec<ConvergenceLevel>,
    pub table: Option<EocTable>,
    /// Level and message of a failed solve.
    pub failure: Option<(usize, String)>,
}

/// Reference errors at matching DOF counts for the two order triples that
/// have published values, keyed by DOFS.
pub fn reference_errors(orders: [usize; 3]) -> &'static [(usize, f64)] {
    match orders {
        [2, 3, 2] => &[
            (544, 1.90e-1),
            (2176, 3.06e-2),
            (8704, 4.28e-3),
            (34816, 8.44e-4),
            (139264, 1.80e-4),
        ],
        [3, 4, 3] => &[
            (912, 2.55e-2),
            (3648, 2.02e-3),
            (14592, 1.81e-4),
            (58368, 1.98e-5),
            (233472, 2.28e-6),
        ],
        _ => &[],
    }
}

/// Expected band of the final EOC for the two published order triples.
pub fn eoc_band(orders: [usize; 3]) -> Option<(f64, f64)> {
    match orders {
        [2, 3, 2] => Some((2.0, 3.0)),
        [3, 4, 3] => Some((3.0, 4.0)),
        _ => None,
    }
}

pub fn convergence(
    orders: [usize; 3],
    levels: std::ops::RangeInclusive<usize>,
    coupling: Coupling,
    cfl: f64,
    t_end: f64,
) -> Result<ConvergenceReport, ExperimentError> {
    let mut out = Vec::new();
    let mut failure = None;
    for level in levels {
        let sd = vortex_discretization(level, orders, coupling)?;
        let mut u = sd.project(|x, y| Euler::primitive_to_conserved(&vortex_initial(x, y)))?;
        let options = IntegrateOptions {
            t_end,
            cfl,
            observe_every: usize::MAX,
        };
        match integrate(&sd, &mut u, 0.0, options, |_, _, _| Ok(())) {
            Ok(run) => {
                let (l2, per_variable) =
                    diagnostics::l2_error(&sd, &u, |x, y| vortex_state(x, y, t_end));
                out.push(ConvergenceLevel {
                    level,
                    dofs: sd.mesh().dofs(4),
                    steps: run.steps,
                    l2,
                    per_variable,
                });
            }
            Err(e) => {
                failure = Some((level, e.to_string()));
                break;
            }
        }
    }
    let samples: Vec<(usize, f64)> = out.iter().map(|l| (l.dofs, l.l2)).collect();
    let table = if samples.is_empty() {
        None
    } else {
        Some(EocTable::new(&samples)?)
    };
    Ok(ConvergenceReport {
        orders,
        coupling,
        levels: out,
        table,
        failure,
    })
}

impl ConvergenceReport {
    pub fn checks(&self) -> Vec<Check> {
        let mut out = vec![Check::new(
            "all levels completed",
            self.failure.is_none(),
            match &self.failure {
                Some((level, msg)) => format!("level {level}: {msg}"),
                None => format!("{} levels", self.levels.len()),
            },
        )];
        if let (Some((lo, hi)), Some(eoc)) = (
            eoc_band(self.orders),
            self.table.as_ref().and_then(EocTable::last_eoc),
        ) {
            out.push(Check::new(
                format!("final EOC in [{lo}, {hi}]"),
                (lo..=hi).contains(&eoc),
                format!("{eoc:.3}"),
            ));
        }
        if let Some(last) = self.levels.last() {
            if let Some(&(_, reference)) = reference_errors(self.orders)
                .iter()
                .find(|(d, _)| *d == last.dofs)
            {
                let ratio = last.l2 / reference;
                out.push(Check::new(
                    format!("L2 within 2x of reference at {} DOFS", last.dofs),
                    (0.5..=2.0).contains(&ratio),
                    format!("{:.3e} vs {:.3e} (ratio {ratio:.1})", last.l2, reference),
                ));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,dofs,steps,l2,eoc,l2_rho,l2_rhou,l2_rhov,l2_energy\n");
        for (k, l) in self.levels.iter().enumerate() {
            let eoc = self
                .table
                .as_ref()
                .and_then(|t| t.rows[k].eoc)
                .map(|e| format!("{e:.4}"))
                .unwrap_or_default();
            let _ = write!(s, "{},{},{},{:.6e},{}", l.level, l.dofs, l.steps, l.l2, eoc);
            for v in l.per_variable {
                let _ = write!(s, ",{v:.6e}");
            }
            s.push('\n');
        }
        s
    }
}

// ---------------------------------------------------------- entropy ensemble

pub const ENSEMBLE_TOL: f64 = 1e-11;

/// Periodic unit square, three-region mesh.
pub fn unit_discretization(
    level: usize,
    orders: [usize; 3],
    coupling: Coupling,
) -> Result<SemiDiscretization<Euler, 4>, ExperimentError> {
    let mesh = build_three_region_mesh(
        level,
        orders,
        Domain::unit(),
        BoundaryConditions::uniform(BoundaryKind::Periodic),
    )?;
    Ok(SemiDiscretization::new(Euler, Arc::new(mesh), coupling)?)
}

pub fn split_field(
    sd: &SemiDiscretization<Euler, 4>,
    ic: &DiagonalSplit,
) -> Result<Field<4>, DgError> {
    sd.project(|x, y| Euler::primitive_to_conserved(&ic.at(x, y)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSample {
    pub seed: u64,
    /// `None` when the residual could not be evaluated, which happens for
    /// the mortar coupling when an interpolated mortar state loses
    /// positivity.
    pub growth: Option<GrowthReport<4>>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleReport {
    pub coupling: Coupling,
    pub samples: Vec<EnsembleSample>,
}

/// Growth rates for `trials` random diagonal-jump states. Samples that
/// cannot be evaluated are recorded and replaced by further seeds, up to
/// four times the requested number of draws.
pub fn entropy_ensemble(
    level: usize,
    orders: [usize; 3],
    coupling: Coupling,
    trials: usize,
    seed: u64,
) -> Result<EnsembleReport, ExperimentError> {
    let sd = unit_discretization(level, orders, coupling)?;
    let mut samples: Vec<EnsembleSample> = Vec::new();
    let mut next = 0u64;
    let budget = 4 * trials as u64;
    while samples.iter().filter(|s| s.growth.is_some()).count() < trials && next < budget {
        let missing = trials - samples.iter().filter(|s| s.growth.is_some()).count();
        let batch: Vec<u64> = (next..(next + missing as u64).min(budget))
            .map(|k| seed.wrapping_add(k))
            .collect();
        next += batch.len() as u64;
        let results = batch
            .par_iter()
            .map(|&s| {
                let u = split_field(&sd, &random_discontinuous_ic(s))?;
                Ok(match diagnostics::growth(&sd, &u, 0.0) {
                    Ok(g) => EnsembleSample {
                        seed: s,
                        growth: Some(g),
                        failure: None,
                    },
                    Err(e) => EnsembleSample {
                        seed: s,
                        growth: None,
                        failure: Some(e.to_string()),
                    },
                })
            })
            .collect::<Result<Vec<_>, DgError>>()?;
        samples.extend(results);
    }
    Ok(EnsembleReport { coupling, samples })
}

impl EnsembleReport {
    pub fn evaluated(&self) -> Vec<GrowthReport<4>> {
        self.samples.iter().filter_map(|s| s.growth).collect()
    }

    pub fn failures(&self) -> usize {
        self.samples.iter().filter(|s| s.growth.is_none()).count()
    }

    pub fn rms(&self) -> GrowthReport<4> {
        diagnostics::rms(&self.evaluated())
    }

    pub fn max_entropy_growth(&self) -> f64 {
        self.evaluated()
            .iter()
            .map(|g| g.entropy)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn checks(&self) -> Vec<Check> {
        let rms = self.rms();
        let primary = rms.primary.iter().fold(0.0f64, |m, v| m.max(*v));
        let mut out = vec![Check::new(
            "primary growth RMS < 1e-11",
            primary < ENSEMBLE_TOL,
            format!(
                "{:.2e} {:.2e} {:.2e} {:.2e}",
                rms.primary[0], rms.primary[1], rms.primary[2], rms.primary[3]
            ),
        )];
        let n = self.evaluated().len();
        match self.coupling {
            Coupling::Ec => out.push(Check::new(
                "entropy growth RMS < 1e-11",
                rms.entropy < ENSEMBLE_TOL,
                format!("{:.2e} over {n} samples", rms.entropy),
            )),
            Coupling::Es => out.push(Check::new(
                "entropy growth <= 0 in every sample",
                self.max_entropy_growth() <= 1e-13,
                format!("max {:.2e} over {n} samples", self.max_entropy_growth()),
            )),
            Coupling::Mortar | Coupling::MortarDissipative => out.push(Check::new(
                "entropy growth RMS > 1e-4",
                rms.entropy > 1e-4,
                format!(
                    "{:.2e} over {n} samples, {} not evaluable",
                    rms.entropy,
                    self.failures()
                ),
            )),
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("seed,primary_growth_0,primary_growth_1,primary_growth_2,primary_growth_3,entropy_growth,status\n");
        for x in &self.samples {
            match (&x.growth, &x.failure) {
                (Some(g), _) => {
                    let _ = writeln!(
                        s,
                        "{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},ok",
                        x.seed, g.primary[0], g.primary[1], g.primary[2], g.primary[3], g.entropy
                    );
                }
                (None, f) => {
                    let _ = writeln!(
                        s,
                        "{},,,,,,\"{}\"",
                        x.seed,
                        f.as_deref().unwrap_or("failed").replace('"', "'")
                    );
                }
            }
        }
        s
    }
}

// ------------------------------------------------------------------ long run

#[derive(Debug, Clone, PartialEq)]
pub struct Crash {
    pub t: f64,
    pub step: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LongRunReport<const M: usize> {
    pub coupling: Coupling,
    pub t_end: f64,
    pub samples: Vec<TimeSample<M>>,
    pub steps: usize,
    pub crash: Option<Crash>,
}

/// Relative drift of the total entropy allowed for the conservative
/// coupling, and the time before which the mortar coupling must fail.
pub const ENTROPY_DRIFT_TOL: f64 = 1e-6;
pub const MORTAR_CRASH_BEFORE: f64 = 5.0;

impl<const M: usize> LongRunReport<M> {
    pub fn max_relative_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else {
            return 0.0;
        };
        let s0 = first.total_entropy;
        self.samples
            .iter()
            .map(|s| ((s.total_entropy - s0) / s0.abs().max(f64::MIN_POSITIVE)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest increase of the total entropy between consecutive samples.
    pub fn max_increase(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[1].total_entropy - w[0].total_entropy)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn checks(&self) -> Vec<Check> {
        let finished = match &self.crash {
            Some(c) => format!("failed at t = {:.4} (step {}): {}", c.t, c.step, c.message),
            None => format!("reached t = {} in {} steps", self.t_end, self.steps),
        };
        match self.coupling {
            Coupling::Ec => vec![
                Check::new("completes", self.crash.is_none(), finished),
                Check::new(
                    "entropy drift < 1e-6",
                    self.crash.is_none() && self.max_relative_drift() < ENTROPY_DRIFT_TOL,
                    format!("{:.2e}", self.max_relative_drift()),
                ),
            ],
            Coupling::Es => vec![
                Check::new("completes", self.crash.is_none(), finished),
                Check::new(
                    "total entropy non-increasing",
                    self.crash.is_none() && self.max_increase() <= 0.0,
                    format!("largest increase {:.2e}", self.max_increase()),
                ),
            ],
            Coupling::Mortar | Coupling::MortarDissipative => vec![Check::new(
                format!("fails before t = {MORTAR_CRASH_BEFORE}"),
                self.crash
                    .as_ref()
                    .is_some_and(|c| c.t < MORTAR_CRASH_BEFORE),
                finished,
            )],
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = diagnostics::time_series_csv(&self.samples);
        if let Some(c) = &self.crash {
            let _ = writeln!(
                s,
                "# failed at t = {} (step {}): {}",
                c.t, c.step, c.message
            );
        }
        s
    }
}

/// Integrates and records total entropy and growth rates every
/// `observe_every` steps. A solver failure ends the run and is returned
/// as data.
pub fn observed_run<L: ConservationLaw<M>, const M: usize>(
    sd: &SemiDiscretization<L, M>,
    u: &mut Field<M>,
    t_end: f64,
    cfl: f64,
    observe_every: usize,
) -> Result<LongRunReport<M>, ExperimentError> {
    let mut samples = Vec::new();
    let options = IntegrateOptions {
        t_end,
        cfl,
        observe_every,
    };
    let result = integrate(sd, u, 0.0, options, |step, t, f| {
        samples.push(TimeSample {
            step,
            t,
            total_entropy: diagnostics::total_entropy(sd, f)?,
            growth: diagnostics::growth(sd, f, t)?,
        });
        Ok(())
    });
    let (steps, crash) = match result {
        Ok(run) => (run.steps, None),
        Err(TimeError::Step {
            step, t, source, ..
        }) => (
            step,
            Some(Crash {
                t,
                step,
                message: source.to_string(),
            }),
        ),
        Err(e) => return Err(e.into()),
    };
    Ok(LongRunReport {
        coupling: sd.coupling(),
        t_end,
        samples,
        steps,
        crash,
    })
}

/// The near-stationary diagonal jump on the periodic unit square.
pub fn long_run(
    level: usize,
    orders: [usize; 3],
    coupling: Coupling,
    t_end: f64,
    cfl: f64,
    observe_every: usize,
) -> Result<LongRunReport<4>, ExperimentError> {
    let sd = unit_discretization(level, orders, coupling)?;
    let mut u = split_field(&sd, &DiagonalSplit::preset())?;
    observed_run(&sd, &mut u, t_end, cfl, observe_every)
}

// ----------------------------------------------------------- generic runs

/// Result of [`run_config`]: the time series and the final nodal field.
#[derive(Debug, Clone)]
pub enum RunOutput {
    Euler {
        report: LongRunReport<4>,
        field: Field<4>,
        mesh: Arc<Mesh>,
    },
    Burgers {
        report: LongRunReport<1>,
        field: Field<1>,
        mesh: Arc<Mesh>,
    },
}

impl RunOutput {
    pub fn checks(&self) -> Vec<Check> {
        let crash = match self {
            RunOutput::Euler { report, .. } => &report.crash,
            RunOutput::Burgers { report, .. } => &report.crash,
        };
        vec![Check::new(
            "completes",
            crash.is_none(),
            crash
                .as_ref()
                .map(|c| format!("failed at t = {}: {}", c.t, c.message))
                .unwrap_or_else(|| "ok".into()),
        )]
    }

    pub fn series_csv(&self) -> String {
        match self {
            RunOutput::Euler { report, .. } => report.to_csv(),
            RunOutput::Burgers { report, .. } => report.to_csv(),
        }
    }

    pub fn field_csv(&self) -> String {
        match self {
            RunOutput::Euler { field, mesh, .. } => nodal_csv(mesh, field),
            RunOutput::Burgers { field, mesh, .. } => nodal_csv(mesh, field),
        }
    }
}

/// `element,i,j,x,y,u0,…` for every node.
pub fn nodal_csv<const M: usize>(mesh: &Mesh, field: &Field<M>) -> String {
    let mut s = String::from("element,i,j,x,y");
    for q in 0..M {
        let _ = write!(s, ",u{q}");
    }
    s.push('\n');
    for e in &mesh.elements {
        let Ok(ops) = sbp_operators(e.order) else {
            continue;
        };
        let n = e.order + 1;
        for j in 0..n {
            for i in 0..n {
                let (x, y) = e.map(ops.nodes()[i], ops.nodes()[j]);
                let _ = write!(s, "{},{i},{j},{x:.12e},{y:.12e}", e.id);
                for v in field.at(e.id, i, j) {
                    let _ = write!(s, ",{v:.12e}");
                }
                s.push('\n');
            }
        }
    }
    s
}

/// Runs whatever a [`RunConfig`] describes.
pub fn run_config(config: &RunConfig) -> Result<RunOutput, ExperimentError> {
    config.validate()?;
    let mesh = Arc::new(config.build_mesh()?);
    let coupling: Coupling = config.coupling.into();
    match config.physics {
        PhysicsKind::Euler => {
            let (initial, boundary): (Box<dyn Fn(f64, f64) -> [f64; 4]>, StateFn<4>) =
                match &config.initial {
                    InitialSpec::Vortex => (
                        Box::new(|x, y| vortex_state(x, y, 0.0)),
                        Arc::new(vortex_state),
                    ),
                    InitialSpec::Random { seed } => {
                        let ic = random_discontinuous_ic(*seed);
                        (
                            Box::new(move |x, y| Euler::primitive_to_conserved(&ic.at(x, y))),
                            Arc::new(move |x, y, _| Euler::primitive_to_conserved(&ic.at(x, y))),
                        )
                    }
                    InitialSpec::Preset => {
                        let ic = DiagonalSplit::preset();
                        (
                            Box::new(move |x, y| Euler::primitive_to_conserved(&ic.at(x, y))),
                            Arc::new(move |x, y, _| Euler::primitive_to_conserved(&ic.at(x, y))),
                        )
                    }
                    InitialSpec::Sine { .. } => unreachable!("rejected by validate"),
                };
            let sd = SemiDiscretization::new(Euler, mesh.clone(), coupling)?
                .with_lambda_policy(config.lambda.into())
                .with_boundary_state(boundary);
            let mut u = sd.project(initial)?;
            let report = observed_run(&sd, &mut u, config.t_end, config.cfl, config.observe_every)?;
            Ok(RunOutput::Euler {
                report,
                field: u,
                mesh,
            })
        }
        PhysicsKind::Burgers => {
            let InitialSpec::Sine { mean, amplitude } = config.initial else {
                unreachable!("rejected by validate")
            };
            let d = mesh.domain;
            let period = (d.x[1] - d.x[0]).max(d.y[1] - d.y[0]);
            let state = move |x: f64, y: f64| {
                [mean + amplitude * (2.0 * std::f64::consts::PI * (x + y) / period).sin()]
            };
            let sd = SemiDiscretization::new(Burgers, mesh.clone(), coupling)?
                .with_lambda_policy(config.lambda.into())
                .with_boundary_state(Arc::new(move |x, y, _| state(x, y)));
            let mut u = sd.project(state)?;
            let report = observed_run(&sd, &mut u, config.t_end, config.cfl, config.observe_every)?;
            Ok(RunOutput::Burgers {
                report,
                field: u,
                mesh,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operators_pass_and_corruption_fails() {
        let report = operators_report(6, 4).unwrap();
        assert!(
            all_passed(&report.checks()),
            "{}",
            format_checks(&report.checks())
        );
        let mut ops = (*sbp_operators(4).unwrap()).clone();
        ops.d[(1, 2)] += 1e-6;
        ops.q = &ops.m * &ops.d;
        assert!(!OperatorRow::from_operators(&ops).unwrap().passed());
    }

    #[test]
    fn metadata_block_precedes_header() {
        let csv = with_metadata("a,b\n1,2\n", 0xabc, &[("command", "test".into())]);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# esdg "));
        assert_eq!(lines[1], "# config_hash: 0000000000000abc");
        assert_eq!(lines[2], "# command: test");
        assert_eq!(lines[3], "a,b");
        let checks = [Check::new("x \"y\"", false, "d")];
        assert_eq!(
            checks_csv(&checks),
            "name,passed,detail\n\"x 'y'\",false,\"d\"\n"
        );
    }

    #[test]
    fn eoc_reference_tables() {
        assert_eq!(reference_errors([3, 4, 3])[0], (912, 2.55e-2));
        assert_eq!(eoc_band([2, 3, 2]), Some((2.0, 3.0)));
        assert_eq!(eoc_band([1, 1, 1]), None);
    }

    #[test]
    fn small_ensembles() {
        let ec = entropy_ensemble(2, [2, 3, 2], Coupling::Ec, 4, 11).unwrap();
        assert_eq!(ec.evaluated().len(), 4);
        assert!(all_passed(&ec.checks()), "{}", format_checks(&ec.checks()));
        let es = entropy_ensemble(2, [2, 3, 2], Coupling::Es, 4, 11).unwrap();
        assert!(es.max_entropy_growth() < 0.0);
        assert!(es.to_csv().lines().count() == 5);
    }

    #[test]
    fn short_run_from_config() {
        let mut config = RunConfig::vortex(1, [2, 3, 2]);
        config.t_end = 0.05;
        config.observe_every = 2;
        let out = run_config(&config).unwrap();
        assert!(all_passed(&out.checks()));
        assert!(out.series_csv().starts_with("step,t,total_entropy"));
        assert_eq!(out.field_csv().lines().count(), 1 + 9 + 16 + 9);
    }
}
