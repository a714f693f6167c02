use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use esdg_core::config::{fnv1a, ConfigError, CouplingKind, InitialSpec, MeshSpec, RunConfig};
use esdg_core::dg::Coupling;
use esdg_core::experiments::{
    self, all_passed, checks_csv, format_checks, with_metadata, Check, ExperimentError,
};
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("cannot start the worker pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Parser)]
#[command(
    name = "esdg",
    version,
    about = "Entropy stable h/p non-conforming DGSEM experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for CSV files (default: `out`, or the `output` of
    /// the configuration for `run`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CouplingArg {
    Ec,
    Es,
    Mortar,
    MortarDiss,
}

impl From<CouplingArg> for Coupling {
    fn from(c: CouplingArg) -> Self {
        match c {
            CouplingArg::Ec => Coupling::Ec,
            CouplingArg::Es => Coupling::Es,
            CouplingArg::Mortar => Coupling::Mortar,
            CouplingArg::MortarDiss => Coupling::MortarDissipative,
        }
    }
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    coupling: Option<CouplingArg>,
    /// Mesh level (the finest level for `convergence`).
    #[arg(long)]
    level: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// SBP and projection operator identities.
    Operators {
        #[arg(long, default_value_t = 10)]
        max_order: usize,
        #[arg(long, default_value_t = 8)]
        max_projection_order: usize,
    },
    /// Vortex convergence study on the three-region mesh.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        min_level: usize,
    },
    /// Instantaneous growth rates over random discontinuous states.
    EntropyConservation {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Diagonal jump on the periodic unit square, total entropy over time.
    LongRun {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Whatever the configuration file describes.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(common: &Common, default: RunConfig) -> Result<RunConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => RunConfig::from_path(path)?,
        None => default,
    };
    if let Some(c) = common.coupling {
        config.coupling = CouplingKind::from(Coupling::from(c));
    }
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if let Some(l) = common.level {
        match &mut config.mesh {
            MeshSpec::ThreeRegion { level, .. } => *level = l,
            _ => return Err(CliError::Usage("--level needs a three_region mesh".into())),
        }
    }
    config.validate()?;
    Ok(config)
}

fn three_region(config: &RunConfig) -> Result<(usize, [usize; 3]), CliError> {
    match config.mesh {
        MeshSpec::ThreeRegion { level, orders, .. } => Ok((level, orders)),
        _ => Err(CliError::Usage(
            "this command needs a three_region mesh".into(),
        )),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.into(),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|source| CliError::Write {
        path: path.clone(),
        source,
    })?;
    println!("wrote {}", path.display());
    Ok(())
}

struct Output<'a> {
    dir: &'a Path,
    command: &'static str,
    hash: u64,
}

impl Output<'_> {
    fn csv(&self, name: &str, body: &str) -> Result<(), CliError> {
        write(
            self.dir,
            name,
            &with_metadata(body, self.hash, &[("command", self.command.into())]),
        )
    }

    fn finish(&self, checks: &[Check]) -> Result<bool, CliError> {
        print!("{}", format_checks(checks));
        self.csv(&format!("{}_checks.csv", self.command), &checks_csv(checks))?;
        let ok = all_passed(checks);
        println!(
            "{}: {}",
            self.command,
            if ok {
                "all checks passed"
            } else {
                "some checks failed"
            }
        );
        Ok(ok)
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let default_out = PathBuf::from("out");
    let dir = cli.out.as_deref().unwrap_or(&default_out);
    match cli.command {
        Command::Operators {
            max_order,
            max_projection_order,
        } => {
            let out = Output {
                dir,
                command: "operators",
                hash: fnv1a(&format!("operators {max_order} {max_projection_order}")),
            };
            let report = experiments::operators_report(max_order, max_projection_order)?;
            out.csv("sbp_operators.csv", &report.sbp_csv())?;
            out.csv("projections.csv", &report.projection_csv())?;
            out.finish(&report.checks())
        }
        Command::Convergence { common, min_level } => {
            let config = load(&common, RunConfig::vortex(5, [3, 4, 3]))?;
            if config.initial != InitialSpec::Vortex {
                return Err(CliError::Usage(
                    "convergence needs the vortex initial condition".into(),
                ));
            }
            let (level, orders) = three_region(&config)?;
            if min_level == 0 || min_level > level {
                return Err(CliError::Usage(format!(
                    "--min-level must be in 1..={level}"
                )));
            }
            let out = Output {
                dir,
                command: "convergence",
                hash: config.hash(),
            };
            let coupling = config.coupling.into();
            let report = experiments::convergence(
                orders,
                min_level..=level,
                coupling,
                config.cfl,
                config.t_end,
            )?;
            let name = format!(
                "convergence_{}{}{}_{}.csv",
                orders[0], orders[1], orders[2], coupling
            );
            out.csv(&name, &report.to_csv())?;
            out.finish(&report.checks())
        }
        Command::EntropyConservation { common, trials } => {
            let config = load(&common, default_ensemble())?;
            let (level, orders) = three_region(&config)?;
            let out = Output {
                dir,
                command: "entropy-conservation",
                hash: fnv1a(&format!("{} {trials}", config.hash())),
            };
            let coupling: Coupling = config.coupling.into();
            let report =
                experiments::entropy_ensemble(level, orders, coupling, trials, config.seed)?;
            out.csv(&format!("entropy_{coupling}.csv"), &report.to_csv())?;
            out.finish(&report.checks())
        }
        Command::LongRun { common, t_end } => {
            let mut config = load(&common, RunConfig::long_run(Coupling::Es))?;
            if let Some(t) = t_end {
                config.t_end = t;
                config.validate()?;
            }
            let (level, orders) = three_region(&config)?;
            let out = Output {
                dir,
                command: "long-run",
                hash: config.hash(),
            };
            let coupling: Coupling = config.coupling.into();
            let report = experiments::long_run(
                level,
                orders,
                coupling,
                config.t_end,
                config.cfl,
                config.observe_every,
            )?;
            out.csv(&format!("long_run_{coupling}.csv"), &report.to_csv())?;
            out.finish(&report.checks())
        }
        Command::Run { config } => {
            let config = RunConfig::from_path(&config)?;
            let out = Output {
                dir: cli.out.as_deref().unwrap_or(&config.output),
                command: "run",
                hash: config.hash(),
            };
            let result = experiments::run_config(&config)?;
            out.csv("series.csv", &result.series_csv())?;
            out.csv("field.csv", &result.field_csv())?;
            out.finish(&result.checks())
        }
    }
}

fn default_ensemble() -> RunConfig {
    let mut config = RunConfig::long_run(Coupling::Ec);
    config.seed = 5000;
    config.initial = InitialSpec::Random { seed: 5000 };
    config
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common(coupling: Option<CouplingArg>, level: Option<usize>) -> Common {
        Common {
            config: None,
            coupling,
            level,
            seed: Some(42),
        }
    }

    #[test]
    fn flags_override_the_default_config() {
        let config = load(
            &common(Some(CouplingArg::MortarDiss), Some(2)),
            RunConfig::long_run(Coupling::Es),
        )
        .unwrap();
        assert_eq!(Coupling::from(config.coupling), Coupling::MortarDissipative);
        assert_eq!(config.seed, 42);
        assert_eq!(three_region(&config).unwrap(), (2, [3, 4, 3]));
    }

    #[test]
    fn invalid_overrides_are_rejected() {
        assert!(load(&common(None, Some(0)), RunConfig::long_run(Coupling::Es)).is_err());
        let mut uniform = RunConfig::long_run(Coupling::Es);
        uniform.mesh = MeshSpec::Uniform {
            nx: 2,
            ny: 2,
            order: 2,
            domain: [0.0, 1.0, 0.0, 1.0],
            boundary: esdg_core::config::BoundaryChoice::Periodic,
        };
        assert!(matches!(
            load(&common(None, Some(2)), uniform.clone()),
            Err(CliError::Usage(_))
        ));
        assert!(three_region(&uniform).is_err());
    }

    #[test]
    fn command_line_parses() {
        let cli = Cli::try_parse_from([
            "esdg",
            "entropy-conservation",
            "--coupling",
            "mortar-diss",
            "--trials",
            "7",
        ])
        .unwrap();
        assert!(matches!(
            cli.command,
            Command::EntropyConservation { trials: 7, .. }
        ));
        assert!(Cli::try_parse_from(["esdg", "long-run", "--coupling", "llf"]).is_err());
    }

    #[test]
    fn default_ensemble_uses_random_states() {
        let config = default_ensemble();
        assert_eq!(Coupling::from(config.coupling), Coupling::Ec);
        assert!(matches!(config.initial, InitialSpec::Random { .. }));
    }
}
