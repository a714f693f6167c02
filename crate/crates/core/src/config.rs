//! Run configuration read from TOML.
//!
//! ```toml
//! physics = "euler"
//! coupling = "es"
//! cfl = 0.2
//! t_end = 1.0
//!
//! [mesh]
//! kind = "three_region"
//! level = 2
//! orders = [3, 4, 3]
//! domain = [0.0, 10.0, 0.0, 10.0]
//! boundary = "dirichlet"
//!
//! [initial]
//! kind = "vortex"
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dg::{Coupling, LambdaPolicy};
use crate::mesh::{
    build_three_region_mesh, build_uniform_mesh, read_mesh, BoundaryConditions, BoundaryKind,
    Domain, Mesh, MeshError,
};
use crate::physics::GAMMA;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("config serialization: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhysicsKind {
    Euler,
    Burgers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingKind {
    Ec,
    Es,
    Mortar,
    MortarDiss,
}

impl From<CouplingKind> for Coupling {
    fn from(c: CouplingKind) -> Self {
        match c {
            CouplingKind::Ec => Coupling::Ec,
            CouplingKind::Es => Coupling::Es,
            CouplingKind::Mortar => Coupling::Mortar,
            CouplingKind::MortarDiss => Coupling::MortarDissipative,
        }
    }
}

impl From<Coupling> for CouplingKind {
    fn from(c: Coupling) -> Self {
        match c {
            Coupling::Ec => CouplingKind::Ec,
            Coupling::Es => CouplingKind::Es,
            Coupling::Mortar => CouplingKind::Mortar,
            Coupling::MortarDissipative => CouplingKind::MortarDiss,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaKind {
    Interface,
    Nodewise,
}

impl From<LambdaKind> for LambdaPolicy {
    fn from(l: LambdaKind) -> Self {
        match l {
            LambdaKind::Interface => LambdaPolicy::Interface,
            LambdaKind::Nodewise => LambdaPolicy::Nodewise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryChoice {
    Periodic,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSpec {
    ThreeRegion {
        level: usize,
        orders: [usize; 3],
        domain: [f64; 4],
        boundary: BoundaryChoice,
    },
    Uniform {
        nx: usize,
        ny: usize,
        order: usize,
        domain: [f64; 4],
        boundary: BoundaryChoice,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialSpec {
    /// Isentropic vortex, also used as Dirichlet data.
    Vortex,
    /// Two random constant states split by the diagonal.
    Random { seed: u64 },
    /// The fixed near-stationary diagonal jump.
    Preset,
    /// Burgers: `u = mean + amplitude sin(2π (x + y) / L)` on the domain.
    Sine { mean: f64, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub physics: PhysicsKind,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub coupling: CouplingKind,
    #[serde(default = "default_lambda")]
    pub lambda: LambdaKind,
    pub cfl: f64,
    pub t_end: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cadence")]
    pub observe_every: usize,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub mesh: MeshSpec,
    pub initial: InitialSpec,
}

fn default_gamma() -> f64 {
    GAMMA
}

fn default_lambda() -> LambdaKind {
    LambdaKind::Interface
}

fn default_cadence() -> usize {
    100
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// 64-bit FNV-1a.
pub fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf29ce484222325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100000001b3)
    })
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

fn domain_of(d: [f64; 4]) -> Result<Domain, ConfigError> {
    Domain::new(d[0], d[1], d[2], d[3]).map_err(|e| invalid(e.to_string()))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    /// Vortex convergence setup on the three-region mesh.
    pub fn vortex(level: usize, orders: [usize; 3]) -> Self {
        Self {
            physics: PhysicsKind::Euler,
            gamma: GAMMA,
            coupling: CouplingKind::Es,
            lambda: LambdaKind::Interface,
            cfl: 0.2,
            t_end: 1.0,
            seed: 0,
            observe_every: default_cadence(),
            output: default_output(),
            mesh: MeshSpec::ThreeRegion {
                level,
                orders,
                domain: [0.0, 10.0, 0.0, 10.0],
                boundary: BoundaryChoice::Dirichlet,
            },
            initial: InitialSpec::Vortex,
        }
    }

    /// Periodic unit square with the diagonal jump.
    pub fn long_run(coupling: Coupling) -> Self {
        Self {
            physics: PhysicsKind::Euler,
            gamma: GAMMA,
            coupling: coupling.into(),
            lambda: LambdaKind::Interface,
            cfl: 0.5,
            t_end: 25.0,
            seed: 0,
            observe_every: 500,
            output: default_output(),
            mesh: MeshSpec::ThreeRegion {
                level: 3,
                orders: [3, 4, 3],
                domain: [0.0, 1.0, 0.0, 1.0],
                boundary: BoundaryChoice::Periodic,
            },
            initial: InitialSpec::Preset,
        }
    }

    /// Checks every field without building anything.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.gamma != GAMMA {
            return Err(invalid(format!(
                "only gamma = {GAMMA} is supported, got {}",
                self.gamma
            )));
        }
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(invalid(format!("cfl must be positive, got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(invalid(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if self.observe_every == 0 {
            return Err(invalid("observe_every must be at least 1"));
        }
        match &self.mesh {
            MeshSpec::ThreeRegion {
                level,
                orders,
                domain,
                ..
            } => {
                if *level == 0 {
                    return Err(invalid("mesh level must be at least 1"));
                }
                if orders.contains(&0) {
                    return Err(invalid("mesh orders must be at least 1"));
                }
                domain_of(*domain)?;
            }
            MeshSpec::Uniform {
                nx,
                ny,
                order,
                domain,
                ..
            } => {
                if *nx == 0 || *ny == 0 || *order == 0 {
                    return Err(invalid("nx, ny and order must be at least 1"));
                }
                domain_of(*domain)?;
            }
            MeshSpec::File { .. } => {}
        }
        let euler_only = matches!(
            self.initial,
            InitialSpec::Vortex | InitialSpec::Random { .. } | InitialSpec::Preset
        );
        match (self.physics, euler_only) {
            (PhysicsKind::Euler, false) => {
                Err(invalid("the sine initial condition is for burgers"))
            }
            (PhysicsKind::Burgers, true) => {
                Err(invalid("burgers only supports the sine initial condition"))
            }
            _ => Ok(()),
        }
    }

    pub fn build_mesh(&self) -> Result<Mesh, ConfigError> {
        let bc = |b: BoundaryChoice| {
            BoundaryConditions::uniform(match b {
                BoundaryChoice::Periodic => BoundaryKind::Periodic,
                BoundaryChoice::Dirichlet => BoundaryKind::Dirichlet,
            })
        };
        Ok(match &self.mesh {
            MeshSpec::ThreeRegion {
                level,
                orders,
                domain,
                boundary,
            } => build_three_region_mesh(*level, *orders, domain_of(*domain)?, bc(*boundary))?,
            MeshSpec::Uniform {
                nx,
                ny,
                order,
                domain,
                boundary,
            } => build_uniform_mesh(*nx, *ny, *order, domain_of(*domain)?, bc(*boundary))?,
            MeshSpec::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                read_mesh(&text)?
            }
        })
    }

    /// Hash of the canonical TOML form.
    pub fn hash(&self) -> u64 {
        fnv1a(&self.to_toml().unwrap_or_default())
    }
}
