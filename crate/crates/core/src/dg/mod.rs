//! Split-form DGSEM residual with entropy conservative, entropy stable and
//! mortar interface couplings.
//!
//! The residual `R` satisfies `J (U_t)_ij + R_ij = 0` at every node.

mod field;
mod surface;
mod volume;

pub use field::Field;
pub use surface::InterfaceFluxSet;
pub use volume::volume_terms;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::mesh::{BoundaryKind, Face, Mesh};
use crate::physics::{Axis, ConservationLaw, PhysicsError};
use crate::projection::{ProjectionError, ProjectionPair};
use crate::sbp::{sbp_operators, SbpError, SbpOperators};

pub type SolutionField<const M: usize> = Field<M>;
pub type Residual<const M: usize> = Field<M>;

/// Conserved state as a function of `(x, y, t)`, used for Dirichlet data.
pub type StateFn<const M: usize> = Arc<dyn Fn(f64, f64, f64) -> [f64; M] + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DgError {
    #[error("element {element}, node ({i}, {j}): {source}")]
    Node {
        element: usize,
        i: usize,
        j: usize,
        source: PhysicsError,
    },
    #[error("interface {interface}: {source}")]
    Interface {
        interface: usize,
        source: PhysicsError,
    },
    #[error("boundary face {face} of element {element}: {source}")]
    Boundary {
        element: usize,
        face: &'static str,
        source: PhysicsError,
    },
    #[error("non-finite residual in element {element}")]
    NonFinite { element: usize },
    #[error("field shape does not match the mesh")]
    Shape,
    #[error("mesh has Dirichlet boundaries but no boundary data was given")]
    MissingBoundaryData,
    #[error(transparent)]
    Sbp(#[from] SbpError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

impl DgError {
    pub fn physics(&self) -> Option<&PhysicsError> {
        match self {
            DgError::Node { source, .. }
            | DgError::Interface { source, .. }
            | DgError::Boundary { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// How the interface dissipation coefficient is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LambdaPolicy {
    /// One value for the whole interface.
    #[default]
    Interface,
    /// Per node pair on conforming interfaces, per sub-edge on
    /// non-conforming ones.
    Nodewise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coupling {
    /// Entropy conservative.
    Ec,
    /// Entropy stable: EC plus entropy-variable jump dissipation.
    #[default]
    Es,
    /// Classical mortar with the EC flux on the mortar.
    Mortar,
    /// Classical mortar with conserved-variable Lax-Friedrichs dissipation.
    MortarDissipative,
}

impl Coupling {
    pub fn name(self) -> &'static str {
        match self {
            Coupling::Ec => "ec",
            Coupling::Es => "es",
            Coupling::Mortar => "mortar",
            Coupling::MortarDissipative => "mortar-diss",
        }
    }

    pub fn is_mortar(self) -> bool {
        matches!(self, Coupling::Mortar | Coupling::MortarDissipative)
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("unknown coupling `{0}` (expected ec, es, mortar or mortar-diss)")]
pub struct UnknownCoupling(pub String);

impl FromStr for Coupling {
    type Err = UnknownCoupling;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ec" => Ok(Coupling::Ec),
            "es" => Ok(Coupling::Es),
            "mortar" => Ok(Coupling::Mortar),
            "mortar-diss" | "mortar_diss" => Ok(Coupling::MortarDissipative),
            other => Err(UnknownCoupling(other.to_string())),
        }
    }
}

/// Where an element face gets its numerical flux from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FaceLink {
    Coarse(usize),
    Fine(usize, usize),
    Boundary(usize),
}

/// Precomputed coupling operators of one interface.
#[derive(Debug, Clone)]
enum Coupler {
    Conforming,
    Projected(Arc<Vec<ProjectionPair>>),
    Mortar(Vec<MortarSegment>),
}

/// One mortar per fine sub-edge.
#[derive(Debug, Clone)]
struct MortarSegment {
    /// `to_fine` restricts the coarse trace to the mortar, `to_coarse`
    /// returns mortar fluxes (with the extent ratio).
    coarse: ProjectionPair,
    /// `to_coarse` interpolates the fine trace to the mortar, `to_fine`
    /// projects mortar fluxes back.
    fine: Arc<ProjectionPair>,
}

/// A mesh, a conservation law and a coupling, with all operators built.
pub struct SemiDiscretization<L: ConservationLaw<M>, const M: usize> {
    law: L,
    mesh: Arc<Mesh>,
    coupling: Coupling,
    lambda: LambdaPolicy,
    ops: Vec<Arc<SbpOperators>>,
    couplers: Vec<Coupler>,
    links: Vec<[FaceLink; 4]>,
    boundary_state: Option<StateFn<M>>,
}

impl<L: ConservationLaw<M>, const M: usize> fmt::Debug for SemiDiscretization<L, M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemiDiscretization")
            .field("law", &self.law.name())
            .field("elements", &self.mesh.len())
            .field("interfaces", &self.mesh.interfaces.len())
            .field("coupling", &self.coupling)
            .field("lambda", &self.lambda)
            .finish()
    }
}

fn face_slot(face: Face) -> usize {
    face as usize
}

impl<L: ConservationLaw<M>, const M: usize> SemiDiscretization<L, M> {
    pub fn new(law: L, mesh: Arc<Mesh>, coupling: Coupling) -> Result<Self, DgError> {
        let ops = mesh
            .elements
            .iter()
            .map(|e| sbp_operators(e.order))
            .collect::<Result<Vec<_>, _>>()?;
        let mut links = vec![[FaceLink::Boundary(usize::MAX); 4]; mesh.len()];
        for (b, face) in mesh.boundary.iter().enumerate() {
            links[face.element][face_slot(face.face)] = FaceLink::Boundary(b);
        }
        let mut couplers = Vec::with_capacity(mesh.interfaces.len());
        for (k, iface) in mesh.interfaces.iter().enumerate() {
            links[iface.coarse][face_slot(iface.coarse_face())] = FaceLink::Coarse(k);
            for (i, &f) in iface.fine.iter().enumerate() {
                links[f][face_slot(iface.fine_face())] = FaceLink::Fine(k, i);
            }
            couplers.push(Self::build_coupler(iface, coupling)?);
        }
        Ok(Self {
            law,
            mesh,
            coupling,
            lambda: LambdaPolicy::default(),
            ops,
            couplers,
            links,
            boundary_state: None,
        })
    }

    fn build_coupler(
        iface: &crate::mesh::Interface,
        coupling: Coupling,
    ) -> Result<Coupler, DgError> {
        use crate::mesh::InterfaceKind;
        use crate::projection::{h_pairs, p_pair};
        let g = &iface.geometry;
        if iface.kind == InterfaceKind::Conforming {
            return Ok(Coupler::Conforming);
        }
        if coupling.is_mortar() {
            let mut mortar_geometry = g.clone();
            for n in mortar_geometry.fine_orders.iter_mut() {
                *n = (*n).max(g.coarse_order);
            }
            let coarse = h_pairs(&mortar_geometry)?;
            let segments = g
                .fine_orders
                .iter()
                .zip(coarse.iter())
                .map(|(&n, c)| {
                    Ok(MortarSegment {
                        coarse: c.clone(),
                        fine: p_pair(n, n.max(g.coarse_order))?,
                    })
                })
                .collect::<Result<Vec<_>, DgError>>()?;
            return Ok(Coupler::Mortar(segments));
        }
        let pairs = match iface.kind {
            InterfaceKind::PNonconforming => {
                Arc::new(vec![(*p_pair(g.fine_orders[0], g.coarse_order)?).clone()])
            }
            _ => h_pairs(g)?,
        };
        Ok(Coupler::Projected(pairs))
    }

    /// Dirichlet data for the non-periodic boundary faces.
    pub fn with_boundary_state(mut self, state: StateFn<M>) -> Self {
        self.boundary_state = Some(state);
        self
    }

    pub fn with_lambda_policy(mut self, policy: LambdaPolicy) -> Self {
        self.lambda = policy;
        self
    }

    pub fn law(&self) -> &L {
        &self.law
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn lambda_policy(&self) -> LambdaPolicy {
        self.lambda
    }

    pub fn operators(&self, element: usize) -> &SbpOperators {
        &self.ops[element]
    }

    pub fn zeros(&self) -> Field<M> {
        Field::zeros(&self.mesh)
    }

    /// Samples a conserved-state function at every node.
    pub fn project(&self, f: impl Fn(f64, f64) -> [f64; M]) -> Result<Field<M>, DgError> {
        Ok(Field::from_fn(&self.mesh, f)?)
    }

    /// Node caches for every element, checking admissibility.
    pub fn nodes(&self, u: &Field<M>) -> Result<Vec<Vec<L::Node>>, DgError> {
        if u.element_count() != self.mesh.len()
            || u.orders()
                .iter()
                .zip(&self.mesh.elements)
                .any(|(&n, e)| n != e.order)
        {
            return Err(DgError::Shape);
        }
        (0..self.mesh.len())
            .into_par_iter()
            .map(|k| {
                let n = u.order(k) + 1;
                u.element(k)
                    .iter()
                    .enumerate()
                    .map(|(idx, q)| {
                        self.law.node(q).map_err(|source| DgError::Node {
                            element: k,
                            i: idx % n,
                            j: idx / n,
                            source,
                        })
                    })
                    .collect()
            })
            .collect()
    }

    pub fn residual(&self, u: &Field<M>, t: f64) -> Result<Residual<M>, DgError> {
        let mut out = self.zeros();
        self.residual_into(u, t, &mut out)?;
        Ok(out)
    }

    /// Two phases: all interface and boundary fluxes, then per-element
    /// volume and surface terms.
    pub fn residual_into(
        &self,
        u: &Field<M>,
        t: f64,
        out: &mut Residual<M>,
    ) -> Result<(), DgError> {
        if !out.same_shape(u) {
            return Err(DgError::Shape);
        }
        let nodes = self.nodes(u)?;
        let interface_fluxes = (0..self.mesh.interfaces.len())
            .into_par_iter()
            .map(|k| self.interface_fluxes_with(k, u, &nodes))
            .collect::<Result<Vec<_>, _>>()?;
        let boundary_fluxes = (0..self.mesh.boundary.len())
            .into_par_iter()
            .map(|b| self.boundary_flux(b, u, &nodes, t))
            .collect::<Result<Vec<_>, _>>()?;

        out.elements_mut()
            .into_par_iter()
            .enumerate()
            .try_for_each(|(k, r)| {
                self.element_residual(k, &nodes[k], &interface_fluxes, &boundary_fluxes, r);
                if r.iter().flatten().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(DgError::NonFinite { element: k })
                }
            })
    }

    /// `U_t = -R / J` at every node.
    pub fn time_derivative_into(
        &self,
        u: &Field<M>,
        t: f64,
        out: &mut Field<M>,
    ) -> Result<(), DgError> {
        self.residual_into(u, t, out)?;
        for (k, r) in out.elements_mut().into_iter().enumerate() {
            let inv = -1.0 / self.mesh.elements[k].jacobian();
            for v in r.iter_mut().flatten() {
                *v *= inv;
            }
        }
        Ok(())
    }

    fn element_residual(
        &self,
        k: usize,
        nodes: &[L::Node],
        interface_fluxes: &[InterfaceFluxSet<M>],
        boundary_fluxes: &[Vec<[f64; M]>],
        r: &mut [[f64; M]],
    ) {
        let e = &self.mesh.elements[k];
        let ops = &self.ops[k];
        volume_terms(&self.law, ops, e.dx(), e.dy(), nodes, r);
        let n = e.order + 1;
        let w = ops.weights();
        for face in Face::ALL {
            let star: &[[f64; M]] = match self.links[k][face_slot(face)] {
                FaceLink::Coarse(i) => &interface_fluxes[i].coarse,
                FaceLink::Fine(i, s) => &interface_fluxes[i].fine[s],
                FaceLink::Boundary(b) => &boundary_fluxes[b],
            };
            let axis = face.axis();
            let scale = 0.5 * e.face_extent(face);
            let (edge, weight) = match face {
                Face::West | Face::South => (0, w[0]),
                Face::East | Face::North => (n - 1, w[n - 1]),
            };
            let factor = face.sign() / weight;
            for (s, fs) in star.iter().enumerate() {
                let idx = match axis {
                    Axis::X => edge + n * s,
                    Axis::Y => s + n * edge,
                };
                let f = self.law.flux(&nodes[idx], axis);
                for q in 0..M {
                    r[idx][q] += factor * (fs[q] - scale * f[q]);
                }
            }
        }
    }

    /// Node indices of a face, ordered along the edge.
    pub fn face_indices(&self, element: usize, face: Face) -> Vec<usize> {
        let n = self.mesh.elements[element].order + 1;
        (0..n)
            .map(|s| match face {
                Face::West => n * s,
                Face::East => n - 1 + n * s,
                Face::South => s,
                Face::North => s + n * (n - 1),
            })
            .collect()
    }

    /// Numerical fluxes of one interface for the current coupling.
    pub fn interface_fluxes(&self, k: usize, u: &Field<M>) -> Result<InterfaceFluxSet<M>, DgError> {
        let nodes = self.nodes(u)?;
        self.interface_fluxes_with(k, u, &nodes)
    }

    fn boundary_flux(
        &self,
        b: usize,
        u: &Field<M>,
        nodes: &[Vec<L::Node>],
        t: f64,
    ) -> Result<Vec<[f64; M]>, DgError> {
        let face = self.mesh.boundary[b];
        let e = &self.mesh.elements[face.element];
        debug_assert_eq!(self.mesh.bc.get(face.face), BoundaryKind::Dirichlet);
        let state = self
            .boundary_state
            .as_ref()
            .ok_or(DgError::MissingBoundaryData)?;
        let rule = &self.ops[face.element].rule;
        let idx = self.face_indices(face.element, face.face);
        let err = |source| DgError::Boundary {
            element: face.element,
            face: face.face.name(),
            source,
        };
        let inside: Vec<L::Node> = idx.iter().map(|&i| nodes[face.element][i]).collect();
        let ghost = rule
            .nodes
            .iter()
            .map(|&s| {
                let (x, y) = match face.face {
                    Face::West => e.map(-1.0, s),
                    Face::East => e.map(1.0, s),
                    Face::South => e.map(s, -1.0),
                    Face::North => e.map(s, 1.0),
                };
                self.law.node(&state(x, y, t)).map_err(err)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let inside_states: Vec<[f64; M]> =
            idx.iter().map(|&i| u.element(face.element)[i]).collect();
        let ghost_states: Vec<[f64; M]> = ghost.iter().map(|g| self.law.conserved(g)).collect();
        let (minus, plus, minus_q, plus_q) = match face.face.sign() > 0.0 {
            true => (&inside, &ghost, &inside_states, &ghost_states),
            false => (&ghost, &inside, &ghost_states, &inside_states),
        };
        let mut flux = self.conforming_flux(face.face.axis(), minus, plus, minus_q, plus_q);
        let scale = 0.5 * e.face_extent(face.face);
        for f in flux.iter_mut() {
            for v in f.iter_mut() {
                *v *= scale;
            }
        }
        Ok(flux)
    }
}
