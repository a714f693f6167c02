//! Rectangular meshes with hanging nodes and mixed polynomial orders.

mod build;
mod io;

pub use build::{build_three_region_mesh, build_uniform_mesh};
pub use io::{read_mesh, write_mesh};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::physics::Axis;
use crate::projection::InterfaceGeometry;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("refinement level must be at least 1, got {0}")]
    InvalidLevel(usize),
    #[error("polynomial order must be at least 1, got {0}")]
    InvalidOrder(usize),
    #[error("element count must be positive")]
    Empty,
    #[error("element at position {position} has id {id}")]
    IdMismatch { position: usize, id: usize },
    #[error("domain [{0}, {1}] x [{2}, {3}] is degenerate")]
    Domain(f64, f64, f64, f64),
    #[error("invalid mesh: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("mesh file line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Domain {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self, MeshError> {
        if !(x1 > x0 && y1 > y0) {
            return Err(MeshError::Domain(x0, x1, y0, y1));
        }
        Ok(Self {
            x: [x0, x1],
            y: [y0, y1],
        })
    }

    pub fn unit() -> Self {
        Self {
            x: [0.0, 1.0],
            y: [0.0, 1.0],
        }
    }

    pub fn area(&self) -> f64 {
        (self.x[1] - self.x[0]) * (self.y[1] - self.y[0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Periodic,
    /// Weakly imposed exact solution.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryConditions {
    pub west: BoundaryKind,
    pub east: BoundaryKind,
    pub south: BoundaryKind,
    pub north: BoundaryKind,
}

impl BoundaryConditions {
    pub fn uniform(kind: BoundaryKind) -> Self {
        Self {
            west: kind,
            east: kind,
            south: kind,
            north: kind,
        }
    }

    pub fn periodic_x(&self) -> bool {
        self.west == BoundaryKind::Periodic && self.east == BoundaryKind::Periodic
    }

    pub fn periodic_y(&self) -> bool {
        self.south == BoundaryKind::Periodic && self.north == BoundaryKind::Periodic
    }

    pub fn get(&self, face: Face) -> BoundaryKind {
        match face {
            Face::West => self.west,
            Face::East => self.east,
            Face::South => self.south,
            Face::North => self.north,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Face {
    West,
    East,
    South,
    North,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::West, Face::East, Face::South, Face::North];

    pub fn axis(self) -> Axis {
        match self {
            Face::West | Face::East => Axis::X,
            Face::South | Face::North => Axis::Y,
        }
    }

    /// Outward normal sign along the face axis.
    pub fn sign(self) -> f64 {
        match self {
            Face::West | Face::South => -1.0,
            Face::East | Face::North => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Face::West => "west",
            Face::East => "east",
            Face::South => "south",
            Face::North => "north",
        }
    }
}

/// Which side of an interface an element lies on, relative to the normal
/// axis. The minus element touches the interface with its east (north) face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn opposite(self) -> Self {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }

    pub fn face(self, axis: Axis) -> Face {
        match (axis, self) {
            (Axis::X, Side::Minus) => Face::East,
            (Axis::X, Side::Plus) => Face::West,
            (Axis::Y, Side::Minus) => Face::North,
            (Axis::Y, Side::Plus) => Face::South,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub id: usize,
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub order: usize,
}

impl Element {
    pub fn dx(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn dy(&self) -> f64 {
        self.y[1] - self.y[0]
    }

    /// `J = Δx Δy / 4`.
    pub fn jacobian(&self) -> f64 {
        0.25 * self.dx() * self.dy()
    }

    pub fn area(&self) -> f64 {
        self.dx() * self.dy()
    }

    /// Physical point for reference coordinates in `[-1, 1]²`.
    pub fn map(&self, xi: f64, eta: f64) -> (f64, f64) {
        (
            self.x[0] + 0.5 * (xi + 1.0) * self.dx(),
            self.y[0] + 0.5 * (eta + 1.0) * self.dy(),
        )
    }

    /// Extent of a face (the edge length).
    pub fn face_extent(&self, face: Face) -> f64 {
        match face.axis() {
            Axis::X => self.dy(),
            Axis::Y => self.dx(),
        }
    }

    fn face_range(&self, face: Face) -> [f64; 2] {
        match face.axis() {
            Axis::X => self.y,
            Axis::Y => self.x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InterfaceKind {
    Conforming,
    PNonconforming,
    HNonconforming,
}

impl InterfaceKind {
    pub fn name(self) -> &'static str {
        match self {
            InterfaceKind::Conforming => "conforming",
            InterfaceKind::PNonconforming => "p-nonconforming",
            InterfaceKind::HNonconforming => "h-nonconforming",
        }
    }
}

/// A coarse edge `R` and the fine edges `L_1 … L_E` tiling it. For
/// one-to-one interfaces the higher order side plays `L`; between equal
/// orders the lower element id does.
#[derive(Debug, Clone, PartialEq)]
pub struct Interface {
    pub kind: InterfaceKind,
    /// Normal direction.
    pub axis: Axis,
    pub coarse: usize,
    pub fine: Vec<usize>,
    pub coarse_side: Side,
    pub geometry: InterfaceGeometry,
    pub periodic: bool,
}

impl Interface {
    pub fn fine_side(&self) -> Side {
        self.coarse_side.opposite()
    }

    pub fn coarse_face(&self) -> Face {
        self.coarse_side.face(self.axis)
    }

    pub fn fine_face(&self) -> Face {
        self.fine_side().face(self.axis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryFace {
    pub element: usize,
    pub face: Face,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub domain: Domain,
    pub elements: Vec<Element>,
    pub interfaces: Vec<Interface>,
    pub boundary: Vec<BoundaryFace>,
    pub bc: BoundaryConditions,
}

struct FaceRecord {
    element: usize,
    side: Side,
    range: [f64; 2],
    wrapped: bool,
}

impl Mesh {
    /// Infer the topology and reject meshes that violate any invariant.
    pub fn new(
        domain: Domain,
        elements: Vec<Element>,
        bc: BoundaryConditions,
    ) -> Result<Self, MeshError> {
        if elements.is_empty() {
            return Err(MeshError::Empty);
        }
        for (position, e) in elements.iter().enumerate() {
            if e.id != position {
                return Err(MeshError::IdMismatch { position, id: e.id });
            }
            if e.order == 0 {
                return Err(MeshError::InvalidOrder(0));
            }
        }
        let mesh = Self::assemble(domain, elements, bc);
        let problems = validate_mesh(&mesh);
        if problems.is_empty() {
            Ok(mesh)
        } else {
            Err(MeshError::Invalid(problems))
        }
    }

    /// Infer interfaces and boundary faces without validating. Faces that
    /// cannot be matched are left uncovered for [`validate_mesh`] to report.
    pub fn assemble(domain: Domain, elements: Vec<Element>, bc: BoundaryConditions) -> Self {
        let mut interfaces = Vec::new();
        let mut boundary = Vec::new();
        for axis in [Axis::X, Axis::Y] {
            let (lo, hi, periodic) = match axis {
                Axis::X => (domain.x[0], domain.x[1], bc.periodic_x()),
                Axis::Y => (domain.y[0], domain.y[1], bc.periodic_y()),
            };
            let mut lines: BTreeMap<u64, Vec<FaceRecord>> = BTreeMap::new();
            for e in &elements {
                let bounds = match axis {
                    Axis::X => e.x,
                    Axis::Y => e.y,
                };
                for (side, coordinate) in [(Side::Plus, bounds[0]), (Side::Minus, bounds[1])] {
                    let face = side.face(axis);
                    let on_boundary = coordinate == lo || coordinate == hi;
                    if on_boundary && !periodic {
                        boundary.push(BoundaryFace {
                            element: e.id,
                            face,
                        });
                        continue;
                    }
                    let wrapped = periodic && coordinate == hi;
                    let key = if wrapped { lo } else { coordinate };
                    lines.entry(key.to_bits()).or_default().push(FaceRecord {
                        element: e.id,
                        side,
                        range: e.face_range(face),
                        wrapped,
                    });
                }
            }
            for faces in lines.into_values() {
                match_line(axis, faces, &elements, &mut interfaces);
            }
        }
        Self {
            domain,
            elements,
            interfaces,
            boundary,
            bc,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Number of nodal values times the number of conserved variables.
    pub fn dofs(&self, n_vars: usize) -> usize {
        n_vars
            * self
                .elements
                .iter()
                .map(|e| (e.order + 1) * (e.order + 1))
                .sum::<usize>()
    }

    pub fn max_order(&self) -> usize {
        self.elements.iter().map(|e| e.order).max().unwrap_or(0)
    }

    pub fn count(&self, kind: InterfaceKind) -> usize {
        self.interfaces.iter().filter(|i| i.kind == kind).count()
    }
}

fn match_line(
    axis: Axis,
    mut faces: Vec<FaceRecord>,
    elements: &[Element],
    out: &mut Vec<Interface>,
) {
    faces.sort_by(|a, b| {
        a.range[0]
            .total_cmp(&b.range[0])
            .then(a.element.cmp(&b.element))
    });
    let mut start = 0;
    while start < faces.len() {
        let mut end = start + 1;
        let mut reach = faces[start].range[1];
        while end < faces.len() && faces[end].range[0] < reach {
            reach = reach.max(faces[end].range[1]);
            end += 1;
        }
        if let Some(interface) = classify(axis, &faces[start..end], elements) {
            out.push(interface);
        }
        start = end;
    }
}

fn classify(axis: Axis, cluster: &[FaceRecord], elements: &[Element]) -> Option<Interface> {
    let minus: Vec<&FaceRecord> = cluster.iter().filter(|f| f.side == Side::Minus).collect();
    let plus: Vec<&FaceRecord> = cluster.iter().filter(|f| f.side == Side::Plus).collect();
    let (coarse, fine) = match (minus.len(), plus.len()) {
        (1, n) if n >= 1 && tiles(minus[0], &plus) => (minus[0], plus),
        (n, 1) if n > 1 && tiles(plus[0], &minus) => (plus[0], minus),
        _ => return None,
    };
    let periodic = cluster.iter().any(|f| f.wrapped);
    let extent = coarse.range[1] - coarse.range[0];
    if fine.len() == 1 {
        let other = fine[0];
        let (no, nc) = (
            elements[other.element].order,
            elements[coarse.element].order,
        );
        let other_is_l = match no.cmp(&nc) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => {
                other.element < coarse.element
                    || (other.element == coarse.element && other.side == Side::Minus)
            }
        };
        let (l, r) = if other_is_l {
            (other, coarse)
        } else {
            (coarse, other)
        };
        let (nl, nr) = (elements[l.element].order, elements[r.element].order);
        return Some(Interface {
            kind: if nl == nr {
                InterfaceKind::Conforming
            } else {
                InterfaceKind::PNonconforming
            },
            axis,
            coarse: r.element,
            fine: vec![l.element],
            coarse_side: r.side,
            geometry: InterfaceGeometry::matching(nl, nr, extent),
            periodic,
        });
    }
    Some(Interface {
        kind: InterfaceKind::HNonconforming,
        axis,
        coarse: coarse.element,
        fine: fine.iter().map(|f| f.element).collect(),
        coarse_side: coarse.side,
        geometry: InterfaceGeometry {
            coarse_order: elements[coarse.element].order,
            coarse_extent: extent,
            fine_orders: fine.iter().map(|f| elements[f.element].order).collect(),
            fine_extents: fine.iter().map(|f| f.range[1] - f.range[0]).collect(),
            fine_offsets: fine.iter().map(|f| f.range[0] - coarse.range[0]).collect(),
        },
        periodic,
    })
}

fn tiles(coarse: &FaceRecord, fine: &[&FaceRecord]) -> bool {
    let tol = 1e-12 * (coarse.range[1] - coarse.range[0]).abs();
    let mut cursor = coarse.range[0];
    for f in fine {
        if (f.range[0] - cursor).abs() > tol {
            return false;
        }
        cursor = f.range[1];
    }
    (cursor - coarse.range[1]).abs() <= tol
}

/// Every violated topology invariant, one message each. Empty means valid.
pub fn validate_mesh(mesh: &Mesh) -> Vec<String> {
    let mut problems = Vec::new();
    let n = mesh.elements.len();
    for (position, e) in mesh.elements.iter().enumerate() {
        if e.id != position {
            problems.push(format!("element at position {position} has id {}", e.id));
        }
        if !(e.dx() > 0.0 && e.dy() > 0.0) {
            problems.push(format!("element {} has non-positive extent", e.id));
        }
        if e.order == 0 {
            problems.push(format!("element {} has order 0", e.id));
        }
        if e.x[0] < mesh.domain.x[0]
            || e.x[1] > mesh.domain.x[1]
            || e.y[0] < mesh.domain.y[0]
            || e.y[1] > mesh.domain.y[1]
        {
            problems.push(format!("element {} leaves the domain", e.id));
        }
    }
    if mesh.bc.west == BoundaryKind::Periodic && mesh.bc.east != BoundaryKind::Periodic
        || mesh.bc.east == BoundaryKind::Periodic && mesh.bc.west != BoundaryKind::Periodic
        || mesh.bc.south == BoundaryKind::Periodic && mesh.bc.north != BoundaryKind::Periodic
        || mesh.bc.north == BoundaryKind::Periodic && mesh.bc.south != BoundaryKind::Periodic
    {
        problems.push("periodic boundaries must come in opposite pairs".into());
    }
    if !problems.is_empty() {
        return problems;
    }

    let mut coverage = vec![[0usize; 4]; n];
    let slot = |f: Face| f as usize;
    for b in &mesh.boundary {
        coverage[b.element][slot(b.face)] += 1;
    }
    for (k, iface) in mesh.interfaces.iter().enumerate() {
        coverage[iface.coarse][slot(iface.coarse_face())] += 1;
        for &f in &iface.fine {
            coverage[f][slot(iface.fine_face())] += 1;
        }
        if let Err(e) = iface.geometry.validate() {
            problems.push(format!("interface {k}: {e}"));
        }
        let g = &iface.geometry;
        let coarse = &mesh.elements[iface.coarse];
        if g.coarse_order != coarse.order
            || g.coarse_extent != coarse.face_extent(iface.coarse_face())
        {
            problems.push(format!(
                "interface {k}: coarse geometry disagrees with element {}",
                coarse.id
            ));
        }
        for (i, &f) in iface.fine.iter().enumerate() {
            let e = &mesh.elements[f];
            if g.fine_orders.get(i) != Some(&e.order)
                || g.fine_extents.get(i) != Some(&e.face_extent(iface.fine_face()))
            {
                problems.push(format!(
                    "interface {k}: fine geometry disagrees with element {f}"
                ));
            }
        }
        let same_extent = g.fine_extents.len() == 1 && g.fine_extents[0] == g.coarse_extent;
        let expected = if !same_extent {
            InterfaceKind::HNonconforming
        } else if g.fine_orders[0] == g.coarse_order {
            InterfaceKind::Conforming
        } else {
            InterfaceKind::PNonconforming
        };
        if iface.kind != expected {
            problems.push(format!(
                "interface {k}: classified {} but geometry says {}",
                iface.kind.name(),
                expected.name()
            ));
        }
    }
    for (e, counts) in coverage.iter().enumerate() {
        for face in Face::ALL {
            match counts[slot(face)] {
                1 => {}
                0 => problems.push(format!("element {e} {} face is not covered", face.name())),
                c => problems.push(format!(
                    "element {e} {} face is covered {c} times",
                    face.name()
                )),
            }
        }
    }

    let area: f64 = mesh.elements.iter().map(Element::area).sum();
    if (area - mesh.domain.area()).abs() > 1e-12 * mesh.domain.area() {
        problems.push(format!(
            "elements cover area {area}, domain has {}",
            mesh.domain.area()
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| mesh.elements[a].x[0].total_cmp(&mesh.elements[b].x[0]));
    for (p, &a) in order.iter().enumerate() {
        let ea = &mesh.elements[a];
        for &b in &order[p + 1..] {
            let eb = &mesh.elements[b];
            if eb.x[0] >= ea.x[1] {
                break;
            }
            let w = ea.x[1].min(eb.x[1]) - ea.x[0].max(eb.x[0]);
            let h = ea.y[1].min(eb.y[1]) - ea.y[0].max(eb.y[0]);
            if w > 0.0 && h > 0.0 {
                problems.push(format!(
                    "elements {} and {} overlap",
                    ea.id.min(eb.id),
                    ea.id.max(eb.id)
                ));
            }
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(id: usize, x0: f64, x1: f64, y0: f64, y1: f64, order: usize) -> Element {
        Element {
            id,
            x: [x0, x1],
            y: [y0, y1],
            order,
        }
    }

    #[test]
    fn element_metrics() {
        let e = rect(0, 1.0, 3.0, 0.0, 0.5, 2);
        assert_eq!(e.jacobian(), 0.25);
        assert_eq!(e.map(0.0, 1.0), (2.0, 0.5));
        assert_eq!(e.face_extent(Face::East), 0.5);
        assert_eq!(e.face_extent(Face::North), 2.0);
    }

    #[test]
    fn hanging_node_pair() {
        let elements = vec![
            rect(0, 0.0, 1.0, 0.0, 2.0, 3),
            rect(1, 1.0, 2.0, 0.0, 1.0, 2),
            rect(2, 1.0, 2.0, 1.0, 2.0, 4),
        ];
        let mesh = Mesh::new(
            Domain::new(0.0, 2.0, 0.0, 2.0).unwrap(),
            elements,
            BoundaryConditions::uniform(BoundaryKind::Dirichlet),
        )
        .unwrap();
        assert_eq!(mesh.interfaces.len(), 2);
        let h = mesh
            .interfaces
            .iter()
            .find(|i| i.kind == InterfaceKind::HNonconforming)
            .unwrap();
        assert_eq!(h.coarse, 0);
        assert_eq!(h.fine, vec![1, 2]);
        assert_eq!(h.coarse_side, Side::Minus);
        assert_eq!(h.geometry.fine_offsets, vec![0.0, 1.0]);
        let p = mesh
            .interfaces
            .iter()
            .find(|i| i.kind == InterfaceKind::PNonconforming)
            .unwrap();
        assert_eq!(
            (p.fine[0], p.coarse, p.axis, p.coarse_side),
            (2, 1, Axis::Y, Side::Minus)
        );
        assert_eq!(mesh.boundary.len(), 7);
    }

    #[test]
    fn gap_is_reported() {
        let elements = vec![
            rect(0, 0.0, 1.0, 0.0, 1.0, 1),
            rect(1, 1.5, 2.0, 0.0, 1.0, 1),
        ];
        let mesh = Mesh::assemble(
            Domain::new(0.0, 2.0, 0.0, 1.0).unwrap(),
            elements,
            BoundaryConditions::uniform(BoundaryKind::Dirichlet),
        );
        let problems = validate_mesh(&mesh);
        assert!(
            problems
                .iter()
                .any(|p| p.contains("element 0 east face is not covered")),
            "{problems:?}"
        );
        assert!(problems.iter().any(|p| p.contains("area")));
    }

    #[test]
    fn overlap_is_reported() {
        let elements = vec![
            rect(0, 0.0, 1.0, 0.0, 1.0, 1),
            rect(1, 0.5, 1.0, 0.0, 1.0, 1),
            rect(2, 0.0, 0.5, 0.0, 1.0, 1),
        ];
        let mesh = Mesh::assemble(
            Domain::unit(),
            elements,
            BoundaryConditions::uniform(BoundaryKind::Dirichlet),
        );
        let problems = validate_mesh(&mesh);
        assert!(
            problems.iter().any(|p| p == "elements 0 and 1 overlap"),
            "{problems:?}"
        );
    }

    #[test]
    fn unpaired_periodicity_is_reported() {
        let mut bc = BoundaryConditions::uniform(BoundaryKind::Periodic);
        bc.north = BoundaryKind::Dirichlet;
        let err = Mesh::new(Domain::unit(), vec![rect(0, 0.0, 1.0, 0.0, 1.0, 2)], bc).unwrap_err();
        assert!(matches!(err, MeshError::Invalid(_)));
    }

    #[test]
    fn ids_must_match_positions() {
        let err = Mesh::new(
            Domain::unit(),
            vec![rect(3, 0.0, 1.0, 0.0, 1.0, 2)],
            BoundaryConditions::uniform(BoundaryKind::Dirichlet),
        )
        .unwrap_err();
        assert_eq!(err, MeshError::IdMismatch { position: 0, id: 3 });
    }
}
