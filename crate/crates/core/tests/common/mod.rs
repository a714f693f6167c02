#![allow(dead_code)]

pub mod oracle;

use std::sync::Arc;

use esdg_core::dg::{Coupling, Field, SemiDiscretization};
use esdg_core::mesh::{BoundaryConditions, BoundaryKind, Domain, Element, Mesh};
use esdg_core::physics::Euler;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_primitive(rng: &mut impl Rng) -> [f64; 4] {
    [
        rng.random_range(0.5..1.5),
        rng.random_range(-0.5..0.5),
        rng.random_range(-0.5..0.5),
        rng.random_range(0.5..1.5),
    ]
}

/// A field with independent random admissible values at every node.
pub fn random_euler_field(mesh: &Mesh, seed: u64) -> Field<4> {
    let mut rng = rng(seed);
    let mut u = Field::zeros(mesh);
    for q in u.data_mut() {
        *q = Euler::primitive_to_conserved(&random_primitive(&mut rng));
    }
    u
}

pub fn rect(id: usize, x: [f64; 2], y: [f64; 2], order: usize) -> Element {
    Element { id, x, y, order }
}

/// One coarse element of order `coarse` on `[0, 1]²` facing `E` fine
/// elements of order `fine` stacked on `[1, 2] × [0, 1]`. With `E = 1`
/// the single interface at `x = 1` is conforming or p-non-conforming.
pub fn single_interface_mesh(coarse: usize, fine: usize, sub_edges: usize) -> Mesh {
    let mut elements = vec![rect(0, [0.0, 1.0], [0.0, 1.0], coarse)];
    for k in 0..sub_edges {
        let y0 = k as f64 / sub_edges as f64;
        let y1 = (k + 1) as f64 / sub_edges as f64;
        elements.push(rect(k + 1, [1.0, 2.0], [y0, y1], fine));
    }
    let domain = Domain::new(0.0, 2.0, 0.0, 1.0).unwrap();
    Mesh::new(
        domain,
        elements,
        BoundaryConditions::uniform(BoundaryKind::Dirichlet),
    )
    .unwrap()
}

/// Index of the interface on the line `x = 1` in [`single_interface_mesh`].
pub fn vertical_interface(mesh: &Mesh) -> usize {
    mesh.interfaces
        .iter()
        .position(|i| i.axis == esdg_core::physics::Axis::X && !i.periodic)
        .expect("interface at x = 1")
}

pub fn euler(mesh: Mesh, coupling: Coupling) -> SemiDiscretization<Euler, 4> {
    SemiDiscretization::new(Euler, Arc::new(mesh), coupling).unwrap()
}
