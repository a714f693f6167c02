use crate::mesh::Mesh;
use crate::sbp::{lgl_rule, SbpError};

/// Nodal values on every element, stored element by element with node
/// `(i, j)` of an order `N` element at `i + (N + 1) j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<const M: usize> {
    orders: Vec<usize>,
    offsets: Vec<usize>,
    data: Vec<[f64; M]>,
}

impl<const M: usize> Field<M> {
    pub fn zeros(mesh: &Mesh) -> Self {
        Self::with_orders(mesh.elements.iter().map(|e| e.order).collect())
    }

    pub fn with_orders(orders: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(orders.len() + 1);
        offsets.push(0);
        for &n in &orders {
            offsets.push(offsets.last().unwrap() + (n + 1) * (n + 1));
        }
        let data = vec![[0.0; M]; *offsets.last().unwrap()];
        Self {
            orders,
            offsets,
            data,
        }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(mesh: &Mesh, f: impl Fn(f64, f64) -> [f64; M]) -> Result<Self, SbpError> {
        let mut field = Self::zeros(mesh);
        for e in &mesh.elements {
            let nodes = lgl_rule(e.order)?.nodes;
            let n = e.order + 1;
            let values = field.element_mut(e.id);
            for j in 0..n {
                for i in 0..n {
                    let (x, y) = e.map(nodes[i], nodes[j]);
                    values[i + n * j] = f(x, y);
                }
            }
        }
        Ok(field)
    }

    pub fn element_count(&self) -> usize {
        self.orders.len()
    }

    pub fn order(&self, k: usize) -> usize {
        self.orders[k]
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn element(&self, k: usize) -> &[[f64; M]] {
        &self.data[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn element_mut(&mut self, k: usize) -> &mut [[f64; M]] {
        &mut self.data[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn at(&self, k: usize, i: usize, j: usize) -> &[f64; M] {
        &self.element(k)[i + (self.orders[k] + 1) * j]
    }

    pub fn data(&self) -> &[[f64; M]] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [[f64; M]] {
        &mut self.data
    }

    /// Disjoint mutable views, one per element.
    pub fn elements_mut(&mut self) -> Vec<&mut [[f64; M]]> {
        let mut out = Vec::with_capacity(self.orders.len());
        let mut rest = self.data.as_mut_slice();
        for k in 0..self.orders.len() {
            let (head, tail) = rest.split_at_mut(self.offsets[k + 1] - self.offsets[k]);
            out.push(head);
            rest = tail;
        }
        out
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.orders == other.orders
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn fill(&mut self, value: [f64; M]) {
        self.data.fill(value);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_mesh, BoundaryConditions, BoundaryKind, Domain};

    #[test]
    fn layout_and_sampling() {
        let mesh = build_uniform_mesh(
            2,
            1,
            2,
            Domain::unit(),
            BoundaryConditions::uniform(BoundaryKind::Periodic),
        )
        .unwrap();
        let f = Field::<1>::from_fn(&mesh, |x, y| [x + 10.0 * y]).unwrap();
        assert_eq!(f.data().len(), 18);
        assert_eq!(f.at(1, 0, 2)[0], 0.5 + 10.0);
        assert_eq!(f.at(0, 1, 0)[0], 0.25);
        let mut g = f.clone();
        for (k, e) in g.elements_mut().into_iter().enumerate() {
            e[0] = [k as f64];
        }
        assert_eq!(g.element(1)[0], [1.0]);
        assert!(g.same_shape(&f));
        assert_eq!(f.max_abs(), 11.0);
    }
}
