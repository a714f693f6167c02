use super::{BoundaryConditions, Domain, Element, Mesh, MeshError};

/// Three-region mesh refined by quadrisection.
///
/// At level 1 region A is the lower half of the domain, B the upper-left
/// quarter and C the upper-right quarter. Each further level splits every
/// element into four. Orders are assigned per region, so `x = mid` in the
/// upper half is p-non-conforming when `p_b ≠ p_c` and `y = mid` always has
/// 2:1 hanging nodes.
pub fn build_three_region_mesh(
    level: usize,
    orders: [usize; 3],
    domain: Domain,
    bc: BoundaryConditions,
) -> Result<Mesh, MeshError> {
    if level == 0 {
        return Err(MeshError::InvalidLevel(level));
    }
    if let Some(&p) = orders.iter().find(|&&p| p == 0) {
        return Err(MeshError::InvalidOrder(p));
    }
    // Coordinates as integers over a common denominator 2^level, so faces
    // shared by neighbours map to bit-identical floats.
    let den = 1usize << level;
    let split = 1usize << (level - 1);
    let half = den / 2;
    // (x0, y0, width, height) in units of 1/den, plus the region order.
    let regions = [
        (0, 0, den, half, orders[0]),
        (0, half, half, half, orders[1]),
        (half, half, half, half, orders[2]),
    ];
    let coord = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * (k as f64 / den as f64);
    let mut elements = Vec::with_capacity(3 * split * split);
    for (x0, y0, w, h, order) in regions {
        let (sw, sh) = (w / split, h / split);
        for j in 0..split {
            for i in 0..split {
                let (ix, iy) = (x0 + i * sw, y0 + j * sh);
                elements.push(Element {
                    id: elements.len(),
                    x: [
                        coord(domain.x[0], domain.x[1], ix),
                        coord(domain.x[0], domain.x[1], ix + sw),
                    ],
                    y: [
                        coord(domain.y[0], domain.y[1], iy),
                        coord(domain.y[0], domain.y[1], iy + sh),
                    ],
                    order,
                });
            }
        }
    }
    Mesh::new(domain, elements, bc)
}

/// Conforming `nx × ny` Cartesian mesh of uniform order.
pub fn build_uniform_mesh(
    nx: usize,
    ny: usize,
    order: usize,
    domain: Domain,
    bc: BoundaryConditions,
) -> Result<Mesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::Empty);
    }
    if order == 0 {
        return Err(MeshError::InvalidOrder(order));
    }
    let at = |lo: f64, hi: f64, k: usize, n: usize| {
        if k == n {
            hi
        } else {
            lo + (hi - lo) * (k as f64 / n as f64)
        }
    };
    let mut elements = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            elements.push(Element {
                id: elements.len(),
                x: [
                    at(domain.x[0], domain.x[1], i, nx),
                    at(domain.x[0], domain.x[1], i + 1, nx),
                ],
                y: [
                    at(domain.y[0], domain.y[1], j, ny),
                    at(domain.y[0], domain.y[1], j + 1, ny),
                ],
                order,
            });
        }
    }
    Mesh::new(domain, elements, bc)
}
