//! Plain text mesh description.
//!
//! ```text
//! domain <x0> <x1> <y0> <y1>
//! boundary <west> <east> <south> <north>
//! element <id> <xmin> <xmax> <ymin> <ymax> <order>
//! ```
//!
//! Boundary kinds are `periodic` or `dirichlet`. Blank lines and lines
//! starting with `#` are ignored. Interfaces are always inferred.

use std::fmt::Write as _;

use super::{BoundaryConditions, BoundaryKind, Domain, Element, Mesh, MeshError};

pub fn write_mesh(mesh: &Mesh) -> String {
    let kind = |k: BoundaryKind| match k {
        BoundaryKind::Periodic => "periodic",
        BoundaryKind::Dirichlet => "dirichlet",
    };
    let d = &mesh.domain;
    let b = &mesh.bc;
    let mut s = String::new();
    let _ = writeln!(s, "domain {} {} {} {}", d.x[0], d.x[1], d.y[0], d.y[1]);
    let _ = writeln!(
        s,
        "boundary {} {} {} {}",
        kind(b.west),
        kind(b.east),
        kind(b.south),
        kind(b.north)
    );
    for e in &mesh.elements {
        let _ = writeln!(
            s,
            "element {} {} {} {} {} {}",
            e.id, e.x[0], e.x[1], e.y[0], e.y[1], e.order
        );
    }
    s
}

pub fn read_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut domain = None;
    let mut bc = None;
    let mut elements = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let err = |message: String| MeshError::Parse { line, message };
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let mut fields = content.split_whitespace();
        let record = fields.next().unwrap_or_default();
        let rest: Vec<&str> = fields.collect();
        let floats = |expected: usize| -> Result<Vec<f64>, MeshError> {
            if rest.len() != expected {
                return Err(err(format!(
                    "`{record}` takes {expected} fields, found {}",
                    rest.len()
                )));
            }
            rest.iter()
                .map(|t| t.parse::<f64>().map_err(|e| err(format!("`{t}`: {e}"))))
                .collect()
        };
        match record {
            "domain" => {
                let v = floats(4)?;
                domain = Some(Domain::new(v[0], v[1], v[2], v[3])?);
            }
            "boundary" => {
                if rest.len() != 4 {
                    return Err(err(format!(
                        "`boundary` takes 4 fields, found {}",
                        rest.len()
                    )));
                }
                let mut kinds = [BoundaryKind::Periodic; 4];
                for (k, t) in kinds.iter_mut().zip(&rest) {
                    *k = match *t {
                        "periodic" => BoundaryKind::Periodic,
                        "dirichlet" => BoundaryKind::Dirichlet,
                        other => return Err(err(format!("unknown boundary kind `{other}`"))),
                    };
                }
                bc = Some(BoundaryConditions {
                    west: kinds[0],
                    east: kinds[1],
                    south: kinds[2],
                    north: kinds[3],
                });
            }
            "element" => {
                if rest.len() != 6 {
                    return Err(err(format!(
                        "`element` takes 6 fields, found {}",
                        rest.len()
                    )));
                }
                let int = |t: &str| t.parse::<usize>().map_err(|e| err(format!("`{t}`: {e}")));
                let float = |t: &str| t.parse::<f64>().map_err(|e| err(format!("`{t}`: {e}")));
                elements.push(Element {
                    id: int(rest[0])?,
                    x: [float(rest[1])?, float(rest[2])?],
                    y: [float(rest[3])?, float(rest[4])?],
                    order: int(rest[5])?,
                });
            }
            other => return Err(err(format!("unknown record `{other}`"))),
        }
    }
    let domain = domain.ok_or(MeshError::Parse {
        line: 0,
        message: "missing `domain` record".into(),
    })?;
    let bc = bc.unwrap_or(BoundaryConditions::uniform(BoundaryKind::Periodic));
    Mesh::new(domain, elements, bc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_three_region_mesh;

    #[test]
    fn round_trip() {
        let mut bc = BoundaryConditions::uniform(BoundaryKind::Periodic);
        bc.west = BoundaryKind::Dirichlet;
        bc.east = BoundaryKind::Dirichlet;
        let mesh =
            build_three_region_mesh(3, [2, 3, 2], Domain::new(0.0, 10.0, 0.0, 10.0).unwrap(), bc)
                .unwrap();
        let text = write_mesh(&mesh);
        let back = read_mesh(&text).unwrap();
        assert_eq!(back, mesh);
        assert_eq!(write_mesh(&back), text);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let text = "domain 0 1 0 1\n\nelement 0 0 1 0 x 2\n";
        match read_mesh(text) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            read_mesh("boundary periodic periodic periodic open\n"),
            Err(MeshError::Parse { line: 1, .. })
        ));
        assert!(read_mesh("# nothing\n").is_err());
    }
}
