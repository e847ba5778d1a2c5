use super::cell_mesh::{build_indexed, IndexedCellMesh};
use super::mesh::{BoundaryEdge, EdgeTag, Mesh, MeshOrigin};
use super::{CellGeometry, DomainSpec};
use crate::{Error, Point, Result};

/// Triangulation of the perforated domain: the cell mesh scaled by ε and
/// translated over the `L/ε x L/ε` lattice of cells covering `(0, L)^2`.
///
/// Interface vertices are merged through their background grid index, so
/// shared vertices are identified exactly. The outer boundary is tagged
/// `EXTERIOR_DIRICHLET`, every hole boundary `OBSTACLE`.
pub fn build_perforated_mesh(domain: &DomainSpec, cell: &CellGeometry, m: usize) -> Result<Mesh> {
    let indexed = build_indexed(cell, m)?;
    tile(domain, &indexed, m)
}

/// Structured mesh of `(0, L)^2` with `divisions` squares per side and the
/// same diagonal pattern as the cell mesher.
pub fn build_square_mesh(side_length: f64, divisions: usize) -> Result<Mesh> {
    let domain = DomainSpec::new(side_length, side_length)?;
    build_perforated_mesh(&domain, &CellGeometry::empty(), divisions)
}

fn tile(domain: &DomainSpec, cell: &IndexedCellMesh, m: usize) -> Result<Mesh> {
    let n = domain.cells_per_side();
    let side = domain.side_length();
    let eps = side / n as f64;
    let nm = n * m;
    let cm = &cell.mesh;
    let stride = nm + 1;

    let mut global_id = vec![usize::MAX; stride * stride];
    for ky in 0..n {
        for kx in 0..n {
            for &(i, j) in cell.grid_node.iter().flatten() {
                global_id[(ky * m + j) * stride + kx * m + i] = 0;
            }
        }
    }
    let mut vertices: Vec<Point> = Vec::new();
    for jj in 0..stride {
        for ii in 0..stride {
            let k = jj * stride + ii;
            if global_id[k] == 0 {
                global_id[k] = vertices.len();
                vertices.push([side * ii as f64 / nm as f64, side * jj as f64 / nm as f64]);
            }
        }
    }

    let extra: Vec<usize> = (0..cm.num_vertices())
        .filter(|&v| cell.grid_node[v].is_none())
        .collect();
    let mut triangles = Vec::with_capacity(n * n * cm.num_triangles());
    let mut boundary_edges = Vec::new();
    let mut local = vec![0usize; cm.num_vertices()];
    for ky in 0..n {
        for kx in 0..n {
            for (v, g) in cell.grid_node.iter().enumerate() {
                if let Some((i, j)) = *g {
                    local[v] = global_id[(ky * m + j) * stride + kx * m + i];
                }
            }
            for &v in &extra {
                let p = cm.vertices()[v];
                local[v] = vertices.len();
                vertices.push([
                    eps * (p[0] + kx as f64 + 0.5),
                    eps * (p[1] + ky as f64 + 0.5),
                ]);
            }
            triangles.extend(cm.triangles().iter().map(|t| t.map(|v| local[v])));
            for e in cm.boundary_edges() {
                let [a, b] = e.vertices;
                match e.tag {
                    EdgeTag::Obstacle => boundary_edges.push(BoundaryEdge {
                        vertices: [local[a], local[b]],
                        tag: EdgeTag::Obstacle,
                    }),
                    EdgeTag::PeriodicMaster | EdgeTag::PeriodicSlave => {
                        let (ga, gb) = (
                            global_node(cell, a, kx, ky, m),
                            global_node(cell, b, kx, ky, m),
                        );
                        let outer =
                            |f: fn((usize, usize)) -> usize, at: usize| f(ga) == at && f(gb) == at;
                        let on_boundary = outer(|g| g.0, 0)
                            || outer(|g| g.0, nm)
                            || outer(|g| g.1, 0)
                            || outer(|g| g.1, nm);
                        if on_boundary {
                            boundary_edges.push(BoundaryEdge {
                                vertices: [local[a], local[b]],
                                tag: EdgeTag::ExteriorDirichlet,
                            });
                        }
                    }
                    EdgeTag::ExteriorDirichlet => {
                        return Err(Error::Geometry("cell mesh carries a Dirichlet edge".into()))
                    }
                }
            }
        }
    }
    let origin = MeshOrigin {
        subdivisions: m,
        obstacle: cm.origin().map(|o| o.obstacle.clone()).unwrap_or_default(),
    };
    Ok(Mesh::from_parts(vertices, triangles, boundary_edges, Vec::new())?.with_origin(origin))
}

fn global_node(cell: &IndexedCellMesh, v: usize, kx: usize, ky: usize, m: usize) -> (usize, usize) {
    let (i, j) = cell.grid_node[v].expect("periodic edges join grid nodes");
    (kx * m + i, ky * m + j)
}
