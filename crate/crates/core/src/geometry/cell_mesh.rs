//! Structured-background mesher for the perforated unit cell.
//!
//! The cell is covered by `m x m` squares, each split in two along a
//! diagonal whose direction alternates in a checkerboard (so the pattern is
//! invariant under the symmetries of the square for even `m`). Squares closer
//! than half a grid spacing to the obstacle are removed and the gap between
//! the resulting staircase and the obstacle polygon is triangulated
//! separately. Outer boundary traces are the untouched grid, so opposite
//! edges match vertex for vertex.

use super::mesh::{BoundaryEdge, EdgeTag, Mesh, MeshOrigin};
use super::primitives::{box_polygon_dist, dist};
use super::triangulate::triangulate_annulus;
use super::CellGeometry;
use crate::{Error, Point, Result};

/// Squares within this many grid spacings of the obstacle are cut out.
const CUT_BUFFER: f64 = 0.5;

/// Cell mesh plus, for each vertex, its background grid node if it has one.
pub(crate) struct IndexedCellMesh {
    pub mesh: Mesh,
    pub grid_node: Vec<Option<(usize, usize)>>,
}

/// Conforming triangulation of the fluid part of the cell with periodic
/// vertex pairing on the outer boundary.
pub fn build_cell_mesh(cell: &CellGeometry, m: usize) -> Result<Mesh> {
    Ok(build_indexed(cell, m)?.mesh)
}

#[inline]
pub(crate) fn grid_coord(i: usize, m: usize) -> f64 {
    (2.0 * i as f64 - m as f64) / (2.0 * m as f64)
}

pub(crate) fn build_indexed(cell: &CellGeometry, m: usize) -> Result<IndexedCellMesh> {
    if m < 2 {
        return Err(Error::Argument(format!(
            "cell subdivision count must be >= 2, got {m}"
        )));
    }
    let h = 1.0 / m as f64;
    let poly: Option<&[Point]> = cell.obstacle().map(|o| o.vertices());
    if let Some(o) = cell.obstacle() {
        if o.clearance() < 2.0 * h - 1e-12 {
            return Err(Error::Geometry(format!(
                "obstacle {} has clearance {} < 2/m = {} for m = {m}",
                o.label(),
                o.clearance(),
                2.0 * h
            )));
        }
    }

    let removed = match poly {
        Some(p) => removed_cells(p, m)?,
        None => vec![false; m * m],
    };
    let cell_removed = |ci: usize, cj: usize| removed[cj * m + ci];

    // Grid nodes touched by at least one kept square.
    let mut node_vertex = vec![usize::MAX; (m + 1) * (m + 1)];
    let mut vertices: Vec<Point> = Vec::new();
    let mut grid_node = Vec::new();
    for j in 0..=m {
        for i in 0..=m {
            let used = [(0, 0), (1, 0), (0, 1), (1, 1)].iter().any(|&(di, dj)| {
                let (ci, cj) = (i as isize - di, j as isize - dj);
                ci >= 0
                    && cj >= 0
                    && (ci as usize) < m
                    && (cj as usize) < m
                    && !cell_removed(ci as usize, cj as usize)
            });
            if used {
                node_vertex[j * (m + 1) + i] = vertices.len();
                vertices.push([grid_coord(i, m), grid_coord(j, m)]);
                grid_node.push(Some((i, j)));
            }
        }
    }
    let nv = |i: usize, j: usize| node_vertex[j * (m + 1) + i];

    let mut triangles = Vec::with_capacity(2 * m * m);
    for cj in 0..m {
        for ci in 0..m {
            if cell_removed(ci, cj) {
                continue;
            }
            let (v00, v10, v11, v01) = (
                nv(ci, cj),
                nv(ci + 1, cj),
                nv(ci + 1, cj + 1),
                nv(ci, cj + 1),
            );
            if (ci + cj) % 2 == 0 {
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            } else {
                triangles.push([v00, v10, v01]);
                triangles.push([v10, v11, v01]);
            }
        }
    }

    let mut boundary_edges = Vec::new();
    for k in 0..m {
        let edges = [
            (nv(k, 0), nv(k + 1, 0), EdgeTag::PeriodicMaster),
            (nv(0, k + 1), nv(0, k), EdgeTag::PeriodicMaster),
            (nv(m, k), nv(m, k + 1), EdgeTag::PeriodicSlave),
            (nv(k + 1, m), nv(k, m), EdgeTag::PeriodicSlave),
        ];
        for (a, b, tag) in edges {
            boundary_edges.push(BoundaryEdge {
                vertices: [a, b],
                tag,
            });
        }
    }

    if let Some(p) = poly {
        let outer: Vec<usize> = staircase_loop(&removed, m)?
            .into_iter()
            .map(|(i, j)| nv(i, j))
            .collect();
        let first_hole = vertices.len();
        for k in 0..p.len() {
            let (a, b) = (p[k], p[(k + 1) % p.len()]);
            let pieces = ((dist(a, b) / h) - 1e-9).ceil().max(1.0) as usize;
            for s in 0..pieces {
                let t = s as f64 / pieces as f64;
                vertices.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        let hole: Vec<usize> = (first_hole..vertices.len()).collect();
        let gap = triangulate_annulus(&mut vertices, &outer, &hole)?;
        triangles.extend(gap);
        // Hole edges, oriented with the fluid on their left.
        for k in 0..hole.len() {
            boundary_edges.push(BoundaryEdge {
                vertices: [hole[(k + 1) % hole.len()], hole[k]],
                tag: EdgeTag::Obstacle,
            });
        }
        grid_node.resize(vertices.len(), None);
    }

    let mut periodic_pairs = Vec::with_capacity(2 * m + 1);
    for k in 1..m {
        periodic_pairs.push((nv(m, k), nv(0, k)));
    }
    for k in 1..m {
        periodic_pairs.push((nv(k, m), nv(k, 0)));
    }
    for (i, j) in [(m, 0), (0, m), (m, m)] {
        periodic_pairs.push((nv(i, j), nv(0, 0)));
    }

    let mesh = Mesh::from_parts(vertices, triangles, boundary_edges, periodic_pairs)?.with_origin(
        MeshOrigin {
            subdivisions: m,
            obstacle: cell.label(),
        },
    );
    Ok(IndexedCellMesh { mesh, grid_node })
}

/// Marks background squares to cut out: those within `CUT_BUFFER * h` of the
/// obstacle, closed under removal of diagonal pinches and of enclosed kept
/// squares.
fn removed_cells(poly: &[Point], m: usize) -> Result<Vec<bool>> {
    let h = 1.0 / m as f64;
    let mut removed = vec![false; m * m];
    for cj in 0..m {
        for ci in 0..m {
            let lo = [grid_coord(ci, m), grid_coord(cj, m)];
            let hi = [grid_coord(ci + 1, m), grid_coord(cj + 1, m)];
            removed[cj * m + ci] = box_polygon_dist(lo, hi, poly) < CUT_BUFFER * h;
        }
    }
    loop {
        let mut changed = false;
        // Two squares meeting only at a corner would pinch the gap boundary.
        for cj in 0..m - 1 {
            for ci in 0..m - 1 {
                let idx = [
                    cj * m + ci,
                    cj * m + ci + 1,
                    (cj + 1) * m + ci,
                    (cj + 1) * m + ci + 1,
                ];
                let [a, b, c, d] = idx.map(|k| removed[k]);
                if (a && d && !b && !c) || (b && c && !a && !d) {
                    for k in idx {
                        removed[k] = true;
                    }
                    changed = true;
                }
            }
        }
        // Kept squares not connected to the cell boundary are enclosed.
        let mut reach = vec![false; m * m];
        let mut stack: Vec<usize> = (0..m * m)
            .filter(|&k| {
                let (ci, cj) = (k % m, k / m);
                (ci == 0 || cj == 0 || ci == m - 1 || cj == m - 1) && !removed[k]
            })
            .collect();
        for &k in &stack {
            reach[k] = true;
        }
        while let Some(k) = stack.pop() {
            let (ci, cj) = (k % m, k / m);
            let mut visit = |n: usize| {
                if !removed[n] && !reach[n] {
                    reach[n] = true;
                    stack.push(n);
                }
            };
            if ci > 0 {
                visit(k - 1);
            }
            if ci + 1 < m {
                visit(k + 1);
            }
            if cj > 0 {
                visit(k - m);
            }
            if cj + 1 < m {
                visit(k + m);
            }
        }
        for k in 0..m * m {
            if !removed[k] && !reach[k] {
                removed[k] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for k in 0..m * m {
        let (ci, cj) = (k % m, k / m);
        if removed[k] && (ci == 0 || cj == 0 || ci == m - 1 || cj == m - 1) {
            return Err(Error::Geometry(
                "obstacle reaches the outermost layer of background squares".into(),
            ));
        }
    }
    // Removed squares must form one 4-connected component.
    let Some(seed) = (0..m * m).find(|&k| removed[k]) else {
        return Err(Error::Geometry(
            "obstacle is too small to cut any background square".into(),
        ));
    };
    let mut seen = vec![false; m * m];
    let mut stack = vec![seed];
    seen[seed] = true;
    let mut count = 1;
    while let Some(k) = stack.pop() {
        let (ci, cj) = (k % m, k / m);
        for n in [
            (ci > 0).then(|| k - 1),
            (ci + 1 < m).then(|| k + 1),
            (cj > 0).then(|| k - m),
            (cj + 1 < m).then(|| k + m),
        ]
        .into_iter()
        .flatten()
        {
            if removed[n] && !seen[n] {
                seen[n] = true;
                count += 1;
                stack.push(n);
            }
        }
    }
    if count != removed.iter().filter(|&&r| r).count() {
        return Err(Error::Geometry(
            "obstacle cuts a disconnected set of background squares; refine the mesh".into(),
        ));
    }
    Ok(removed)
}

/// Counter-clockwise boundary loop of the removed region as grid nodes.
fn staircase_loop(removed: &[bool], m: usize) -> Result<Vec<(usize, usize)>> {
    let is_removed = |ci: isize, cj: isize| {
        ci >= 0
            && cj >= 0
            && (ci as usize) < m
            && (cj as usize) < m
            && removed[cj as usize * m + ci as usize]
    };
    let mut next = std::collections::HashMap::new();
    for cj in 0..m {
        for ci in 0..m {
            if !removed[cj * m + ci] {
                continue;
            }
            let (x, y) = (ci as isize, cj as isize);
            if !is_removed(x, y - 1) {
                next.insert((ci, cj), (ci + 1, cj));
            }
            if !is_removed(x + 1, y) {
                next.insert((ci + 1, cj), (ci + 1, cj + 1));
            }
            if !is_removed(x, y + 1) {
                next.insert((ci + 1, cj + 1), (ci, cj + 1));
            }
            if !is_removed(x - 1, y) {
                next.insert((ci, cj + 1), (ci, cj));
            }
        }
    }
    let start = *next.keys().min().unwrap();
    let mut out = vec![start];
    let mut cur = next[&start];
    while cur != start {
        if out.len() > next.len() {
            return Err(Error::Geometry(
                "staircase boundary is not a simple loop".into(),
            ));
        }
        out.push(cur);
        cur = next[&cur];
    }
    if out.len() != next.len() {
        return Err(Error::Geometry(
            "staircase boundary is not a simple loop".into(),
        ));
    }
    Ok(out)
}
