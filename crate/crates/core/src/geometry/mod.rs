//! Cell and perforated-domain geometry and their triangulations.
//!
//! The periodic cell is fixed as `[-1/2, 1/2]^2` (unit area). A cell may carry
//! one polygonal obstacle; the fluid part is the cell minus the closed
//! obstacle. The same polygon feeds the meshers and the geometric
//! coefficients, so every solver sees one geometry.

mod cell_mesh;
mod mesh;
mod perforated;
pub mod primitives;
mod triangulate;

pub use cell_mesh::build_cell_mesh;
pub use mesh::{BoundaryEdge, EdgeTag, Mesh, MeshOrigin};
pub use perforated::{build_perforated_mesh, build_square_mesh};

use crate::{Error, Point, Result};
use primitives::{orient, polygon_area, polygon_perimeter, segments_intersect};

/// Default obstacle clearance from the cell boundary.
pub const DEFAULT_CLEARANCE: f64 = 0.05;

/// A simple counter-clockwise polygon in cell coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstaclePolygon {
    vertices: Vec<Point>,
    label: String,
}

impl ObstaclePolygon {
    /// Validates simplicity and counter-clockwise orientation.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let label = format!("polygon({})", vertices.len());
        Self::with_label(vertices, label)
    }

    fn with_label(vertices: Vec<Point>, label: String) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Geometry(format!(
                "obstacle polygon needs at least 3 vertices, got {n}"
            )));
        }
        if vertices
            .iter()
            .any(|p| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err(Error::Geometry("obstacle vertex is not finite".into()));
        }
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(Error::Geometry(format!("repeated obstacle vertex {i}")));
            }
        }
        // Non-adjacent edges must not touch.
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            for j in (i + 1)..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(Error::Geometry(format!(
                        "obstacle polygon is self-intersecting (edges {i} and {j})"
                    )));
                }
            }
        }
        // Adjacent edges folding back onto each other.
        for i in 0..n {
            let (p, q, r) = (
                vertices[(i + n - 1) % n],
                vertices[i],
                vertices[(i + 1) % n],
            );
            let back = (q[0] - p[0]) * (r[0] - q[0]) + (q[1] - p[1]) * (r[1] - q[1]);
            if orient(p, q, r) == 0.0 && back < 0.0 {
                return Err(Error::Geometry(format!(
                    "obstacle polygon is self-intersecting at vertex {i}"
                )));
            }
        }
        if polygon_area(&vertices) <= 0.0 {
            return Err(Error::Geometry(
                "obstacle polygon must be counter-clockwise (positive signed area)".into(),
            ));
        }
        Ok(Self { vertices, label })
    }

    /// Axis-aligned square of the given side centered in the cell.
    pub fn square(side: f64) -> Result<Self> {
        if !(side > 0.0) {
            return Err(Error::Geometry(format!(
                "square side must be positive, got {side}"
            )));
        }
        let s = 0.5 * side;
        Self::with_label(
            vec![[-s, -s], [s, -s], [s, s], [-s, s]],
            format!("square({side})"),
        )
    }

    /// Regular `n`-gon inscribed in the circle of radius `r` about the cell
    /// center, with a vertex on the positive x axis.
    pub fn regular(n: usize, r: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Geometry(format!("n-gon needs n >= 3, got {n}")));
        }
        if !(r > 0.0) {
            return Err(Error::Geometry(format!(
                "n-gon radius must be positive, got {r}"
            )));
        }
        let verts = (0..n)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                [r * a.cos(), r * a.sin()]
            })
            .collect();
        Self::with_label(verts, format!("ngon({n},{r})"))
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        polygon_perimeter(&self.vertices)
    }

    /// Distance of the polygon from the cell boundary in the max norm.
    pub fn clearance(&self) -> f64 {
        let reach = self
            .vertices
            .iter()
            .map(|p| p[0].abs().max(p[1].abs()))
            .fold(0.0, f64::max);
        0.5 - reach
    }

    /// Mirror image across the diagonal `x = y` (orientation restored).
    pub fn transposed(&self) -> Self {
        let mut v: Vec<Point> = self.vertices.iter().map(|p| [p[1], p[0]]).collect();
        v.reverse();
        Self {
            vertices: v,
            label: format!("transpose({})", self.label),
        }
    }
}

/// The periodic cell `[-1/2,1/2]^2` with an optional obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    obstacle: Option<ObstaclePolygon>,
    clearance: f64,
}

impl CellGeometry {
    /// Cell without obstacle.
    pub fn empty() -> Self {
        Self {
            obstacle: None,
            clearance: DEFAULT_CLEARANCE,
        }
    }

    /// Cell with an obstacle kept at least `clearance` away from the cell
    /// boundary: every vertex satisfies `max(|x|,|y|) <= 1/2 - clearance`.
    pub fn with_obstacle(obstacle: ObstaclePolygon, clearance: f64) -> Result<Self> {
        if !(clearance > 0.0 && clearance < 0.5) {
            return Err(Error::Geometry(format!(
                "clearance must lie in (0, 1/2), got {clearance}"
            )));
        }
        let avail = obstacle.clearance();
        if avail < clearance {
            return Err(Error::Geometry(format!(
                "obstacle {} violates clearance {clearance}: it reaches max(|x|,|y|) = {}",
                obstacle.label(),
                0.5 - avail
            )));
        }
        Ok(Self {
            obstacle: Some(obstacle),
            clearance,
        })
    }

    pub fn obstacle(&self) -> Option<&ObstaclePolygon> {
        self.obstacle.as_ref()
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    pub fn label(&self) -> String {
        self.obstacle
            .as_ref()
            .map_or_else(|| "none".to_string(), |o| o.label().to_string())
    }

    /// The same cell with the obstacle mirrored across `x = y`.
    pub fn transposed(&self) -> Self {
        Self {
            obstacle: self.obstacle.as_ref().map(ObstaclePolygon::transposed),
            clearance: self.clearance,
        }
    }
}

/// Volume fraction and perimeter coefficient of the cell.
///
/// With `|Y'| = 1` these are `1 - area(F')` and `perimeter(F')`.
pub fn geometric_coefficients(cell: &CellGeometry) -> (f64, f64) {
    match cell.obstacle() {
        None => (1.0, 0.0),
        Some(o) => (1.0 - o.area(), o.perimeter()),
    }
}

/// The macroscopic square `(0, L)^2` tiled by cells of size `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    side_length: f64,
    epsilon: f64,
    cells_per_side: usize,
}

impl DomainSpec {
    /// Fails unless `L / epsilon` is a positive integer (relative tolerance 1e-9).
    pub fn new(side_length: f64, epsilon: f64) -> Result<Self> {
        if !(side_length > 0.0 && side_length.is_finite()) {
            return Err(Error::config(format!(
                "domain side length must be positive, got {side_length}"
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::config(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let cells_per_side = cells_per_side(side_length, epsilon).ok_or_else(|| {
            Error::config(format!(
                "L/ε not integer: L = {side_length}, ε = {epsilon}, L/ε = {}",
                side_length / epsilon
            ))
        })?;
        Ok(Self {
            side_length,
            epsilon,
            cells_per_side,
        })
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }
}

/// `Some(L/ε)` when the ratio is a positive integer.
pub(crate) fn cells_per_side(side_length: f64, epsilon: f64) -> Option<usize> {
    let ratio = side_length / epsilon;
    let n = ratio.round();
    if n >= 1.0 && (ratio - n).abs() <= 1e-9 * n {
        Some(n as usize)
    } else {
        None
    }
}
