//! Point location and P1 transfer between meshes.

use rayon::prelude::*;

use crate::fem::assemble_mass;
use crate::geometry::primitives::orient;
use crate::geometry::Mesh;
use crate::{Error, Point, Result};

/// Accepted undershoot of barycentric coordinates.
pub const BARYCENTRIC_TOL: f64 = 1e-12;

/// Uniform bucket grid over the bounding box of a mesh.
pub struct PointLocator<'a> {
    mesh: &'a Mesh,
    origin: Point,
    cell: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in mesh.vertices() {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let side = (mesh.num_triangles() as f64).sqrt().ceil().max(1.0) as usize;
        let dims = [side, side];
        let cell = [
            ((hi[0] - lo[0]) / side as f64).max(f64::MIN_POSITIVE),
            ((hi[1] - lo[1]) / side as f64).max(f64::MIN_POSITIVE),
        ];
        let mut loc = Self {
            mesh,
            origin: lo,
            cell,
            dims,
            buckets: vec![Vec::new(); side * side],
        };
        for (t, pts) in (0..mesh.num_triangles()).map(|t| (t, mesh.triangle_points(t))) {
            let (mut a, mut b) = ([usize::MAX; 2], [0; 2]);
            for p in pts {
                let c = loc.bucket_of(p);
                for d in 0..2 {
                    a[d] = a[d].min(c[d]);
                    b[d] = b[d].max(c[d]);
                }
            }
            // One bucket of slack covers points on bucket seams.
            for i in a[0].saturating_sub(1)..=(b[0] + 1).min(side - 1) {
                for j in a[1].saturating_sub(1)..=(b[1] + 1).min(side - 1) {
                    loc.buckets[j * side + i].push(t);
                }
            }
        }
        loc
    }

    fn bucket_of(&self, p: Point) -> [usize; 2] {
        let mut c = [0; 2];
        for d in 0..2 {
            let x = ((p[d] - self.origin[d]) / self.cell[d]).floor();
            c[d] = if x <= 0.0 {
                0
            } else {
                (x as usize).min(self.dims[d] - 1)
            };
        }
        c
    }

    /// Containing triangle and barycentric coordinates. Among candidates the
    /// one with the largest minimum coordinate wins.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let c = self.bucket_of(p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[c[1] * self.dims[0] + c[0]] {
            let [a, b, cc] = self.mesh.triangle_points(t);
            let area = orient(a, b, cc);
            let l = [
                orient(p, b, cc) / area,
                orient(a, p, cc) / area,
                orient(a, b, p) / area,
            ];
            let worst = l[0].min(l[1]).min(l[2]);
            if worst >= -BARYCENTRIC_TOL && best.is_none_or(|(_, _, w)| worst > w) {
                best = Some((t, l, worst));
            }
        }
        best.map(|(t, l, _)| (t, l))
    }
}

/// Precomputed P1 evaluation of fields on one mesh at a fixed point set.
pub struct Transfer {
    weights: Vec<([usize; 3], [f64; 3])>,
    source_vertices: usize,
}

impl Transfer {
    pub fn new(src: &Mesh, points: &[Point]) -> Result<Self> {
        let loc = PointLocator::new(src);
        let weights = points
            .par_iter()
            .enumerate()
            .map(|(index, &p)| match loc.locate(p) {
                Some((t, l)) => Ok((src.triangles()[t], l)),
                None => Err(Error::Location {
                    index,
                    x: p[0],
                    y: p[1],
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            weights,
            source_vertices: src.num_vertices(),
        })
    }

    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.source_vertices {
            return Err(Error::Argument(format!(
                "{} values for a mesh with {} vertices",
                values.len(),
                self.source_vertices
            )));
        }
        Ok(self
            .weights
            .iter()
            .map(|(v, l)| l[0] * values[v[0]] + l[1] * values[v[1]] + l[2] * values[v[2]])
            .collect())
    }
}

pub fn interpolate_p1(src: &Mesh, values: &[f64], points: &[Point]) -> Result<Vec<f64>> {
    Transfer::new(src, points)?.apply(values)
}

/// `(e, e / ||l||)` with `e = ||d - l||` in the mass norm of the perforated
/// mesh and `l` the limit field interpolated onto its vertices.
pub fn l2_error_on_perforated(
    dns_mesh: &Mesh,
    dns_values: &[f64],
    limit_mesh: &Mesh,
    limit_values: &[f64],
) -> Result<(f64, f64)> {
    if dns_values.len() != dns_mesh.num_vertices() {
        return Err(Error::Argument(
            "field does not belong to the perforated mesh".into(),
        ));
    }
    let l = interpolate_p1(limit_mesh, limit_values, dns_mesh.vertices())?;
    Ok(mass_error(&assemble_mass(dns_mesh), dns_values, &l))
}

pub(crate) fn mass_error(mass: &crate::fem::SparseMatrix, d: &[f64], l: &[f64]) -> (f64, f64) {
    let diff: Vec<f64> = d.iter().zip(l).map(|(a, b)| a - b).collect();
    let e = mass.bilinear(&diff, &diff).max(0.0).sqrt();
    let denom = mass.bilinear(l, l).max(0.0).sqrt();
    (e, if denom < 1e-14 { 0.0 } else { e / denom })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        build_perforated_mesh, build_square_mesh, CellGeometry, DomainSpec, ObstaclePolygon,
    };

    fn perforated() -> Mesh {
        let cell =
            CellGeometry::with_obstacle(ObstaclePolygon::regular(12, 0.25).unwrap(), 0.05).unwrap();
        build_perforated_mesh(&DomainSpec::new(1.0, 0.25).unwrap(), &cell, 8).unwrap()
    }

    #[test]
    fn reproduces_linears_and_vertices() {
        let src = build_square_mesh(1.0, 7).unwrap();
        let lin: Vec<f64> = src
            .vertices()
            .iter()
            .map(|p| 2.0 * p[0] - 3.0 * p[1] + 0.5)
            .collect();
        let pts = perforated().vertices().to_vec();
        let got = interpolate_p1(&src, &lin, &pts).unwrap();
        for (p, v) in pts.iter().zip(&got) {
            assert!((v - (2.0 * p[0] - 3.0 * p[1] + 0.5)).abs() < 1e-13);
        }
        let at_vertices = interpolate_p1(&src, &lin, src.vertices()).unwrap();
        assert_eq!(at_vertices, lin);
        let c = interpolate_p1(&src, &vec![4.5; src.num_vertices()], &pts).unwrap();
        assert!(c.iter().all(|&v| (v - 4.5).abs() < 1e-14));
    }

    #[test]
    fn outside_point_reports_index() {
        let src = build_square_mesh(1.0, 4).unwrap();
        let err = interpolate_p1(&src, &[0.0; 25], &[[0.5, 0.5], [1.5, 0.2]]).unwrap_err();
        assert_eq!(
            err,
            Error::Location {
                index: 1,
                x: 1.5,
                y: 0.2
            }
        );
        // Points inside a hole are outside the perforated mesh.
        let p = perforated();
        let v = vec![0.0; p.num_vertices()];
        assert!(matches!(
            interpolate_p1(&p, &v, &[[0.125, 0.125]]),
            Err(Error::Location { index: 0, .. })
        ));
    }

    #[test]
    fn error_examples() {
        let dns = perforated();
        let lim = build_square_mesh(1.0, 16).unwrap();
        let l: Vec<f64> = lim
            .vertices()
            .iter()
            .map(|p| p[0] * (1.0 - p[0]) + p[1])
            .collect();
        let li = interpolate_p1(&lim, &l, dns.vertices()).unwrap();
        assert_eq!(
            l2_error_on_perforated(&dns, &li, &lim, &l).unwrap(),
            (0.0, 0.0)
        );
        let shifted: Vec<f64> = li.iter().map(|v| v + 1.0).collect();
        let (e, _) = l2_error_on_perforated(&dns, &shifted, &lim, &l).unwrap();
        assert!((e - dns.area().sqrt()).abs() < 1e-9);
        let doubled: Vec<f64> = li.iter().map(|v| 2.0 * v).collect();
        let (_, rel) = l2_error_on_perforated(&dns, &doubled, &lim, &l).unwrap();
        assert!((rel - 1.0).abs() < 1e-12);
        let zero = vec![0.0; lim.num_vertices()];
        let (_, rel) = l2_error_on_perforated(&dns, &shifted, &lim, &zero).unwrap();
        assert_eq!(rel, 0.0);
    }
}
