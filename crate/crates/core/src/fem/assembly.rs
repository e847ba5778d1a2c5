//! Closed-form P1 element integrals and their global assembly.

use super::sparse::SparseMatrix;
use crate::geometry::primitives::{dist, triangle_area};
use crate::geometry::{EdgeTag, Mesh};
use crate::{Error, Point, Result};

/// Constant 2x2 diffusion tensor, row-major.
pub type Tensor2 = [[f64; 2]; 2];

/// Gradients of the three barycentric basis functions and the area.
pub(crate) fn basis_gradients(p: [Point; 3]) -> ([[f64; 2]; 3], f64) {
    let area = triangle_area(p[0], p[1], p[2]);
    let s = 0.5 / area;
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        g[i] = [s * (p[j][1] - p[k][1]), s * (p[k][0] - p[j][0])];
    }
    (g, area)
}

/// `K_ij = |T| (A grad phi_j) . grad phi_i`.
pub fn local_stiffness(p: [Point; 3], a: &Tensor2) -> [[f64; 3]; 3] {
    let (g, area) = basis_gradients(p);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let ag = [
                a[0][0] * g[j][0] + a[0][1] * g[j][1],
                a[1][0] * g[j][0] + a[1][1] * g[j][1],
            ];
            let v = area * (ag[0] * g[i][0] + ag[1] * g[i][1]);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

/// `|T|/12 [[2,1,1],[1,2,1],[1,1,2]]`.
pub fn local_mass(p: [Point; 3]) -> [[f64; 3]; 3] {
    let area = triangle_area(p[0], p[1], p[2]);
    let (d, o) = (area / 6.0, area / 12.0);
    [[d, o, o], [o, d, o], [o, o, d]]
}

/// `len/6 [[2,1],[1,2]]`.
pub fn local_edge_mass(a: Point, b: Point) -> [[f64; 2]; 2] {
    let len = dist(a, b);
    let (d, o) = (len / 3.0, len / 6.0);
    [[d, o], [o, d]]
}

fn check_tensor(a: &Tensor2) -> Result<()> {
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Argument(
            "diffusion tensor has non-finite entries".into(),
        ));
    }
    let scale = a[0][1].abs().max(a[1][0].abs()).max(f64::MIN_POSITIVE);
    if (a[0][1] - a[1][0]).abs() > 1e-14 * scale {
        return Err(Error::Argument(format!(
            "diffusion tensor is not symmetric: a12 = {}, a21 = {}",
            a[0][1], a[1][0]
        )));
    }
    if !(a[0][0] > 0.0 && a[0][0] * a[1][1] - a[0][1] * a[1][0] > 0.0) {
        return Err(Error::Argument(
            "diffusion tensor is not positive-definite".into(),
        ));
    }
    Ok(())
}

fn assemble_triangles(mesh: &Mesh, local: impl Fn([Point; 3]) -> [[f64; 3]; 3]) -> SparseMatrix {
    let mut t = Vec::with_capacity(9 * mesh.num_triangles());
    for (k, tri) in mesh.triangles().iter().enumerate() {
        let e = local(mesh.triangle_points(k));
        for a in 0..3 {
            for b in 0..3 {
                t.push((tri[a], tri[b], e[a][b]));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.num_vertices(), t).expect("mesh indices are in range")
}

pub fn assemble_stiffness(mesh: &Mesh, a: &Tensor2) -> Result<SparseMatrix> {
    check_tensor(a)?;
    // Use the exactly symmetric form so K_ij and K_ji match bit for bit.
    let sym = [[a[0][0], a[0][1]], [a[0][1], a[1][1]]];
    Ok(assemble_triangles(mesh, |p| local_stiffness(p, &sym)))
}

pub fn assemble_mass(mesh: &Mesh) -> SparseMatrix {
    assemble_triangles(mesh, local_mass)
}

/// Mass matrix of the edges carrying `tag`; zero rows elsewhere.
pub fn assemble_boundary_mass(mesh: &Mesh, tag: EdgeTag) -> SparseMatrix {
    let v = mesh.vertices();
    let mut t = Vec::new();
    for [a, b] in mesh.edges_with_tag(tag) {
        let e = local_edge_mass(v[a], v[b]);
        let idx = [a, b];
        for i in 0..2 {
            for j in 0..2 {
                t.push((idx[i], idx[j], e[i][j]));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.num_vertices(), t).expect("mesh indices are in range")
}

fn check_len(mesh: &Mesh, vals: &[f64]) -> Result<()> {
    if vals.len() != mesh.num_vertices() {
        return Err(Error::Argument(format!(
            "expected {} nodal values, got {}",
            mesh.num_vertices(),
            vals.len()
        )));
    }
    Ok(())
}

/// Consistent-mass load vector `M f` of nodal data.
pub fn assemble_load(mesh: &Mesh, fvals: &[f64]) -> Result<Vec<f64>> {
    check_len(mesh, fvals)?;
    Ok(assemble_mass(mesh).mul_vec(fvals))
}

/// Boundary load `B g` over the edges carrying `tag`.
pub fn assemble_boundary_load(mesh: &Mesh, tag: EdgeTag, gvals: &[f64]) -> Result<Vec<f64>> {
    check_len(mesh, gvals)?;
    Ok(assemble_boundary_mass(mesh, tag).mul_vec(gvals))
}
