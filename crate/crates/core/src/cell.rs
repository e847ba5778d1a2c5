//! Periodic cell problems and the homogenized diffusion tensor.
//!
//! For each direction `e_i` the corrector `w_i` solves
//! `int (e_i + grad w_i) . grad phi = 0` for all periodic test functions on
//! the fluid part of the cell, normalized to weighted mean zero. The tensor
//! is `q_ij = int (e_i + grad w_i) . (e_j + grad w_j)` over the fluid part
//! (the cell has unit area).

use crate::fem::{
    apply_constraints, assemble_mass, assemble_stiffness, CgOptions, CgSolver, DofMap, Tensor2,
};
use crate::geometry::{build_cell_mesh, geometric_coefficients, CellGeometry, EdgeTag, Mesh};
use crate::{Error, Result};

use crate::fem::dot;

/// Corrector `w_i` on the cell mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorField {
    /// 1 or 2.
    pub direction: usize,
    /// One value per mesh vertex; slaves carry their master's value.
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Relative residual of the condensed system.
    pub residual: f64,
    pub cg_tol: f64,
}

/// The coefficients entering the homogenized problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogenizedCoefficients {
    pub q: Tensor2,
    /// Fluid volume fraction `|Y'_f| / |Y'|`.
    pub theta: f64,
    /// Obstacle perimeter per cell area `|dF'| / |Y'|`.
    pub sigma: f64,
}

impl HomogenizedCoefficients {
    /// Coefficients of the unperforated cell: `(I, 1, 0)`.
    pub fn identity() -> Self {
        Self {
            q: [[1.0, 0.0], [0.0, 1.0]],
            theta: 1.0,
            sigma: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveTensor {
    /// Energy form, symmetric by construction.
    pub q: Tensor2,
    /// `int (e_i + grad w_i) . e_j`, kept as a cross-check.
    pub q_short: Tensor2,
    pub theta: f64,
    pub sigma: f64,
    pub correctors: [CorrectorField; 2],
    pub subdivisions: usize,
    pub obstacle: String,
}

impl EffectiveTensor {
    pub fn coefficients(&self) -> HomogenizedCoefficients {
        HomogenizedCoefficients {
            q: self.q,
            theta: self.theta,
            sigma: self.sigma,
        }
    }

    /// Eigenvalues of `Q` in increasing order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        sym_eigenvalues(&self.q)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.eigenvalues()[0] > 0.0
    }

    /// `xi^T Q xi`.
    pub fn quadratic_form(&self, xi: [f64; 2]) -> f64 {
        let q = &self.q;
        xi[0] * (q[0][0] * xi[0] + q[0][1] * xi[1]) + xi[1] * (q[1][0] * xi[0] + q[1][1] * xi[1])
    }

    /// Largest `|q_ij - q~_ij|` between the energy and short forms.
    pub fn form_discrepancy(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.q[i][j] - self.q_short[i][j]).abs());
            }
        }
        d
    }
}

pub fn sym_eigenvalues(q: &Tensor2) -> [f64; 2] {
    let m = 0.5 * (q[0][0] + q[1][1]);
    let d = (0.25 * (q[0][0] - q[1][1]).powi(2) + q[0][1] * q[1][0])
        .max(0.0)
        .sqrt();
    [m - d, m + d]
}

fn check_cell_mesh(mesh: &Mesh) -> Result<()> {
    if mesh.periodic_pairs().is_empty() {
        return Err(Error::Constraint(
            "cell mesh has no periodic pairing".into(),
        ));
    }
    if mesh
        .edges_with_tag(EdgeTag::ExteriorDirichlet)
        .next()
        .is_some()
    {
        return Err(Error::Constraint(
            "cell mesh must not carry Dirichlet edges".into(),
        ));
    }
    let mut slave = vec![false; mesh.num_vertices()];
    for &(s, _) in mesh.periodic_pairs() {
        slave[s] = true;
    }
    if let Some(v) = mesh
        .tagged_vertices(EdgeTag::PeriodicSlave)
        .into_iter()
        .find(|&v| !slave[v])
    {
        return Err(Error::Constraint(format!(
            "periodic pairing is not total: boundary vertex {v} has no master"
        )));
    }
    Ok(())
}

/// Right-hand side `b_j = -int e_i . grad phi_j`.
pub fn corrector_rhs(mesh: &Mesh, direction: usize) -> Result<Vec<f64>> {
    if direction != 1 && direction != 2 {
        return Err(Error::Argument(format!(
            "direction must be 1 or 2, got {direction}"
        )));
    }
    let d = direction - 1;
    let mut b = vec![0.0; mesh.num_vertices()];
    for (k, tri) in mesh.triangles().iter().enumerate() {
        let (g, area) = crate::fem::basis_gradients(mesh.triangle_points(k));
        for a in 0..3 {
            b[tri[a]] -= area * g[a][d];
        }
    }
    Ok(b)
}

pub fn solve_cell_corrector(mesh: &Mesh, direction: usize) -> Result<CorrectorField> {
    solve_cell_corrector_with(mesh, direction, &CgOptions::default())
}

pub fn solve_cell_corrector_with(
    mesh: &Mesh,
    direction: usize,
    opts: &CgOptions,
) -> Result<CorrectorField> {
    check_cell_mesh(mesh)?;
    let b = corrector_rhs(mesh, direction)?;
    let k = assemble_stiffness(mesh, &[[1.0, 0.0], [0.0, 1.0]])?;
    let dofs = DofMap::for_mesh(mesh)?;
    let (kc, mut bc) = apply_constraints(&k, &b, &dofs)?;
    // Exact compatibility with the constant kernel.
    let mean = bc.iter().sum::<f64>() / bc.len() as f64;
    bc.iter_mut().for_each(|v| *v -= mean);

    let weights = assemble_mass(mesh).row_sums();
    let reduced_weights = dofs.condense_vector(&weights);
    let sol = CgSolver::new(&kc, *opts)
        .with_zero_mean(reduced_weights)
        .solve(&bc, None)?;
    let mut values = dofs.expand(&sol.x);
    let shift = dot(&weights, &values) / weights.iter().sum::<f64>();
    values.iter_mut().for_each(|v| *v -= shift);
    Ok(CorrectorField {
        direction,
        values,
        iterations: sol.iterations,
        residual: sol.residual,
        cg_tol: opts.tol,
    })
}

/// Evaluates the tensor from the two correctors. `theta` and `sigma` are
/// measured on the mesh (area and obstacle perimeter).
pub fn homogenized_matrix(
    mesh: &Mesh,
    w1: &CorrectorField,
    w2: &CorrectorField,
) -> Result<EffectiveTensor> {
    if w1.direction != 1 || w2.direction != 2 {
        return Err(Error::Argument(format!(
            "correctors must be for directions (1, 2), got ({}, {})",
            w1.direction, w2.direction
        )));
    }
    let nv = mesh.num_vertices();
    if w1.values.len() != nv || w2.values.len() != nv {
        return Err(Error::Argument(
            "corrector does not belong to this mesh".into(),
        ));
    }
    let mut q = [[0.0; 2]; 2];
    let mut q_short = [[0.0; 2]; 2];
    for (k, tri) in mesh.triangles().iter().enumerate() {
        let (g, area) = crate::fem::basis_gradients(mesh.triangle_points(k));
        let mut flux = [[0.0; 2]; 2];
        for (i, w) in [&w1.values, &w2.values].into_iter().enumerate() {
            let mut grad = [0.0; 2];
            for a in 0..3 {
                grad[0] += w[tri[a]] * g[a][0];
                grad[1] += w[tri[a]] * g[a][1];
            }
            flux[i] = grad;
            flux[i][i] += 1.0;
        }
        for i in 0..2 {
            for j in i..2 {
                q[i][j] += area * (flux[i][0] * flux[j][0] + flux[i][1] * flux[j][1]);
            }
            for j in 0..2 {
                q_short[i][j] += area * flux[i][j];
            }
        }
    }
    q[1][0] = q[0][1];
    let tol = w1.cg_tol.max(w2.cg_tol);
    let qnorm = q.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let (origin_m, origin_label) = mesh.origin().map_or((0, String::from("unknown")), |o| {
        (o.subdivisions, o.obstacle.clone())
    });
    let tensor = EffectiveTensor {
        q,
        q_short,
        theta: mesh.area(),
        sigma: mesh.tagged_length(EdgeTag::Obstacle),
        correctors: [w1.clone(), w2.clone()],
        subdivisions: origin_m,
        obstacle: origin_label,
    };
    let gap = tensor.form_discrepancy();
    if gap > 10.0 * tol * qnorm {
        return Err(Error::Consistency(format!(
            "energy and short forms of Q differ by {gap:e} (> 10 * {tol:e} * |Q|)"
        )));
    }
    Ok(tensor)
}

/// Meshes the cell, solves both correctors (concurrently) and evaluates the
/// tensor. `theta` and `sigma` are taken from the obstacle polygon.
pub fn compute_effective_tensor(
    cell: &CellGeometry,
    m: usize,
    opts: &CgOptions,
) -> Result<EffectiveTensor> {
    let mesh = build_cell_mesh(cell, m)?;
    effective_tensor_on(&mesh, cell, opts)
}

pub fn effective_tensor_on(
    mesh: &Mesh,
    cell: &CellGeometry,
    opts: &CgOptions,
) -> Result<EffectiveTensor> {
    let (w1, w2) = rayon::join(
        || solve_cell_corrector_with(mesh, 1, opts),
        || solve_cell_corrector_with(mesh, 2, opts),
    );
    let mut t = homogenized_matrix(mesh, &w1?, &w2?)?;
    let (theta, sigma) = geometric_coefficients(cell);
    t.theta = theta;
    t.sigma = sigma;
    Ok(t)
}
