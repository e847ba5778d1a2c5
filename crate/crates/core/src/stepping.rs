//! Backward Euler for `S u' + A u = F(t)` with homogeneous Dirichlet data on
//! the exterior boundary, shared by the perforated and homogenized solvers.

use std::sync::Arc;

use crate::fem::{apply_constraints, dot, CgOptions, CgSolver, DofMap, SparseMatrix};
use crate::geometry::Mesh;
use crate::problem::TimeGrid;
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub cg: CgOptions,
    /// Keep every `store_stride`-th state; must divide the step count.
    pub store_stride: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            cg: CgOptions::default(),
            store_stride: 1,
        }
    }
}

impl StepOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            cg: CgOptions::with_tol(tol),
            store_stride: 1,
        }
    }
}

/// Per-step diagnostics. `residual` at step `n >= 1` is the energy balance
/// of the step from `n - 1` to `n`; it is zero at step 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    /// `sqrt(u^T M u)`.
    pub l2_norm: f64,
    /// `u^T S u / 2`.
    pub energy: f64,
    pub residual: f64,
    pub cg_iterations: usize,
}

/// Nodal history of one run.
#[derive(Debug, Clone)]
pub struct TransientSolution {
    mesh: Arc<Mesh>,
    grid: TimeGrid,
    store_stride: usize,
    states: Vec<Vec<f64>>,
    records: Vec<StepRecord>,
}

impl TransientSolution {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn store_stride(&self) -> usize {
        self.store_stride
    }

    /// Stored states, at steps `0, stride, 2 stride, ..., nsteps`.
    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn state_at_step(&self, n: usize) -> Option<&[f64]> {
        if !n.is_multiple_of(self.store_stride) {
            return None;
        }
        self.states.get(n / self.store_stride).map(Vec::as_slice)
    }

    pub fn final_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("at least the initial state is stored")
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    /// Largest `sqrt(u^T M u)` over all steps.
    pub fn max_l2_norm(&self) -> f64 {
        self.records.iter().map(|r| r.l2_norm).fold(0.0, f64::max)
    }

    /// Values on the vertices of `vertices` (e.g. the obstacle trace) at a
    /// stored step.
    pub fn restrict(&self, n: usize, vertices: &[usize]) -> Option<Vec<f64>> {
        self.state_at_step(n)
            .map(|u| vertices.iter().map(|&v| u[v]).collect())
    }
}

pub(crate) struct Scheme {
    /// Weight of the time derivative.
    pub s: SparseMatrix,
    /// Diffusion plus reaction.
    pub a: SparseMatrix,
    /// Mass used for the reported norm.
    pub m: SparseMatrix,
}

impl Scheme {
    pub fn step_matrix(&self, dt: f64) -> Result<SparseMatrix> {
        SparseMatrix::linear_combination(&[(1.0 / dt, &self.s), (1.0, &self.a)])
    }
}

pub(crate) fn nodal(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Vec<f64> {
    mesh.vertices().iter().map(|&p| f(p)).collect()
}

pub(crate) fn integrate(
    mesh: Arc<Mesh>,
    scheme: &Scheme,
    u0: impl Fn(Point) -> f64,
    load: impl Fn(f64) -> Vec<f64>,
    grid: &TimeGrid,
    opts: &StepOptions,
) -> Result<TransientSolution> {
    let stride = opts.store_stride;
    if stride == 0 || !grid.nsteps().is_multiple_of(stride) {
        return Err(Error::Argument(format!(
            "store stride {stride} does not divide {} steps",
            grid.nsteps()
        )));
    }
    let dt = grid.dt();
    let dofs = DofMap::for_mesh(&mesh)?;
    let lhs = scheme.step_matrix(dt)?;
    let (lhs, _) = apply_constraints(&lhs, &vec![0.0; lhs.dim()], &dofs)?;
    let solver = CgSolver::new(&lhs, opts.cg);

    let mut u = nodal(&mesh, u0);
    for (v, x) in u.iter_mut().enumerate() {
        if dofs.is_dirichlet(v) {
            *x = 0.0;
        }
    }
    let energy = |u: &[f64]| 0.5 * scheme.s.bilinear(u, u);
    let l2 = |u: &[f64]| scheme.m.bilinear(u, u).max(0.0).sqrt();

    let mut e_old = energy(&u);
    let mut records = vec![StepRecord {
        step: 0,
        time: 0.0,
        l2_norm: l2(&u),
        energy: e_old,
        residual: 0.0,
        cg_iterations: 0,
    }];
    let mut states = vec![u.clone()];
    let mut rhs = vec![0.0; u.len()];
    for n in 1..=grid.nsteps() {
        let t = grid.time(n);
        let f = load(t);
        scheme.s.mul_vec_into(&u, &mut rhs);
        for (r, fi) in rhs.iter_mut().zip(&f) {
            *r = *r / dt + fi;
        }
        // Dirichlet values are zero, so no column contributions.
        let rhs_c = dofs.condense_vector(&rhs);
        let x0 = dofs.restrict(&u);
        let sol = solver.solve(&rhs_c, Some(&x0)).map_err(|e| e.at_step(n))?;
        u = dofs.expand(&sol.x);

        let e_new = energy(&u);
        let residual = (e_new - e_old) / dt + scheme.a.bilinear(&u, &u) - dot(&f, &u);
        records.push(StepRecord {
            step: n,
            time: t,
            l2_norm: l2(&u),
            energy: e_new,
            residual,
            cg_iterations: sol.iterations,
        });
        e_old = e_new;
        if n % stride == 0 {
            states.push(u.clone());
        }
    }
    Ok(TransientSolution {
        mesh,
        grid: *grid,
        store_stride: stride,
        states,
        records,
    })
}

/// Energy balance of every step recomputed from the stored states.
pub(crate) fn energy_residuals(
    sol: &TransientSolution,
    scheme: &Scheme,
    load: impl Fn(f64) -> Vec<f64>,
) -> Result<Vec<f64>> {
    if sol.store_stride != 1 {
        return Err(Error::Unsupported(format!(
            "energy residual needs every step stored (stride {})",
            sol.store_stride
        )));
    }
    let dt = sol.grid.dt();
    let mut out = Vec::with_capacity(sol.grid.nsteps());
    for n in 1..sol.states.len() {
        let (u0, u1) = (&sol.states[n - 1], &sol.states[n]);
        let de = 0.5 * (scheme.s.bilinear(u1, u1) - scheme.s.bilinear(u0, u0));
        let f = load(sol.grid.time(n));
        out.push(de / dt + scheme.a.bilinear(u1, u1) - dot(&f, u1));
    }
    Ok(out)
}

/// `(du)^T S (du) / (2 dt)` per step.
pub(crate) fn dissipation(sol: &TransientSolution, s: &SparseMatrix) -> Vec<f64> {
    let dt = sol.grid.dt();
    sol.states
        .windows(2)
        .map(|w| {
            let du: Vec<f64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
            0.5 * s.bilinear(&du, &du) / dt
        })
        .collect()
}
