//! Direct simulation on the perforated domain.
//!
//! Backward Euler for the weak form
//! `(M + eps B) u' + (K + kappa M) u = M f + eps B g`, where `B` is the mass
//! of the obstacle boundary. The `eps B` terms carry the dynamical boundary
//! condition `du/dn + eps du/dt = eps g` on the holes.

use std::sync::Arc;

use crate::fem::{assemble_boundary_mass, assemble_mass, assemble_stiffness, SparseMatrix};
use crate::geometry::{EdgeTag, Mesh};
use crate::problem::{ProblemData, TimeGrid};
use crate::stepping::{self, nodal, Scheme};
use crate::{Error, Result};

pub use crate::stepping::{StepOptions, StepRecord, TransientSolution};

/// Matrices of the perforated problem.
#[derive(Debug, Clone)]
pub struct DnsOperators {
    pub stiffness: SparseMatrix,
    pub mass: SparseMatrix,
    /// Obstacle boundary mass, without the `eps` factor.
    pub boundary_mass: SparseMatrix,
    pub epsilon: f64,
    pub kappa: f64,
}

impl DnsOperators {
    pub fn assemble(mesh: &Mesh, epsilon: f64, kappa: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Argument(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Self {
            stiffness: assemble_stiffness(mesh, &[[1.0, 0.0], [0.0, 1.0]])?,
            mass: assemble_mass(mesh),
            boundary_mass: assemble_boundary_mass(mesh, EdgeTag::Obstacle),
            epsilon,
            kappa,
        })
    }

    /// `M + eps B`.
    pub fn storage_matrix(&self) -> Result<SparseMatrix> {
        SparseMatrix::linear_combination(&[(1.0, &self.mass), (self.epsilon, &self.boundary_mass)])
    }

    /// `1^T (eps B) 1`, the scaled total obstacle length.
    pub fn scaled_boundary_measure(&self) -> f64 {
        self.epsilon * self.boundary_mass.total()
    }

    fn scheme(&self) -> Result<Scheme> {
        Ok(Scheme {
            s: self.storage_matrix()?,
            a: SparseMatrix::linear_combination(&[
                (1.0, &self.stiffness),
                (self.kappa, &self.mass),
            ])?,
            m: self.mass.clone(),
        })
    }

    fn load<'a>(&'a self, mesh: &'a Mesh, data: &'a ProblemData) -> impl Fn(f64) -> Vec<f64> + 'a {
        move |t| {
            let mf = self.mass.mul_vec(&nodal(mesh, |x| data.f(x, t)));
            let bg = self.boundary_mass.mul_vec(&nodal(mesh, |x| data.g(x, t)));
            mf.iter()
                .zip(&bg)
                .map(|(a, b)| a + self.epsilon * b)
                .collect()
        }
    }
}

pub fn run_dns(
    mesh: Arc<Mesh>,
    data: &ProblemData,
    grid: &TimeGrid,
    epsilon: f64,
    cg_tol: f64,
) -> Result<TransientSolution> {
    run_dns_with(mesh, data, grid, epsilon, &StepOptions::with_tol(cg_tol))
}

pub fn run_dns_with(
    mesh: Arc<Mesh>,
    data: &ProblemData,
    grid: &TimeGrid,
    epsilon: f64,
    opts: &StepOptions,
) -> Result<TransientSolution> {
    let ops = DnsOperators::assemble(&mesh, epsilon, data.kappa())?;
    let scheme = ops.scheme()?;
    let load = ops.load(&mesh, data);
    stepping::integrate(mesh.clone(), &scheme, |x| data.u0(x), load, grid, opts)
}

/// `r^n = (E^{n+1} - E^n)/dt + u K u + kappa u M u - f M u - eps g B u`
/// with `E = u (M + eps B) u / 2`, for every step of a fully stored run.
/// For backward Euler this equals minus the numerical dissipation, see
/// [`numerical_dissipation`].
pub fn energy_residual(
    sol: &TransientSolution,
    data: &ProblemData,
    epsilon: f64,
) -> Result<Vec<f64>> {
    let mesh = sol.mesh().clone();
    let ops = DnsOperators::assemble(&mesh, epsilon, data.kappa())?;
    let scheme = ops.scheme()?;
    stepping::energy_residuals(sol, &scheme, ops.load(&mesh, data))
}

/// `(du)^T (M + eps B) (du) / (2 dt)` per step.
pub fn numerical_dissipation(sol: &TransientSolution, epsilon: f64) -> Result<Vec<f64>> {
    if sol.store_stride() != 1 {
        return Err(Error::Unsupported(
            "dissipation needs every step stored".into(),
        ));
    }
    let ops = DnsOperators::assemble(sol.mesh(), epsilon, 1.0)?;
    Ok(stepping::dissipation(sol, &ops.storage_matrix()?))
}
