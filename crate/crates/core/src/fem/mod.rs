//! P1 finite-element operators and the linear solver.

mod assembly;
mod cg;
mod dofs;
mod sparse;

pub use assembly::{
    assemble_boundary_load, assemble_boundary_mass, assemble_load, assemble_mass,
    assemble_stiffness, local_edge_mass, local_mass, local_stiffness, Tensor2,
};
pub use cg::{solve_cg, CgOptions, CgSolution, CgSolver, DEFAULT_CG_TOL};
pub use dofs::{apply_constraints, DofKind, DofMap};
pub use sparse::SparseMatrix;

pub(crate) use assembly::basis_gradients;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
