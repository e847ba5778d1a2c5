//! Finite-element homogenization of a reaction-diffusion equation on a
//! periodically perforated domain with dynamical (pure-reactive) boundary
//! conditions on the holes.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`] builds the perforated unit cell, the tiled domain and
//!   their conforming P1 meshes.
//! * [`fem`] assembles stiffness, mass and boundary-mass operators and
//!   solves the resulting systems with conjugate gradients.
//! * [`cell`] solves the two periodic cell problems and evaluates the
//!   homogenized tensor.
//! * [`dns`] time-steps the ε-problem on the perforated domain.
//! * [`limit`] time-steps the homogenized problem on the full domain.
//! * [`harness`] ties everything into an ε-sweep convergence study.

// Negated comparisons reject NaN on purpose; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cell;
pub mod dns;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod limit;
pub mod problem;
mod stepping;

pub use error::{Error, Result};

/// A point in the plane.
pub type Point = [f64; 2];

pub use stepping::{StepOptions, StepRecord, TransientSolution};
