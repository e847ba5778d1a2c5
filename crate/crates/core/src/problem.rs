//! Data of the evolution problems and the uniform time grid.

use std::fmt;
use std::sync::Arc;

use crate::{Error, Point, Result};

/// `(x, t) -> value`.
pub type SpaceTimeFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;
/// `x -> value`.
pub type SpaceFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Reaction constant, volume source `f`, obstacle source `g`, initial datum
/// and final time. Sources and initial datum default to zero.
#[derive(Clone)]
pub struct ProblemData {
    kappa: f64,
    final_time: f64,
    f: SpaceTimeFn,
    g: SpaceTimeFn,
    u0: SpaceFn,
}

impl fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemData")
            .field("kappa", &self.kappa)
            .field("final_time", &self.final_time)
            .finish_non_exhaustive()
    }
}

impl ProblemData {
    pub fn new(kappa: f64, final_time: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Argument(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        if !(final_time > 0.0 && final_time.is_finite()) {
            return Err(Error::Argument(format!(
                "final time must be positive, got {final_time}"
            )));
        }
        Ok(Self {
            kappa,
            final_time,
            f: Arc::new(|_, _| 0.0),
            g: Arc::new(|_, _| 0.0),
            u0: Arc::new(|_| 0.0),
        })
    }

    pub fn with_source(mut self, f: impl Fn(Point, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.f = Arc::new(f);
        self
    }

    pub fn with_boundary_source(
        mut self,
        g: impl Fn(Point, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.g = Arc::new(g);
        self
    }

    /// The initial datum is expected to vanish on the exterior boundary;
    /// solvers overwrite it with zero on Dirichlet vertices.
    pub fn with_initial(mut self, u0: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        self.u0 = Arc::new(u0);
        self
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn f(&self, x: Point, t: f64) -> f64 {
        (self.f)(x, t)
    }

    pub fn g(&self, x: Point, t: f64) -> f64 {
        (self.g)(x, t)
    }

    pub fn u0(&self, x: Point) -> f64 {
        (self.u0)(x)
    }
}

/// `nsteps` uniform steps on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    final_time: f64,
    nsteps: usize,
}

impl TimeGrid {
    pub fn new(final_time: f64, nsteps: usize) -> Result<Self> {
        if nsteps == 0 {
            return Err(Error::Argument("time grid needs at least one step".into()));
        }
        if !(final_time > 0.0 && final_time.is_finite()) {
            return Err(Error::Argument(format!(
                "final time must be positive, got {final_time}"
            )));
        }
        Ok(Self { final_time, nsteps })
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn nsteps(&self) -> usize {
        self.nsteps
    }

    pub fn dt(&self) -> f64 {
        self.final_time / self.nsteps as f64
    }

    /// Time of step `n`; exact at the endpoints.
    pub fn time(&self, n: usize) -> f64 {
        if n == self.nsteps {
            self.final_time
        } else {
            self.final_time * n as f64 / self.nsteps as f64
        }
    }
}
