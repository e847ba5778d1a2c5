use thiserror::Error;

/// Errors produced by every stage of the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Every violation found while validating a configuration, with key paths.
    #[error("config error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("constraint error: {0}")]
    Constraint(String),

    #[error("{}", format_convergence(*.iterations, *.residual, *.step))]
    Convergence {
        iterations: usize,
        /// Relative residual at the last iterate.
        residual: f64,
        /// Time step index, when raised from a transient run.
        step: Option<usize>,
    },

    #[error("point {index} ({x}, {y}) lies outside the mesh")]
    Location { index: usize, x: f64, y: f64 },

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

fn format_convergence(iterations: usize, residual: f64, step: Option<usize>) -> String {
    match step {
        Some(s) => format!(
            "CG did not converge at time step {s}: {iterations} iterations, relative residual {residual:e}"
        ),
        None => format!(
            "CG did not converge: {iterations} iterations, relative residual {residual:e}"
        ),
    }
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(vec![msg.into()])
    }

    /// Attach a time step index to a convergence error.
    pub(crate) fn at_step(self, n: usize) -> Self {
        match self {
            Error::Convergence {
                iterations,
                residual,
                ..
            } => Error::Convergence {
                iterations,
                residual,
                step: Some(n),
            },
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
