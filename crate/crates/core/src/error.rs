use std::path::PathBuf;

use crate::optimizers::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit: {0}")]
    Resource(String),

    /// A bounded-Hessian assumption needed by a theory constant does not hold.
    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    /// Non-finite objective value or iterate. Carries everything recorded
    /// up to the last finite sample.
    #[error("run diverged after {passes:.3} passes")]
    Diverged {
        passes: f64,
        trajectory: Box<Trajectory>,
    },

    #[error("did not converge: {reason} (best gradient norm {best_grad_norm:e})")]
    Convergence {
        reason: String,
        best_grad_norm: f64,
        best: Vec<f64>,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
