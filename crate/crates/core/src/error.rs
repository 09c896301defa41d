use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent arguments (dimension mismatch, bad index ranges, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A point lies outside the domain where the regularizer is differentiable.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quantity left the representable range of f64.
    #[error("range error: {0}")]
    Range(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An exact identity failed to hold at the requested precision.
    #[error("identity violated: {0}")]
    Identity(String),

    #[error("at step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }
}
