//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The Courant number left the stable range |nu| <= 1.
    #[error("CFL violation: courant number {nu} exceeds 1 in magnitude")]
    CflViolation { nu: f64 },

    #[error("incompatible discretization: {0}")]
    IncompatibleDiscretization(String),

    #[error("time index {k} out of range: trajectory holds steps 0..={n_steps}")]
    TimeIndexOutOfRange { k: usize, n_steps: usize },

    #[error("snapshot store is empty")]
    EmptyStore,

    #[error("duplicate snapshot parameter mu_i = {0}")]
    DuplicateKey(f64),

    #[error("relative error undefined: reference field has zero L1 norm")]
    ZeroReferenceNorm,

    #[error("parse error in {path}, line {line}: {message}", path = .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("integrity error in {path}: {message}", path = .path.display())]
    Integrity { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}", path = .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
