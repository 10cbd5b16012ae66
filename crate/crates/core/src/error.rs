use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("curve violates the Kirillov-Tuy guarantee: {0}")]
    CurveCondition(String),

    #[error("geometry violation: {0}")]
    Geometry(String),

    #[error("singular frame (|det| = {det:e} <= {eps:e})")]
    SingularFrame { det: f64, eps: f64 },

    #[error("unsupported dimension {0}: only odd n (n = 3) is implemented")]
    UnsupportedDimension(usize),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("problem too large for the dense oracle: {0} unknowns")]
    OracleTooLarge(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("bad container {path:?}: {reason}")]
    Container { path: Option<PathBuf>, reason: String },

    #[error("missing input file {0:?}")]
    MissingFile(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
