use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown profile `{0}`")]
    UnknownProfile(String),

    #[error("unknown nonlinearity `{0}`")]
    UnknownNonlinearity(String),

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("scheme {0} requires a c2 node in (0, 1]")]
    MissingC2(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("phi index k = {k} outside 0..={k_max}")]
    KOutOfRange { k: usize, k_max: usize },

    #[error("eigensolver did not converge within {budget} iterations")]
    NoConvergence { budget: usize },

    #[error("no cached factorization at {path}: {reason}")]
    CacheMiss { path: PathBuf, reason: String },

    #[error("cache file version {found} does not match expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt cache file: {0}")]
    CorruptFile(String),

    #[error("non-finite state at step {step} (t = {time})")]
    Instability { step: usize, time: f64 },

    #[error("oracle scale exceeded: dimension {requested} > {limit}")]
    OracleScaleExceeded { requested: usize, limit: usize },

    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("tolerance exceeded: {0}")]
    ToleranceExceeded(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
