use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by curve construction, the functionals and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid discretization: {0}")]
    InvalidDiscretization(String),

    #[error("curve violates invariant: {0}")]
    InvalidCurve(String),

    #[error("degenerate curve: vertices {i} and {k} coincide")]
    DegenerateCurve { i: usize, k: usize },

    #[error("parameters outside the admissible domain: {0}")]
    ParameterDomain(String),

    #[error("kernel is not finite at vertex pair ({i}, {k}): F({chord}, {arc}) = {value}")]
    KernelSingularity {
        i: usize,
        k: usize,
        chord: f64,
        arc: f64,
        value: f64,
    },

    #[error("kernel flag violated: {0}")]
    KernelFlagViolation(String),

    #[error("gradient is singular: vertices {i} and {k} coincide with p = {p} < 2")]
    SingularGradient { i: usize, k: usize, p: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
