use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("normalization degenerate at point {index}: condition number {condition:e}")]
    NormalizationDegenerate { index: usize, condition: f64 },

    #[error("generalized eigensolver failed: regularized constraint matrix not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    SolverFailure { min_eigenvalue: f64 },

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid entry {entry}: {message}")]
    Validation { entry: String, message: String },

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable class name, used by the CLI error line.
    pub fn class(&self) -> &'static str {
        match self {
            Error::RankDeficient(_) => "RankDeficient",
            Error::Dimension(_) => "DimensionError",
            Error::Parameter(_) => "ParameterError",
            Error::NormalizationDegenerate { .. } => "NormalizationDegenerate",
            Error::SolverFailure { .. } => "SolverFailure",
            Error::Iteration { source, .. } => source.class(),
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::Parse { .. } => "ParseError",
            Error::Validation { .. } => "ValidationError",
            Error::Version { .. } => "VersionError",
            Error::Io { .. } => "IoError",
        }
    }

    pub(crate) fn at_iteration(self, iteration: usize) -> Error {
        Error::Iteration {
            iteration,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
