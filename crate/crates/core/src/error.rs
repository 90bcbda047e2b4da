use std::path::PathBuf;

use crate::money::Usd;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("invalid data for {asset}: {message}")]
    Validation { asset: String, message: String },

    #[error("insufficient data for {assets:?}: need {needed}, have {available}")]
    InsufficientData {
        assets: Vec<String>,
        needed: usize,
        available: usize,
    },

    #[error("degenerate measure {value} for {asset}; weights need a strictly positive input")]
    DegenerateMeasure { asset: String, value: f64 },

    #[error("portfolio has no assets")]
    EmptyPortfolio,

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    SolverFailure {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("covariance matrix is singular even after regularization")]
    SingularMatrix,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("{what} is missing asset {asset}")]
    Coverage { what: &'static str, asset: String },

    #[error("{asset} is untradable: {reason}")]
    Untradable { asset: String, reason: String },

    #[error("{asset}: minimum block size {min} exceeds maximum {max}")]
    BoundsConflict { asset: String, min: Usd, max: Usd },

    #[error("fill reconciliation failed: {0}")]
    Reconciliation(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn csv(path: &std::path::Path, e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line());
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::io(path, source),
            kind => Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("{kind:?}"),
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the error class; 0 is reserved for success.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } => 3,
            Error::Parse { .. } | Error::Validation { .. } => 4,
            Error::InsufficientData { .. } | Error::EmptyPortfolio | Error::Coverage { .. } => 5,
            Error::DegenerateMeasure { .. }
            | Error::SolverFailure { .. }
            | Error::SingularMatrix => 6,
            Error::Infeasible(_) | Error::Untradable { .. } | Error::BoundsConflict { .. } => 7,
            Error::Reconciliation(_) => 8,
        }
    }
}
