use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("Matrix Market line {line}: {message}")]
    MatrixMarket { line: usize, message: String },
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] hcx_core::Error),
    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    fn code(&self) -> &'static str {
        match self {
            Self::Io { .. } => "io",
            Self::Json(_) => "json",
            Self::MatrixMarket { .. } => "matrix_market",
            Self::Invalid(_) => "invalid_input",
            Self::Usage(_) => "usage",
            Self::Core(hcx_core::Error::InvalidInput(_)) => "invalid_input",
            Self::Core(hcx_core::Error::DomainError(_)) => "domain",
            Self::Core(hcx_core::Error::NoConvergence { .. }) => "no_convergence",
            Self::Core(hcx_core::Error::DegenerateInstance(_)) => "degenerate",
            Self::Core(hcx_core::Error::InternalInconsistency(_)) => "internal",
            Self::Csv(_) => "csv",
        }
    }
}

/// Machine-readable form written to stderr on failure.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub status: &'static str,
    pub error: &'static str,
    pub message: String,
}

impl From<&CliError> for ErrorReport {
    fn from(e: &CliError) -> Self {
        Self { status: "error", error: e.code(), message: e.to_string() }
    }
}
