use fpp_core::FppError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema violation: {0}")]
    Schema(String),

    #[error("{0}")]
    Core(#[from] FppError),

    #[error("invariant failure: {0}")]
    Invariant(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }

    /// 0 success, 1 invariant failure or other error, 2 schema, 3 budget or cap.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Core(e) => match e {
                FppError::BudgetExceeded(_) | FppError::CapExceeded { .. } => 3,
                FppError::InvalidDistribution(_)
                | FppError::InvalidBox(_)
                | FppError::InvalidArgument(_)
                | FppError::OutsideDomain(_)
                | FppError::OutsideRegion(_)
                | FppError::EdgeOutsideBox(_, _)
                | FppError::UnsupportedDistribution(_) => 2,
                _ => 1,
            },
            CliError::Invariant(_) | CliError::Io { .. } => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
