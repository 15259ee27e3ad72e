use thiserror::Error;

/// Errors raised by the simulation, oracle and geometry layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FppError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("unsupported distribution kind for this operation: {0}")]
    UnsupportedDistribution(String),

    #[error("unknown bond-percolation threshold p_c for dimension {0}")]
    UnknownCriticalProbability(usize),

    #[error("invalid lattice box: {0}")]
    InvalidBox(String),

    #[error("vertex {0:?} is outside the region")]
    OutsideRegion(Vec<i64>),

    #[error("edge between {0:?} and {1:?} is not a box edge")]
    EdgeOutsideBox(Vec<i64>, Vec<i64>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("outside the domain: {0}")]
    OutsideDomain(String),

    #[error("enumeration of {configurations} configurations exceeds the cap {cap}")]
    CapExceeded { configurations: u128, cap: u128 },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("moment generating function diverges at {0}")]
    DivergentMgf(f64),

    #[error("no convergence: {message} (last bracket [{lower}, {upper}])")]
    NoConvergence { message: String, lower: f64, upper: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("not a geodesic: D-length {length} vs endpoint distance {distance}")]
    NotGeodesic { length: f64, distance: f64 },

    #[error("paths overlap: {0}")]
    Overlap(String),

    #[error("conflicting inputs: {0}")]
    Conflict(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FppError {
    fn from(e: std::io::Error) -> Self {
        FppError::Io(e.to_string())
    }
}

impl From<csv::Error> for FppError {
    fn from(e: csv::Error) -> Self {
        FppError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FppError>;
