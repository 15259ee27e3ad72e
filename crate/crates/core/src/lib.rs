//! First-passage percolation lower-tail large deviations laboratory.
//!
//! Box-restricted lattice passage times, exact enumeration oracles, highway
//! pseudometrics on `[0,1]^d`, elementary rate surfaces and the lower-tail
//! rate functional.

pub mod elementary_rate;
pub mod error;
pub mod fixtures;
pub mod functional;
pub mod geometry;
pub mod model;
pub mod oracle;
pub mod passage_time;
pub mod stats;

pub use error::{FppError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
