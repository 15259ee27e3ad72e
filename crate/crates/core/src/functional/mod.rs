//! The lower-tail rate functional of a highway metric: the geodesic sum, the
//! intrinsic Hausdorff integral and lower bounds from path families.

mod formulas;
mod probe;
mod rate;

pub use formulas::{
    functional_geodesic_sum, functional_intrinsic, functional_report, functional_sup_lower_bound,
    functional_sup_lower_bound_numeric, validate_network, Certificate, FunctionalDeltas, FunctionalParameters,
    FunctionalReport, PathFamily, CROSS_CHECK_TOL,
};
pub use probe::{
    empirical_ld_trend, functional_value, ld_lower_event, strict_monotonicity_probe, LdMethod, LdRow, LdTrend,
    LdTrendOptions, MonotonicityReport,
};
pub use rate::{AnalyticRate, RateFunction, SurfaceRate};
