//! Finite-n estimates of the elementary lower-tail rate, their extension to
//! a rate surface, and time-constant estimates.

mod point;
mod surface;
mod time_constant;

pub use point::{
    cramer_rate_point, crude_rate_point, estimate_rate_point, estimate_rate_point_with_budget, exact_rate_point,
    exact_rate_point_default, fekete_envelope, zeta_grid, RateMethod, RatePoint, DEFAULT_BUDGET,
};
pub use surface::{
    extend_surface, primitive_ray, ExtensionStep, InvariantReport, Modification, RateSurface, RayTable, SurfaceCell,
};
pub use time_constant::{
    estimate_time_constant, estimate_time_constant_with_budget, zero_set_check, TimeConstantEstimate,
    TimeConstantRung, ZeroSetCell, ZeroSetReport,
};
