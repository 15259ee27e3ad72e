//! Exact enumeration on tiny boxes and closed-form bounds.
//!
//! Every oracle works with box-restricted passage times. Restricting paths to
//! a box can only increase passage times, so box events of the form
//! `T <= t` are smaller than their whole-lattice counterparts.

mod bounds;
mod enumerate;
mod event;
mod fkg;

pub use bounds::{
    chernoff_log_bound, chernoff_upper_tail, cramer_rate, crude_lower_bound, crude_rate_bound, is_one, mass_up_to,
    optimize_chernoff, ChernoffOptimum,
};
pub use enumerate::{
    configuration_count, exact_event_probability, exact_event_probability_with_cap, exact_law,
    exact_passage_time_law, key_time, time_key, ExactLaw, ExactProbability, DEFAULT_CAP,
};
pub use event::{validate_decreasing, EventSpec, FieldPredicate};
pub use fkg::{
    fekete_strip_check, fkg_grid, fkg_supermultiplicativity_check, monte_carlo_probability, strip_probability,
    FeketeReport, FkgReport, McEstimate, OracleReport,
};
