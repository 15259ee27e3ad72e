//! Pseudometrics on `[0,1]^d`: norms with discounted highways, lengths,
//! derivatives, the HW recursion and highway networks.

mod calculus;
mod exact;
mod highways;
mod network;
mod norm;
mod path;

pub use calculus::{
    d_length, gauss_legendre, gradient_by_paths, gradient_probe_grid, hausdorff_integrate, metric_derivative,
    DerivativeEstimate, Gradient, GradientKind, LengthEstimate, LengthOptions,
};
pub(crate) use exact::first_self_contact;
pub use exact::{polylines_meet, polylines_overlap, segment_contact, Contact};
pub use highways::{hw_insert, validate_geodesic, HighwayMetric, NormPlusHighways, DEFAULT_ACCESS_RESOLUTION};
pub use network::{
    build_highway_network, check_disjoint, cut_against, halton_pair, remove_loops, sup_distance, HighwayNetwork, NetworkOptions,
};
pub use norm::{GridPseudometric, Pseudometric, WeightedL1};
pub use path::{Highway, LipschitzPath};
