//! Box-restricted passage times, geodesics and derived metrics.

mod continuous;
mod dijkstra;
mod disjoint;
mod geodesics;
mod hub;
mod path;
mod region;
mod rescaled;

pub use continuous::{continuous_metric, uniform_gap, ContinuousMetric, ContinuousSource, GapOptions, GapReport};
pub use dijkstra::{
    box_passage_time, passage_tree, restricted_geodesic, restricted_passage_time,
    restricted_passage_time_with, shortest_path_tree, QueueKind, ShortestPathTree, BUCKET_WEIGHT_LIMIT,
};
pub use disjoint::{disjoint_paths, validate_disjoint_paths};
pub use geodesics::{geodesic_length_stats, truncation_excess, vertex_excess, ExcessCheck, GeodesicLengthTable};
pub use hub::{hub_check, HubReport, HubTarget};
pub use path::{path_time, DiscretePath};
pub use region::Region;
pub use rescaled::{rescaled_distance, rescaled_metric, rescaled_metric_on, RescaledMetric, FULL_TABLE_LIMIT};
