//! JSON experiment configuration.
//!
//! A config file is one object:
//!
//! ```json
//! { "schema_version": 1, "experiment": { "command": "functional", ... } }
//! ```
//!
//! Every record rejects unknown fields. Distributions are tagged records
//! (`{"kind": "two-point", "low": 1, "high": 2, "p_low": "1/2"}`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use fpp_core::elementary_rate::DEFAULT_BUDGET;
use fpp_core::functional::{AnalyticRate, PathFamily};
use fpp_core::geometry::{NetworkOptions, NormPlusHighways};
use fpp_core::model::{EdgeDistribution, LatticeBox};
use fpp_core::oracle::{EventSpec, DEFAULT_CAP};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Experiment {
    Simulate(SimulateConfig),
    Oracle(OracleConfig),
    Rate(RateConfig),
    Highways(HighwaysConfig),
    Functional(FunctionalConfig),
    LdTrend(LdTrendConfig),
    Selftest(SelftestConfig),
}

impl Experiment {
    pub fn command(&self) -> &'static str {
        match self {
            Experiment::Simulate(_) => "simulate",
            Experiment::Oracle(_) => "oracle",
            Experiment::Rate(_) => "rate",
            Experiment::Highways(_) => "highways",
            Experiment::Functional(_) => "functional",
            Experiment::LdTrend(_) => "ld-trend",
            Experiment::Selftest(_) => "selftest",
        }
    }

    /// Master seed, for commands that draw random numbers.
    pub fn seed(&self) -> Option<u64> {
        match self {
            Experiment::Simulate(c) => Some(c.seed),
            Experiment::Oracle(c) => Some(c.seed),
            Experiment::Rate(c) => Some(c.seed),
            Experiment::LdTrend(c) => Some(c.seed),
            Experiment::Selftest(c) => Some(c.seed),
            Experiment::Highways(_) | Experiment::Functional(_) => None,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            Experiment::Simulate(c) => c.seed = seed,
            Experiment::Oracle(c) => c.seed = seed,
            Experiment::Rate(c) => c.seed = seed,
            Experiment::LdTrend(c) => c.seed = seed,
            Experiment::Selftest(c) => c.seed = seed,
            Experiment::Highways(_) | Experiment::Functional(_) => {}
        }
    }

    pub fn set_budget(&mut self, budget: u64) {
        match self {
            Experiment::Simulate(c) => c.budget = budget,
            Experiment::Oracle(c) => c.budget = budget,
            Experiment::Rate(c) => c.budget = budget,
            Experiment::LdTrend(c) => c.budget = budget,
            Experiment::Highways(_) | Experiment::Functional(_) | Experiment::Selftest(_) => {}
        }
    }

    /// Value checks that the type system does not express.
    pub fn validate(&self) -> CliResult<()> {
        match self {
            Experiment::Simulate(c) => {
                c.distribution.validate()?;
                c.lattice.validate()?;
                if c.fields == 0 || c.points < 2 {
                    return Err(CliError::Schema("simulate needs fields >= 1 and points >= 2".into()));
                }
            }
            Experiment::Oracle(c) => {
                c.distribution.validate()?;
                c.lattice.validate()?;
                for e in &c.events {
                    e.validate(&c.lattice)?;
                }
            }
            Experiment::Rate(c) => {
                c.distribution.validate()?;
                if c.directions.is_empty() {
                    return Err(CliError::Schema("rate needs at least one direction".into()));
                }
                if c.ns.is_empty() && c.exact_ns.is_empty() {
                    return Err(CliError::Schema("rate needs a nonempty ns or exact_ns ladder".into()));
                }
                if !c.ns.is_empty() && c.samples == 0 {
                    return Err(CliError::Schema("Monte Carlo rungs need samples >= 1".into()));
                }
            }
            Experiment::Highways(_) => {}
            Experiment::Functional(c) => c.rate.validate()?,
            Experiment::LdTrend(c) => {
                c.distribution.validate()?;
                if let Some(r) = &c.rate {
                    r.validate()?;
                }
            }
            Experiment::Selftest(c) => {
                c.distribution.validate()?;
                LatticeBox::new(2, c.side)?;
            }
        }
        Ok(())
    }
}

fn default_fields() -> u64 {
    1
}

fn default_points() -> usize {
    16
}

fn default_random_pairs() -> usize {
    16
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

fn default_cap() -> u64 {
    DEFAULT_CAP as u64
}

fn default_true() -> bool {
    true
}

/// Passage times on one box: tabulated metric and geodesic statistics.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub distribution: EdgeDistribution,
    pub lattice: LatticeBox,
    #[serde(default)]
    pub seed: u64,
    /// Independent fields; field `k` uses `derive_seed(seed, k)`.
    #[serde(default = "default_fields")]
    pub fields: u64,
    /// Tabulated vertices besides the box corners.
    #[serde(default = "default_points")]
    pub points: usize,
    /// Truncation level for geodesic length statistics; none skips them.
    #[serde(default)]
    pub truncation: Option<f64>,
    #[serde(default)]
    pub length_ladder: Vec<f64>,
    #[serde(default = "default_random_pairs")]
    pub random_pairs: usize,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FkgSpec {
    pub x1: Vec<i64>,
    pub x2: Vec<i64>,
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeketeSpec {
    pub zeta: f64,
    pub n_max: usize,
}

/// Exact event probabilities, FKG slacks and strip supermultiplicativity.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub distribution: EdgeDistribution,
    pub lattice: LatticeBox,
    #[serde(default)]
    pub events: Vec<EventSpec>,
    #[serde(default)]
    pub fkg: Vec<FkgSpec>,
    #[serde(default)]
    pub fekete: Option<FeketeSpec>,
    /// Enumerate events exactly; otherwise only the Monte Carlo column is filled.
    #[serde(default = "default_true")]
    pub exact: bool,
    #[serde(default)]
    pub mc_samples: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub cap: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

fn default_zeta_points() -> usize {
    6
}

fn default_delta() -> f64 {
    0.05
}

fn default_tol() -> f64 {
    0.05
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConstantSpec {
    pub ns: Vec<usize>,
    pub samples: u64,
    #[serde(default = "default_tol")]
    pub zero_tol: f64,
    #[serde(default = "default_tol")]
    pub margin: f64,
}

/// Elementary-rate estimation, extension to a surface and its checks.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConfig {
    pub distribution: EdgeDistribution,
    pub directions: Vec<Vec<i64>>,
    #[serde(default = "default_zeta_points")]
    pub zeta_points: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Rungs computed by exhaustive enumeration.
    #[serde(default)]
    pub exact_ns: Vec<usize>,
    /// Monte Carlo rungs.
    #[serde(default)]
    pub ns: Vec<usize>,
    #[serde(default)]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub cap: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    /// Zero-set comparison on every direction against a box estimate of `mu`.
    #[serde(default)]
    pub time_constant: Option<TimeConstantSpec>,
}

fn default_sup_pairs() -> usize {
    256
}

/// Disjoint geodesic network of a norm-plus-highways metric.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HighwaysConfig {
    pub metric: NormPlusHighways,
    /// Defaults to a construction seeded by the endpoints of the metric's highways.
    #[serde(default)]
    pub network: Option<NetworkOptions>,
    #[serde(default = "default_sup_pairs")]
    pub sup_pairs: usize,
}

fn default_order() -> usize {
    4
}

fn default_probe_pairs() -> usize {
    64
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    /// A metric at least as large as `metric` everywhere.
    pub larger: NormPlusHighways,
    #[serde(default = "default_probe_pairs")]
    pub pairs: usize,
}

/// The three expressions of the functional and an optional monotonicity probe.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalConfig {
    pub metric: NormPlusHighways,
    pub rate: AnalyticRate,
    #[serde(default = "default_order")]
    pub quadrature_order: usize,
    #[serde(default)]
    pub network: Option<NetworkOptions>,
    #[serde(default)]
    pub family: Option<PathFamily>,
    #[serde(default)]
    pub probe: Option<ProbeSpec>,
}

fn default_ld_samples() -> u64 {
    1000
}

/// Probability of the box lower-deviation event along an `n` ladder.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdTrendConfig {
    pub metric: NormPlusHighways,
    pub distribution: EdgeDistribution,
    pub epsilon: f64,
    pub ns: Vec<usize>,
    #[serde(default = "default_ld_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub cap: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    /// Printed next to the trend; no convergence is claimed.
    #[serde(default)]
    pub rate: Option<AnalyticRate>,
}

fn default_selftest_law() -> EdgeDistribution {
    EdgeDistribution::Deterministic { value: 1.0 }
}

fn default_side() -> usize {
    3
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestConfig {
    #[serde(default = "default_selftest_law")]
    pub distribution: EdgeDistribution,
    #[serde(default = "default_side")]
    pub side: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig { distribution: default_selftest_law(), side: default_side(), seed: 0 }
    }
}

pub fn parse_config(text: &str) -> CliResult<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(CliError::Schema(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            cfg.schema_version
        )));
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FUNCTIONAL: &str = r#"{
        "schema_version": 1,
        "experiment": {
            "command": "functional",
            "metric": {
                "g": {"weights": [1.0, 1.0]},
                "highways": [{"path": {"points": [[0.0, 0.0], [1.0, 1.0]]}, "speeds": [0.5]}]
            },
            "rate": {"kind": "positive-part", "g": {"weights": [1.0, 1.0]}, "scale": 1.0}
        }
    }"#;

    #[test]
    fn round_trip() {
        let cfg = parse_config(FUNCTIONAL).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let again = parse_config(&text).unwrap();
        assert_eq!(text, serde_json::to_string(&again).unwrap());
        assert_eq!(cfg.experiment.command(), "functional");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = FUNCTIONAL.replace("\"command\": \"functional\",", "\"command\": \"functional\", \"colour\": 3,");
        assert!(matches!(parse_config(&bad), Err(CliError::Schema(_))));
        let top = FUNCTIONAL.replacen('{', "{\"extra\": 1,", 1);
        assert!(matches!(parse_config(&top), Err(CliError::Schema(_))));
        let nested = FUNCTIONAL.replace("\"scale\": 1.0", "\"scale\": 1.0, \"power\": 2");
        assert!(matches!(parse_config(&nested), Err(CliError::Schema(_))));
    }

    #[test]
    fn version_is_checked() {
        let v2 = FUNCTIONAL.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(parse_config(&v2), Err(CliError::Schema(_))));
    }

    #[test]
    fn selftest_defaults() {
        let cfg = parse_config(r#"{"schema_version": 1, "experiment": {"command": "selftest"}}"#).unwrap();
        match cfg.experiment {
            Experiment::Selftest(c) => assert_eq!(c.side, 3),
            _ => panic!("wrong command"),
        }
    }

    #[test]
    fn probabilities_parse_as_fractions() {
        let text = r#"{"schema_version": 1, "experiment": {"command": "oracle",
            "distribution": {"kind": "two-point", "low": 1, "high": 2, "p_low": "1/2"},
            "lattice": {"dim": 2, "side": 1},
            "events": [{"kind": "passage-time-at-most", "x": [0, 0], "y": [1, 1], "t": 2, "region": {"kind": "full"}}]}}"#;
        let cfg = parse_config(text).unwrap();
        cfg.experiment.validate().unwrap();
    }
}
