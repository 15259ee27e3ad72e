use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FppError, Result};
use crate::model::{sample_weights, derive_seed, EdgeDistribution, LatticeBox, WeightField};
use crate::passage_time::{hub_check, shortest_path_tree, QueueKind, Region};

/// A predicate on weight fields.
pub type FieldPredicate = Arc<dyn Fn(&WeightField) -> bool + Send + Sync>;

/// An event on the weight configuration of a box.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EventSpec {
    /// `T_region(x, y) <= t`.
    PassageTimeAtMost { x: Vec<i64>, y: Vec<i64>, t: f64, region: Region },
    /// For all vertex pairs `T(p, q) <= thresholds[p * V + q]` (lattice units).
    LdLower { thresholds: Vec<f64> },
    Hub { x: Vec<i64>, kappa: f64 },
    /// Arbitrary predicate; `decreasing` declares monotonicity in every weight.
    #[serde(skip)]
    Custom { name: String, decreasing: bool, predicate: FieldPredicate },
}

impl fmt::Debug for EventSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventSpec::PassageTimeAtMost { x, y, t, region } => f
                .debug_struct("PassageTimeAtMost")
                .field("x", x)
                .field("y", y)
                .field("t", t)
                .field("region", region)
                .finish(),
            EventSpec::LdLower { thresholds } => {
                f.debug_struct("LdLower").field("pairs", &thresholds.len()).finish()
            }
            EventSpec::Hub { x, kappa } => {
                f.debug_struct("Hub").field("x", x).field("kappa", kappa).finish()
            }
            EventSpec::Custom { name, decreasing, .. } => f
                .debug_struct("Custom")
                .field("name", name)
                .field("decreasing", decreasing)
                .finish(),
        }
    }
}

impl EventSpec {
    pub fn passage_time_at_most(x: &[i64], y: &[i64], t: f64) -> Self {
        EventSpec::PassageTimeAtMost { x: x.to_vec(), y: y.to_vec(), t, region: Region::Full }
    }

    pub fn custom(name: &str, decreasing: bool, f: impl Fn(&WeightField) -> bool + Send + Sync + 'static) -> Self {
        EventSpec::Custom { name: name.into(), decreasing, predicate: Arc::new(f) }
    }

    pub fn label(&self) -> String {
        match self {
            EventSpec::PassageTimeAtMost { x, y, t, .. } => format!("T({x:?},{y:?}) <= {t}"),
            EventSpec::LdLower { .. } => "ld-lower".into(),
            EventSpec::Hub { x, kappa } => format!("hub({x:?}, kappa={kappa})"),
            EventSpec::Custom { name, .. } => name.clone(),
        }
    }

    pub fn is_decreasing(&self) -> bool {
        match self {
            EventSpec::Custom { decreasing, .. } => *decreasing,
            _ => true,
        }
    }

    pub fn validate(&self, lattice: &LatticeBox) -> Result<()> {
        match self {
            EventSpec::PassageTimeAtMost { x, y, region, .. } => {
                for v in [x, y] {
                    if !region.contains(lattice, v) {
                        return Err(FppError::OutsideRegion(v.clone()));
                    }
                }
                region.mask(lattice).map(|_| ())
            }
            EventSpec::LdLower { thresholds } => {
                let v = lattice.vertex_count();
                if thresholds.len() != v * v {
                    return Err(FppError::InvalidArgument(format!(
                        "{} thresholds for {v} vertices",
                        thresholds.len()
                    )));
                }
                Ok(())
            }
            EventSpec::Hub { x, kappa } => {
                if !lattice.contains(x) {
                    return Err(FppError::OutsideRegion(x.clone()));
                }
                if !(*kappa > 0.0) {
                    return Err(FppError::InvalidArgument("kappa must be positive".into()));
                }
                Ok(())
            }
            EventSpec::Custom { .. } => Ok(()),
        }
    }

    /// Edge slots the event depends on.
    pub fn relevant_edges(&self, lattice: &LatticeBox) -> Vec<usize> {
        match self {
            EventSpec::PassageTimeAtMost { region, .. } => lattice
                .edges()
                .filter(|&e| {
                    let (lo, hi, _) = lattice.edge_endpoints(e);
                    region.contains(lattice, &lattice.coords(lo))
                        && region.contains(lattice, &lattice.coords(hi))
                })
                .collect(),
            _ => lattice.edges().collect(),
        }
    }

    pub fn holds(&self, w: &WeightField) -> Result<bool> {
        match self {
            EventSpec::PassageTimeAtMost { x, y, t, region } => {
                let lat = &w.lattice;
                let s = lat.index(x).ok_or_else(|| FppError::OutsideRegion(x.clone()))?;
                let e = lat.index(y).ok_or_else(|| FppError::OutsideRegion(y.clone()))?;
                let tree = shortest_path_tree(w, region.mask(lat)?, &[(s, 0.0)], QueueKind::Auto)?;
                Ok(tree.dist[e] <= *t)
            }
            EventSpec::LdLower { thresholds } => {
                let v = w.lattice.vertex_count();
                for p in 0..v {
                    let tree = shortest_path_tree(w, None, &[(p, 0.0)], QueueKind::Auto)?;
                    if (0..v).any(|q| tree.dist[q] > thresholds[p * v + q]) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            EventSpec::Hub { x, kappa } => Ok(hub_check(x, w, *kappa)?.verdict),
            EventSpec::Custom { predicate, .. } => Ok(predicate(w)),
        }
    }
}

/// Sampled check that lowering one weight never destroys a decreasing event.
/// Returns the number of perturbations tried.
pub fn validate_decreasing(
    event: &EventSpec,
    dist: &EdgeDistribution,
    lattice: LatticeBox,
    samples: usize,
    seed: u64,
) -> Result<usize> {
    if !event.is_decreasing() {
        return Err(FppError::Precondition("event is not flagged decreasing".into()));
    }
    let edges = event.relevant_edges(&lattice);
    let a = dist.support_infimum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tried = 0;
    for i in 0..samples {
        let mut w = sample_weights(dist, lattice, derive_seed(seed, i as u64))?;
        if !event.holds(&w)? {
            continue;
        }
        let e = edges[rng.random_range(0..edges.len())];
        let cur = w.weight(e);
        let lowered = a + (cur - a) * rng.random::<f64>();
        w.set_weight(e, lowered)?;
        tried += 1;
        if !event.holds(&w)? {
            return Err(FppError::Precondition(format!(
                "{} fails after lowering edge {e} from {cur} to {lowered}",
                event.label()
            )));
        }
    }
    Ok(tried)
}
