use serde::{Deserialize, Serialize};

use crate::error::{FppError, Result};
use crate::model::{l1, WeightField};

/// Budgets for one target of the hub event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HubTarget {
    pub target: Vec<i64>,
    /// Least time over paths with at most `2|x-y|_1 + 4` edges.
    pub best_time: f64,
    /// `kappa |x-y|_1 - best_time`.
    pub time_slack: f64,
    /// Hop budget minus the fewest edges of a path within the time budget;
    /// `None` when no path meets both budgets.
    pub hop_slack: Option<i64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HubReport {
    pub vertex: Vec<i64>,
    pub kappa: f64,
    pub verdict: bool,
    pub worst_time_slack: f64,
    pub worst_hop_slack: Option<i64>,
    pub targets: Vec<HubTarget>,
}

/// Whether `x` reaches every box vertex `y` along a path with time at most
/// `kappa |x-y|_1` and at most `2|x-y|_1 + 4` edges (exact hop-layered DP).
pub fn hub_check(x: &[i64], w: &WeightField, kappa: f64) -> Result<HubReport> {
    if !(kappa > 0.0) {
        return Err(FppError::InvalidArgument(format!("kappa must be positive, got {kappa}")));
    }
    let lat = w.lattice;
    let s = lat.index(x).ok_or_else(|| FppError::OutsideRegion(x.to_vec()))?;
    let v = lat.vertex_count();
    let coords: Vec<Vec<i64>> = (0..v).map(|i| lat.coords(i)).collect();
    let budget: Vec<usize> = coords.iter().map(|c| 2 * l1(x, c) as usize + 4).collect();
    let h_max = *budget.iter().max().unwrap();

    // best[v] after layer h = least time with at most h edges
    let mut best = vec![f64::INFINITY; v];
    best[s] = 0.0;
    let mut best_within = vec![f64::INFINITY; v];
    let mut first_ok: Vec<Option<usize>> = vec![None; v];
    let time_budget: Vec<f64> = coords.iter().map(|c| kappa * l1(x, c) as f64).collect();
    let record = |h: usize, best: &[f64], within: &mut [f64], first: &mut [Option<usize>]| {
        for u in 0..v {
            if h <= budget[u] {
                within[u] = best[u];
            }
            if first[u].is_none() && best[u] <= time_budget[u] {
                first[u] = Some(h);
            }
        }
    };
    record(0, &best, &mut best_within, &mut first_ok);
    for h in 1..=h_max {
        let prev = best.clone();
        for u in 0..v {
            for (nb, slot) in lat.neighbors(u) {
                let c = prev[nb] + w.weight(slot);
                if c < best[u] {
                    best[u] = c;
                }
            }
        }
        record(h, &best, &mut best_within, &mut first_ok);
        if best == prev {
            for u in 0..v {
                if budget[u] >= h {
                    best_within[u] = best[u];
                }
            }
            break;
        }
    }

    let targets: Vec<HubTarget> = (0..v)
        .map(|u| {
            let time_slack = time_budget[u] - best_within[u];
            let hop_slack = first_ok[u].map(|h| budget[u] as i64 - h as i64);
            HubTarget {
                target: coords[u].clone(),
                best_time: best_within[u],
                time_slack,
                hop_slack,
                pass: time_slack >= 0.0,
            }
        })
        .collect();
    let worst_time_slack = targets.iter().map(|t| t.time_slack).fold(f64::INFINITY, f64::min);
    let worst_hop_slack = if targets.iter().all(|t| t.hop_slack.is_some()) {
        targets.iter().filter_map(|t| t.hop_slack).min()
    } else {
        None
    };
    Ok(HubReport {
        vertex: x.to_vec(),
        kappa,
        verdict: targets.iter().all(|t| t.pass),
        worst_time_slack,
        worst_hop_slack,
        targets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_weights, EdgeDistribution, LatticeBox};

    #[test]
    fn deterministic_hubs() {
        let d = EdgeDistribution::deterministic(1.0).unwrap();
        let w = sample_weights(&d, LatticeBox::new(2, 4).unwrap(), 0).unwrap();
        for x in [[0, 0], [2, 3], [4, 4]] {
            let r = hub_check(&x, &w, 1.0).unwrap();
            assert!(r.verdict);
            assert_eq!(r.worst_time_slack, 0.0);
            assert!(!hub_check(&x, &w, 0.5).unwrap().verdict);
        }
        assert!(hub_check(&[0, 0], &w, 0.0).is_err());
        assert!(hub_check(&[0, 0], &w, -1.0).is_err());
    }

    #[test]
    fn cheap_detour_within_hop_budget() {
        // the direct edge is expensive, a three-edge detour is within budget
        let lat = LatticeBox::new(2, 6).unwrap();
        let d = EdgeDistribution::uniform(0.0, 100.0).unwrap();
        let w = WeightField::from_fn(lat, d, |lower, dir| {
            if dir == 0 && lower[1] == 0 && lower[0] < 1 { 50.0 } else { 0.001 }
        });
        let r = hub_check(&[0, 0], &w, 1.0).unwrap();
        let t = r.targets.iter().find(|t| t.target == vec![1, 0]).unwrap();
        // (0,0)->(1,0) direct costs 50; detours use at least 3 edges, budget is 6
        assert!(t.best_time < 1.0);
        assert!(r.verdict);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"verdict\":true"));
    }
}
