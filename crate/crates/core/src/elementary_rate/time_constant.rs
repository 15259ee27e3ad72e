use rayon::prelude::*;
use serde::Serialize;

use super::point::{scaled_box, DEFAULT_BUDGET};
use super::surface::{primitive_ray, RateSurface};
use crate::error::{FppError, Result};
use crate::model::{big_to_f64, derive_seed, sample_weights, EdgeDistribution};
use crate::oracle::crude_rate_bound;
use crate::passage_time::{shortest_path_tree, QueueKind};
use crate::stats::{mean_se, Interval, Z95};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeConstantRung {
    pub n: usize,
    pub mean: f64,
    pub se: f64,
    pub ci: Interval,
}

/// Box estimates of `mu(x)` along an `n` ladder.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeConstantEstimate {
    pub x: Vec<i64>,
    pub rungs: Vec<TimeConstantRung>,
    /// Mean at the last rung.
    pub mu_hat: f64,
    pub mu_ci: Interval,
    /// `[a |x|_1, E[tau] |x|_1]`.
    pub bracket: Interval,
}

impl TimeConstantEstimate {
    /// Each rung mean is at most the previous one plus `k` combined standard errors.
    pub fn nonincreasing_within(&self, k: f64) -> bool {
        self.rungs.windows(2).all(|w| w[1].mean <= w[0].mean + k * (w[0].se.hypot(w[1].se)))
    }
}

/// Per-`n` means of `T_box(0, n x) / n` over independent fields.
pub fn estimate_time_constant(
    dist: &EdgeDistribution,
    x: &[i64],
    ns: &[usize],
    samples: u64,
    seed: u64,
) -> Result<TimeConstantEstimate> {
    estimate_time_constant_with_budget(dist, x, ns, samples, seed, DEFAULT_BUDGET)
}

pub fn estimate_time_constant_with_budget(
    dist: &EdgeDistribution,
    x: &[i64],
    ns: &[usize],
    samples: u64,
    seed: u64,
    budget: u64,
) -> Result<TimeConstantEstimate> {
    if ns.is_empty() || samples == 0 {
        return Err(FppError::InvalidArgument("need a nonempty n ladder and samples".into()));
    }
    let k: i64 = x.iter().map(|c| c.abs()).sum();
    if k == 0 {
        return Err(FppError::InvalidArgument("direction must be nonzero".into()));
    }
    let mut work = 0u64;
    for &n in ns {
        let (lattice, _) = scaled_box(x, n)?;
        work = work.saturating_add(samples.saturating_mul(lattice.edge_count() as u64));
    }
    if work > budget {
        return Err(FppError::BudgetExceeded(format!("{work} edge visits exceed the budget {budget}")));
    }
    let mut rungs = Vec::new();
    for (r, &n) in ns.iter().enumerate() {
        let (lattice, target) = scaled_box(x, n)?;
        let t = lattice.index(&target).unwrap();
        let rung_seed = derive_seed(seed, r as u64);
        let times: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let w = sample_weights(dist, lattice, derive_seed(rung_seed, i))?;
                let tree = shortest_path_tree(&w, None, &[(0, 0.0)], QueueKind::Auto)?;
                Ok(tree.dist[t] / n as f64)
            })
            .collect::<Result<_>>()?;
        let (mean, se) = if samples == 1 { (times[0], 0.0) } else { mean_se(&times) };
        rungs.push(TimeConstantRung { n, mean, se, ci: Interval { lower: mean - Z95 * se, upper: mean + Z95 * se } });
    }
    let last = rungs.last().unwrap();
    Ok(TimeConstantEstimate {
        x: x.to_vec(),
        mu_hat: last.mean,
        mu_ci: last.ci,
        bracket: Interval { lower: dist.support_infimum() * k as f64, upper: dist.mean() * k as f64 },
        rungs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroSetCell {
    pub zeta: f64,
    pub value: Option<f64>,
    pub ci_lower: f64,
    /// `None` when the cell sits inside the uncertainty band around `mu_hat`.
    pub expected_zero: Option<bool>,
    pub ok: bool,
    pub crude_bound: Option<f64>,
    pub below_crude: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroSetReport {
    pub x: Vec<i64>,
    pub mu_hat: f64,
    pub band: Interval,
    pub cells: Vec<ZeroSetCell>,
    /// Values strictly decrease over the cells left of the band.
    pub strictly_decreasing_below: bool,
    pub passes: bool,
}

/// Compares the zero set of the surface on the ray of `tc.x` with `mu_hat`.
///
/// Cells with `zeta >= mu_hat + 2 half-width` must have value at most
/// `zero_tol`; cells with `zeta <= mu_hat - margin` must have a strictly
/// positive interval lower end. With `dist` given, every value is also
/// compared with the crude bound.
pub fn zero_set_check(
    surface: &RateSurface,
    tc: &TimeConstantEstimate,
    dist: Option<&EdgeDistribution>,
    zero_tol: f64,
    margin: f64,
) -> Result<ZeroSetReport> {
    let (ray, s) = primitive_ray(&tc.x)?;
    let table = surface
        .ray(&ray)
        .ok_or_else(|| FppError::Precondition(format!("the surface has no ray {ray:?}")))?;
    let half = (tc.mu_ci.upper - tc.mu_ci.lower) / 2.0;
    let band = Interval { lower: tc.mu_hat - margin, upper: tc.mu_hat + 2.0 * half };
    let k: i64 = tc.x.iter().map(|c| c.abs()).sum();
    let mut cells = Vec::new();
    for c in &table.cells {
        // cells are per unit ray; scale to x
        let zeta = big_to_f64(&c.zeta) * s as f64;
        let value = c.value.as_ref().map(|v| big_to_f64(v) * s as f64);
        let ci_lower = c.ci_lower * s as f64;
        let expected_zero = if zeta >= band.upper {
            Some(true)
        } else if zeta <= band.lower {
            Some(false)
        } else {
            None
        };
        let ok = match expected_zero {
            Some(true) => value.is_some_and(|v| v <= zero_tol),
            Some(false) => ci_lower > 0.0 || value.is_some_and(|v| v > zero_tol),
            None => true,
        };
        let crude = dist.map(|d| crude_rate_bound(d, k as f64, zeta / k as f64));
        let below_crude = match (crude, value) {
            (Some(b), Some(v)) => v <= b + 1e-12 || ci_lower <= b,
            _ => true,
        };
        cells.push(ZeroSetCell { zeta, value, ci_lower, expected_zero, ok, crude_bound: crude, below_crude });
    }
    if !cells.iter().any(|c| c.expected_zero.is_some()) {
        return Err(FppError::Precondition("no surface cell lies outside the band around mu_hat".into()));
    }
    let below: Vec<f64> = cells.iter().filter(|c| c.expected_zero == Some(false)).filter_map(|c| c.value).collect();
    let strictly_decreasing_below = below.windows(2).all(|w| w[1] < w[0]);
    let passes = cells.iter().all(|c| c.ok && c.below_crude);
    Ok(ZeroSetReport { x: tc.x.clone(), mu_hat: tc.mu_hat, band, cells, strictly_decreasing_below, passes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_time_constant() {
        let d = EdgeDistribution::deterministic(2.0).unwrap();
        let tc = estimate_time_constant(&d, &[1, 2], &[1, 2, 4], 8, 1).unwrap();
        for r in &tc.rungs {
            assert_eq!(r.mean, 6.0);
        }
        assert_eq!(tc.mu_hat, 6.0);
    }

    #[test]
    fn two_point_bracket() {
        let d = EdgeDistribution::fair_two_point(1.0, 2.0).unwrap();
        let tc = estimate_time_constant(&d, &[1, 0], &[2, 4, 8], 400, 3).unwrap();
        assert_eq!(tc.bracket, Interval { lower: 1.0, upper: 1.5 });
        assert!(tc.bracket.contains(tc.mu_hat));
        assert!(tc.nonincreasing_within(2.0), "{:?}", tc.rungs);
    }

    #[test]
    fn budget_is_enforced() {
        let d = EdgeDistribution::fair_two_point(1.0, 2.0).unwrap();
        let r = estimate_time_constant_with_budget(&d, &[1, 0], &[8], 100, 3, 10);
        assert!(matches!(r, Err(FppError::BudgetExceeded(_))));
    }
}
