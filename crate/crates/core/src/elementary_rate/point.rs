use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FppError, Result};
use crate::model::{derive_seed, sample_weights, EdgeDistribution, LatticeBox};
use crate::oracle::{cramer_rate, crude_rate_bound, exact_passage_time_law, DEFAULT_CAP};
use crate::passage_time::{shortest_path_tree, QueueKind, Region};
use crate::stats::{wilson_interval, Interval, Z95};

/// Edge visits allowed for one Monte Carlo call unless overridden.
pub const DEFAULT_BUDGET: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateMethod {
    MonteCarlo,
    ExactOracle,
    CramerBound,
    CrudeBound,
}

/// `-(1/n) log P(T_box(0, n x) <= n zeta)` with its confidence interval, in nats.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatePoint {
    pub x: Vec<i64>,
    pub zeta: f64,
    pub n: usize,
    pub estimate: f64,
    pub ci: Interval,
    pub method: RateMethod,
    /// Zero hits: `estimate` is only a lower bound on the finite-n rate.
    pub censored: bool,
    pub hits: Option<u64>,
    pub samples: Option<u64>,
}

fn l1_norm(x: &[i64]) -> i64 {
    x.iter().map(|c| c.abs()).sum()
}

/// Checks `zeta >= a |x|_1`, with equality only when `nu` has an atom at `a`.
pub(crate) fn check_domain(dist: &EdgeDistribution, x: &[i64], zeta: f64) -> Result<()> {
    let a = dist.support_infimum();
    let floor = a * l1_norm(x) as f64;
    if l1_norm(x) == 0 {
        return Err(FppError::InvalidArgument("direction must be nonzero".into()));
    }
    if !zeta.is_finite() || zeta < floor || (zeta == floor && dist.atom_mass(a) == 0.0) {
        return Err(FppError::OutsideDomain(format!("zeta = {zeta} is not above a |x|_1 = {floor}")));
    }
    Ok(())
}

/// Box `[0, n max|x_i|]^d` and the target `n |x|`; sign flips are symmetries.
pub(crate) fn scaled_box(x: &[i64], n: usize) -> Result<(LatticeBox, Vec<i64>)> {
    if n == 0 {
        return Err(FppError::InvalidArgument("scale n must be positive".into()));
    }
    let target: Vec<i64> = x.iter().map(|c| c.abs() * n as i64).collect();
    let side = target.iter().copied().max().unwrap_or(0).max(1) as usize;
    Ok((LatticeBox::new(x.len(), side)?, target))
}

fn rate(p: f64, n: usize) -> f64 {
    if p >= 1.0 {
        0.0
    } else {
        -p.ln() / n as f64
    }
}

/// Monte Carlo estimate of the finite-n elementary rate.
pub fn estimate_rate_point(
    dist: &EdgeDistribution,
    x: &[i64],
    zeta: f64,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<RatePoint> {
    estimate_rate_point_with_budget(dist, x, zeta, n, samples, seed, DEFAULT_BUDGET)
}

pub fn estimate_rate_point_with_budget(
    dist: &EdgeDistribution,
    x: &[i64],
    zeta: f64,
    n: usize,
    samples: u64,
    seed: u64,
    budget: u64,
) -> Result<RatePoint> {
    check_domain(dist, x, zeta)?;
    let (lattice, target) = scaled_box(x, n)?;
    let work = samples.saturating_mul(lattice.edge_count() as u64);
    if work > budget {
        return Err(FppError::BudgetExceeded(format!("{work} edge visits exceed the budget {budget}")));
    }
    let t = lattice.index(&target).unwrap();
    let threshold = n as f64 * zeta;
    let hits = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let w = sample_weights(dist, lattice, derive_seed(seed, i))?;
            let tree = shortest_path_tree(&w, None, &[(0, 0.0)], QueueKind::Auto)?;
            Ok(u64::from(tree.dist[t] <= threshold))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let p_ci = wilson_interval(hits, samples, Z95);
    let upper_rate = if p_ci.lower > 0.0 { rate(p_ci.lower, n) } else { f64::INFINITY };
    let lower_rate = rate(p_ci.upper, n);
    let censored = hits == 0;
    let estimate = if censored { lower_rate } else { rate(hits as f64 / samples as f64, n) };
    Ok(RatePoint {
        x: x.to_vec(),
        zeta,
        n,
        estimate,
        ci: Interval { lower: lower_rate, upper: upper_rate },
        method: RateMethod::MonteCarlo,
        censored,
        hits: Some(hits),
        samples: Some(samples),
    })
}

/// Finite-n rate from exhaustive enumeration of the box.
pub fn exact_rate_point(dist: &EdgeDistribution, x: &[i64], zeta: f64, n: usize, cap: u128) -> Result<RatePoint> {
    check_domain(dist, x, zeta)?;
    let (lattice, target) = scaled_box(x, n)?;
    let origin = vec![0i64; x.len()];
    let law = exact_passage_time_law(dist, lattice, &Region::Full, &origin, &target, cap)?;
    let p = law.cdf(n as f64 * zeta).value;
    let r = rate(p, n);
    Ok(RatePoint {
        x: x.to_vec(),
        zeta,
        n,
        estimate: r,
        ci: Interval::point(r),
        method: RateMethod::ExactOracle,
        censored: false,
        hits: None,
        samples: None,
    })
}

pub fn exact_rate_point_default(dist: &EdgeDistribution, x: &[i64], zeta: f64, n: usize) -> Result<RatePoint> {
    exact_rate_point(dist, x, zeta, n, DEFAULT_CAP)
}

/// Upper bound `|x|_1 I(zeta / |x|_1)` from a single straight path.
pub fn cramer_rate_point(dist: &EdgeDistribution, x: &[i64], zeta: f64) -> Result<RatePoint> {
    check_domain(dist, x, zeta)?;
    let k = l1_norm(x) as f64;
    let r = k * cramer_rate(dist, zeta / k)?;
    Ok(bound_point(x, zeta, r, RateMethod::CramerBound))
}

/// Upper bound `-|x|_1 log nu([a, zeta / |x|_1])`.
pub fn crude_rate_point(dist: &EdgeDistribution, x: &[i64], zeta: f64) -> Result<RatePoint> {
    check_domain(dist, x, zeta)?;
    let k = l1_norm(x) as f64;
    Ok(bound_point(x, zeta, crude_rate_bound(dist, k, zeta / k), RateMethod::CrudeBound))
}

fn bound_point(x: &[i64], zeta: f64, r: f64, method: RateMethod) -> RatePoint {
    RatePoint {
        x: x.to_vec(),
        zeta,
        n: 0,
        estimate: r,
        ci: Interval { lower: 0.0, upper: r },
        method,
        censored: false,
        hits: None,
        samples: None,
    }
}

/// Running infimum over an increasing `n` ladder at fixed `(x, zeta)`.
///
/// Every finite-n value bounds the limit from above, so the infimum is the
/// best available upper estimate. Censored points only contribute their
/// lower bounds to the interval.
pub fn fekete_envelope(points: &[RatePoint]) -> Result<RatePoint> {
    let first = points.first().ok_or_else(|| FppError::InvalidArgument("empty n ladder".into()))?;
    for w in points.windows(2) {
        if w[1].n <= w[0].n {
            return Err(FppError::InvalidArgument("the n ladder must be increasing".into()));
        }
    }
    if points.iter().any(|p| p.x != first.x || p.zeta != first.zeta) {
        return Err(FppError::InvalidArgument("ladder points must share (x, zeta)".into()));
    }
    let best = points
        .iter()
        .filter(|p| !p.censored)
        .min_by(|a, b| a.estimate.total_cmp(&b.estimate));
    let lower = points.iter().map(|p| p.ci.lower).fold(f64::INFINITY, f64::min);
    let upper = points.iter().map(|p| p.ci.upper).fold(f64::INFINITY, f64::min);
    Ok(match best {
        Some(b) => RatePoint { ci: Interval { lower, upper }, ..b.clone() },
        None => RatePoint { estimate: lower, ci: Interval { lower, upper }, ..points.last().unwrap().clone() },
    })
}

/// Geometric `zeta` grid from `a |x|_1 (1 + delta)` to `E[tau] |x|_1`.
pub fn zeta_grid(dist: &EdgeDistribution, x: &[i64], points: usize, delta: f64) -> Result<Vec<f64>> {
    let k = l1_norm(x) as f64;
    let lo = dist.support_infimum() * k * (1.0 + delta);
    let hi = dist.mean() * k;
    if points < 2 || !(hi > lo) || lo <= 0.0 {
        return Err(FppError::InvalidArgument(format!("cannot build a geometric grid on [{lo}, {hi}]")));
    }
    let ratio = (hi / lo).powf(1.0 / (points - 1) as f64);
    let mut grid: Vec<f64> = (0..points).map(|i| lo * ratio.powi(i as i32)).collect();
    grid[points - 1] = hi;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sure_event_has_zero_rate() {
        let d = EdgeDistribution::deterministic(1.0).unwrap();
        let p = estimate_rate_point(&d, &[1, 0], 1.5, 4, 64, 1).unwrap();
        assert_eq!(p.estimate, 0.0);
        assert_eq!(p.hits, Some(64));
    }

    #[test]
    fn unit_box_oracle_gives_log_two() {
        let d = EdgeDistribution::fair_two_point(1.0, 2.0).unwrap();
        let p = exact_rate_point_default(&d, &[1, 0], 1.0, 1).unwrap();
        assert!((p.estimate - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(p.ci.width(), 0.0);
        assert!(exact_rate_point_default(&d, &[1, 0], 0.9, 1).is_err());
    }

    #[test]
    fn censored_zero_hits() {
        let d = EdgeDistribution::fair_two_point(1.0, 2.0).unwrap();
        let p = estimate_rate_point(&d, &[1, 0], 1.0, 12, 50, 3).unwrap();
        if p.hits == Some(0) {
            assert!(p.censored);
            assert_eq!(p.ci.upper, f64::INFINITY);
            assert!(p.estimate > 0.0);
        }
    }

    #[test]
    fn rate_decreases_in_zeta() {
        let d = EdgeDistribution::fair_two_point(1.0, 2.0).unwrap();
        let lo = estimate_rate_point(&d, &[1, 0], 1.1, 4, 2000, 9).unwrap();
        let hi = estimate_rate_point(&d, &[1, 0], 1.4, 4, 2000, 9).unwrap();
        // common random numbers: the events are nested sample by sample
        assert!(hi.estimate <= lo.estimate);
    }

    #[test]
    fn envelope_is_an_infimum() {
        let mk = |n, v| RatePoint {
            x: vec![1, 0],
            zeta: 1.2,
            n,
            estimate: v,
            ci: Interval { lower: v - 0.01, upper: v + 0.01 },
            method: RateMethod::MonteCarlo,
            censored: false,
            hits: None,
            samples: None,
        };
        let e = fekete_envelope(&[mk(1, 0.9), mk(2, 0.7), mk(4, 0.72)]).unwrap();
        assert_eq!(e.estimate, 0.7);
        assert_eq!(e.n, 2);
        assert!(fekete_envelope(&[]).is_err());
        assert!(fekete_envelope(&[mk(2, 0.9), mk(1, 0.7)]).is_err());
    }

    #[test]
    fn bound_points() {
        let d = EdgeDistribution::fair_two_point(1.0, 2.0).unwrap();
        let c = cramer_rate_point(&d, &[1, 0], 1.0).unwrap();
        assert!((c.estimate - std::f64::consts::LN_2).abs() < 1e-12);
        let g = zeta_grid(&d, &[2, 1], 5, 0.05).unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[0] - 3.15).abs() < 1e-12);
        assert_eq!(g[4], 4.5);
    }
}
