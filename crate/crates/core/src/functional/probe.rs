use rayon::prelude::*;
use serde::Serialize;

use super::formulas::{functional_geodesic_sum, CROSS_CHECK_TOL};
use super::rate::RateFunction;
use crate::elementary_rate::DEFAULT_BUDGET;
use crate::error::{FppError, Result};
use crate::geometry::{build_highway_network, halton_pair, NetworkOptions, NormPlusHighways};
use crate::model::{derive_seed, sample_weights, EdgeDistribution, LatticeBox};
use crate::oracle::{configuration_count, exact_event_probability_with_cap, EventSpec, ExactProbability, DEFAULT_CAP};
use crate::stats::{wilson_interval, Interval, Z95};

/// Functional value through a network seeded by the highways of `d`.
pub fn functional_value<J: RateFunction>(d: &NormPlusHighways, j: &J) -> Result<f64> {
    let net = build_highway_network(d, &NetworkOptions::seeded_by(d))?;
    functional_geodesic_sum(d, &net, j)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub pairs_checked: usize,
    /// Largest `D2 - D1` seen, with the pair achieving it.
    pub witness_gap: f64,
    pub witness: (Vec<f64>, Vec<f64>),
    pub value_smaller_metric: f64,
    pub value_larger_metric: f64,
    pub tolerance: f64,
    pub strict: bool,
}

fn probe_points(d: &NormPlusHighways) -> Vec<Vec<f64>> {
    let mut pts = Vec::new();
    for h in d.highways() {
        pts.extend(h.path.points.iter().cloned());
    }
    pts
}

/// Checks `D1 <= D2` on sampled pairs, requires a pair where they differ and
/// compares the functionals, which must increase strictly from `D2` to `D1`.
pub fn strict_monotonicity_probe<J: RateFunction>(
    d1: &NormPlusHighways,
    d2: &NormPlusHighways,
    j: &J,
    pairs: usize,
) -> Result<MonotonicityReport> {
    if d1.dim() != d2.dim() {
        return Err(FppError::Geometry("dimension mismatch".into()));
    }
    let dim = d1.dim();
    let mut list: Vec<(Vec<f64>, Vec<f64>)> = (0..pairs as u64).map(|i| halton_pair(i, dim)).collect();
    let mut special = probe_points(d1);
    special.extend(probe_points(d2));
    special.push(vec![0.0; dim]);
    special.push(vec![1.0; dim]);
    for a in 0..special.len() {
        for b in a + 1..special.len() {
            list.push((special[a].clone(), special[b].clone()));
        }
    }
    let gaps: Vec<(f64, f64)> = list.par_iter().map(|(x, y)| (d1.eval(x, y), d2.eval(x, y))).collect();
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, &(a, b)) in gaps.iter().enumerate() {
        if a > b + 1e-12 * b.max(1.0) {
            return Err(FppError::Precondition(format!(
                "D1 > D2 at {:?} -> {:?}: {a} > {b}",
                list[i].0, list[i].1
            )));
        }
        if b - a > best.0 {
            best = (b - a, i);
        }
    }
    if !(best.0 > 1e-9) {
        return Err(FppError::Precondition("the metrics agree on every sampled pair".into()));
    }
    let f1 = functional_value(d1, j)?;
    let f2 = functional_value(d2, j)?;
    if !f2.is_finite() {
        return Err(FppError::Precondition("the functional of D2 is not finite".into()));
    }
    let tolerance = 2.0 * CROSS_CHECK_TOL * f1.abs().max(f2.abs()).max(1.0);
    Ok(MonotonicityReport {
        pairs_checked: list.len(),
        witness_gap: best.0,
        witness: list[best.1].clone(),
        value_smaller_metric: f1,
        value_larger_metric: f2,
        tolerance,
        strict: f1 > f2 + tolerance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdTrendOptions {
    pub epsilon: f64,
    pub ns: Vec<usize>,
    /// Monte Carlo samples for rungs beyond the enumeration cap.
    pub samples: u64,
    pub seed: u64,
    pub cap: u128,
    pub budget: u64,
}

impl Default for LdTrendOptions {
    fn default() -> Self {
        LdTrendOptions { epsilon: 0.1, ns: vec![1, 2], samples: 1000, seed: 0, cap: DEFAULT_CAP, budget: DEFAULT_BUDGET }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LdMethod {
    ExactOracle,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LdRow {
    pub n: usize,
    pub method: LdMethod,
    pub p: f64,
    pub exact: Option<ExactProbability>,
    pub p_ci: Interval,
    /// `-(1/n) log p`; infinite when `p = 0`.
    pub rate: f64,
    pub rate_ci: Interval,
    /// No Monte Carlo hit: only the lower end of `rate_ci` is informative.
    pub censored: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LdTrend {
    pub epsilon: f64,
    pub rows: Vec<LdRow>,
    /// Functional value for side-by-side reading; no convergence is claimed.
    pub functional: Option<f64>,
}

fn rate_of(p: f64, n: usize) -> f64 {
    if p <= 0.0 {
        f64::INFINITY
    } else {
        (-p.ln() / n as f64).max(0.0)
    }
}

/// Box version of the lower large-deviation event: on the box of side `n`,
/// `T(p, q) <= n (D(p/n, q/n) + epsilon)` for every vertex pair.
pub fn ld_lower_event(d: &NormPlusHighways, n: usize, epsilon: f64) -> Result<(LatticeBox, EventSpec)> {
    let lattice = LatticeBox::new(d.dim(), n)?;
    let v = lattice.vertex_count();
    let pts: Vec<Vec<f64>> =
        (0..v).map(|i| lattice.coords(i).iter().map(|&c| c as f64 / n as f64).collect()).collect();
    let thresholds: Vec<f64> = (0..v * v)
        .into_par_iter()
        .map(|k| {
            let (p, q) = (k / v, k % v);
            n as f64 * (d.eval(&pts[p], &pts[q]) + epsilon)
        })
        .collect();
    Ok((lattice, EventSpec::LdLower { thresholds }))
}

/// `P(LD_n^-(D, epsilon))` along an `n` ladder, exact where the enumeration
/// fits under `cap` and Monte Carlo otherwise.
pub fn empirical_ld_trend(
    d: &NormPlusHighways,
    dist: &EdgeDistribution,
    opts: &LdTrendOptions,
    functional: Option<f64>,
) -> Result<LdTrend> {
    if !(opts.epsilon > 0.0) || opts.ns.is_empty() || opts.ns.contains(&0) {
        return Err(FppError::InvalidArgument("need epsilon > 0 and a ladder of positive n".into()));
    }
    let mut rows = Vec::new();
    for (r, &n) in opts.ns.iter().enumerate() {
        let (lattice, event) = ld_lower_event(d, n, opts.epsilon)?;
        let exact_ok = dist
            .atoms()
            .is_some_and(|a| configuration_count(a.len(), lattice.edge_count(), opts.cap).is_ok());
        if exact_ok {
            let p = exact_event_probability_with_cap(&event, dist, lattice, opts.cap)?;
            let rate = rate_of(p.value, n);
            rows.push(LdRow {
                n,
                method: LdMethod::ExactOracle,
                p: p.value,
                p_ci: Interval::point(p.value),
                rate,
                rate_ci: Interval::point(rate),
                censored: false,
                exact: Some(p),
            });
            continue;
        }
        let work = opts
            .samples
            .saturating_mul(lattice.edge_count() as u64)
            .saturating_mul(lattice.vertex_count() as u64);
        if work > opts.budget {
            return Err(FppError::BudgetExceeded(format!("n = {n}: {work} edge visits exceed {}", opts.budget)));
        }
        let seed = derive_seed(opts.seed, r as u64);
        let hits = (0..opts.samples)
            .into_par_iter()
            .map(|i| -> Result<u64> {
                let w = sample_weights(dist, lattice, derive_seed(seed, i))?;
                Ok(u64::from(event.holds(&w)?))
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        let ci = wilson_interval(hits, opts.samples, Z95);
        let p = hits as f64 / opts.samples as f64;
        rows.push(LdRow {
            n,
            method: LdMethod::MonteCarlo,
            p,
            exact: None,
            p_ci: ci,
            rate: if hits == 0 { rate_of(ci.upper, n) } else { rate_of(p, n) },
            rate_ci: Interval { lower: rate_of(ci.upper, n), upper: rate_of(ci.lower, n) },
            censored: hits == 0,
        });
    }
    Ok(LdTrend { epsilon: opts.epsilon, rows, functional })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::AnalyticRate;
    use crate::geometry::{Highway, WeightedL1};

    fn l1() -> WeightedL1 {
        WeightedL1::scaled_l1(2, 1.0).unwrap()
    }

    fn diagonal(lambda: f64) -> NormPlusHighways {
        NormPlusHighways::new(l1(), vec![Highway::straight(&[0.0, 0.0], &[1.0, 1.0], lambda).unwrap()]).unwrap()
    }

    #[test]
    fn halving_speed_increases_the_value() {
        let j = AnalyticRate::positive_part(l1());
        let r = strict_monotonicity_probe(&diagonal(0.4), &diagonal(0.5), &j, 32).unwrap();
        assert!((r.value_larger_metric - 1.0).abs() < 1e-12);
        assert!((r.value_smaller_metric - 1.2).abs() < 1e-12);
        assert!(r.strict);
    }

    #[test]
    fn probe_rejects_equal_and_misordered_metrics() {
        let j = AnalyticRate::positive_part(l1());
        let e = strict_monotonicity_probe(&diagonal(0.5), &diagonal(0.5), &j, 16);
        assert!(matches!(e, Err(FppError::Precondition(_))));
        let e = strict_monotonicity_probe(&diagonal(0.5), &diagonal(0.4), &j, 16);
        assert!(matches!(e, Err(FppError::Precondition(_))));
    }

    #[test]
    fn ld_trend_exact_rungs() {
        let dist = EdgeDistribution::fair_two_point(1.0, 2.0).unwrap();
        let d = NormPlusHighways::norm(WeightedL1::scaled_l1(2, 0.9).unwrap());
        // adjacent pairs need weight 1 on every edge; diagonal pairs then hold
        let t = empirical_ld_trend(&d, &dist, &LdTrendOptions { epsilon: 0.2, ns: vec![1], ..Default::default() }, None)
            .unwrap();
        assert!(t.rows[0].exact.as_ref().unwrap().equals_ratio(1, 16));
        // a cap of b l1 with a huge epsilon is sure
        let big = NormPlusHighways::norm(WeightedL1::scaled_l1(2, 2.0).unwrap());
        let t = empirical_ld_trend(&big, &dist, &LdTrendOptions { epsilon: 10.0, ns: vec![1, 2], ..Default::default() }, None)
            .unwrap();
        for row in &t.rows {
            assert_eq!(row.p, 1.0);
            assert_eq!(row.rate, 0.0);
        }
    }

    #[test]
    fn ld_probability_shrinks_with_epsilon() {
        let dist = EdgeDistribution::fair_two_point(1.0, 2.0).unwrap();
        let d = NormPlusHighways::norm(WeightedL1::scaled_l1(2, 1.2).unwrap());
        let mut last = f64::INFINITY;
        for eps in [0.8, 0.4, 0.2, 0.05] {
            let t = empirical_ld_trend(&d, &dist, &LdTrendOptions { epsilon: eps, ns: vec![1], ..Default::default() }, None)
                .unwrap();
            assert!(t.rows[0].p <= last);
            last = t.rows[0].p;
        }
    }

    #[test]
    fn monte_carlo_rungs_and_budget() {
        let dist = EdgeDistribution::uniform(1.0, 2.0).unwrap();
        let d = NormPlusHighways::norm(WeightedL1::scaled_l1(2, 1.5).unwrap());
        let opts = LdTrendOptions { epsilon: 0.1, ns: vec![2], samples: 200, seed: 5, ..Default::default() };
        let t = empirical_ld_trend(&d, &dist, &opts, Some(0.0)).unwrap();
        assert_eq!(t.rows[0].method, LdMethod::MonteCarlo);
        assert!(t.rows[0].p_ci.contains(t.rows[0].p));
        let tight = LdTrendOptions { budget: 10, ..opts };
        assert!(matches!(empirical_ld_trend(&d, &dist, &tight, None), Err(FppError::BudgetExceeded(_))));
    }
}
