use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::enumerate::{exact_law, key_time, time_key, ExactProbability};
use super::event::EventSpec;
use crate::error::{FppError, Result};
use crate::model::{big_to_f64, derive_seed, sample_weights, EdgeDistribution, LatticeBox};
use crate::passage_time::{shortest_path_tree, QueueKind};
use crate::stats::{wilson_interval, Interval, Z95};

fn ser_big<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Box surrogate of supermultiplicativity:
/// `P(T(0, x1+x2) <= t1+t2) >= P(T(0, x1) <= t1) P(T(x1, x1+x2) <= t2)`,
/// all passage times restricted to the box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FkgReport {
    pub t1: f64,
    pub t2: f64,
    pub lhs: ExactProbability,
    pub first: ExactProbability,
    pub second: ExactProbability,
    #[serde(serialize_with = "ser_big")]
    pub slack: BigRational,
}

impl FkgReport {
    pub fn holds(&self) -> bool {
        self.slack >= BigRational::zero()
    }
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Exact FKG slack for every `(t1, t2)` in the grid, from one enumeration.
pub fn fkg_grid(
    dist: &EdgeDistribution,
    lattice: LatticeBox,
    x1: &[i64],
    x2: &[i64],
    t1s: &[f64],
    t2s: &[f64],
    cap: u128,
) -> Result<Vec<FkgReport>> {
    let origin = vec![0i64; lattice.dim];
    let mid = x1.to_vec();
    let end = add(x1, x2);
    for p in [&origin, &mid, &end] {
        if !lattice.contains(p) {
            return Err(FppError::OutsideRegion(p.clone()));
        }
    }
    let (o, m, e) = (
        lattice.index(&origin).unwrap(),
        lattice.index(&mid).unwrap(),
        lattice.index(&end).unwrap(),
    );
    let law = exact_law(dist, lattice, None, cap, |w| {
        let a = shortest_path_tree(w, None, &[(o, 0.0)], QueueKind::Auto)?;
        let b = shortest_path_tree(w, None, &[(m, 0.0)], QueueKind::Auto)?;
        Ok((time_key(a.dist[e]), time_key(a.dist[m]), time_key(b.dist[e])))
    })?;
    let mut out = Vec::new();
    for &t1 in t1s {
        for &t2 in t2s {
            let lhs = law.probability(|k| key_time(k.0) <= t1 + t2);
            let first = law.probability(|k| key_time(k.1) <= t1);
            let second = law.probability(|k| key_time(k.2) <= t2);
            let slack = lhs.exact.clone().unwrap() - first.exact.clone().unwrap() * second.exact.clone().unwrap();
            out.push(FkgReport { t1, t2, lhs, first, second, slack });
        }
    }
    Ok(out)
}

pub fn fkg_supermultiplicativity_check(
    dist: &EdgeDistribution,
    lattice: LatticeBox,
    x1: &[i64],
    x2: &[i64],
    t1: f64,
    t2: f64,
    cap: u128,
) -> Result<FkgReport> {
    Ok(fkg_grid(dist, lattice, x1, x2, &[t1], &[t2], cap)?.remove(0))
}

/// `P_n = P(T_strip(0, n e1) <= n zeta)` on the strip `[0,n] x [0,1]`, exactly.
pub fn strip_probability(dist: &EdgeDistribution, n: usize, zeta: f64, cap: u128) -> Result<ExactProbability> {
    let lattice = LatticeBox::new(2, n)?;
    let strip = crate::passage_time::Region::sub_box(vec![0, 0], vec![n as i64, 1]);
    let law = super::enumerate::exact_passage_time_law(dist, lattice, &strip, &[0, 0], &[n as i64, 0], cap)?;
    Ok(law.cdf(n as f64 * zeta))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeketeReport {
    pub zeta: f64,
    /// `(n, P_n)` for `n = 1..=n_max`.
    pub probabilities: Vec<(usize, ExactProbability)>,
    /// `(n, m, P_{n+m} - P_n P_m)` as floats; every entry is checked exactly.
    pub slacks: Vec<(usize, usize, f64)>,
    pub holds: bool,
}

/// Supermultiplicativity `P_{n+m} >= P_n P_m` of the strip sequence.
pub fn fekete_strip_check(dist: &EdgeDistribution, zeta: f64, n_max: usize, cap: u128) -> Result<FeketeReport> {
    let probs: Vec<(usize, ExactProbability)> = (1..=n_max)
        .map(|n| strip_probability(dist, n, zeta, cap).map(|p| (n, p)))
        .collect::<Result<_>>()?;
    let mut slacks = Vec::new();
    let mut holds = true;
    for n in 1..=n_max {
        for m in 1..=n_max - n {
            let pn = probs[n - 1].1.exact.clone().unwrap();
            let pm = probs[m - 1].1.exact.clone().unwrap();
            let pnm = probs[n + m - 1].1.exact.clone().unwrap();
            let s = pnm - pn * pm;
            holds &= s >= BigRational::zero();
            slacks.push((n, m, big_to_f64(&s)));
        }
    }
    Ok(FeketeReport { zeta, probabilities: probs, slacks, holds })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub hits: u64,
    pub samples: u64,
    pub p: f64,
    pub ci: Interval,
}

/// Monte Carlo frequency of `event` over independent fields.
pub fn monte_carlo_probability(
    event: &EventSpec,
    dist: &EdgeDistribution,
    lattice: LatticeBox,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    event.validate(&lattice)?;
    let hits = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let w = sample_weights(dist, lattice, derive_seed(seed, i))?;
            Ok(u64::from(event.holds(&w)?))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(McEstimate {
        hits,
        samples,
        p: hits as f64 / samples as f64,
        ci: wilson_interval(hits, samples, Z95),
    })
}

/// Oracle record: exact value next to the Monte Carlo estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub event: String,
    pub p_exact: ExactProbability,
    pub p_mc: Option<f64>,
    pub ci: Option<Interval>,
}
