use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dijkstra::{shortest_path_tree, QueueKind};
use super::path::{path_time, DiscretePath};
use crate::error::{FppError, Result};
use crate::model::WeightField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicLengthTable {
    pub n: usize,
    pub b: f64,
    /// `(source, target, edges of the canonical geodesic)`.
    pub pairs: Vec<(Vec<i64>, Vec<i64>, usize)>,
    /// `(L, fraction of pairs whose geodesic has at least L n edges)`.
    pub ladder: Vec<(f64, f64)>,
    pub max_length: usize,
}

/// Canonical-geodesic edge counts of the `b`-truncated field for the box
/// corners plus `random_pairs` seeded pairs.
pub fn geodesic_length_stats(
    w: &WeightField,
    b: f64,
    ladder: &[f64],
    random_pairs: usize,
    seed: u64,
) -> Result<GeodesicLengthTable> {
    let tw = w.truncated(b)?;
    let lat = tw.lattice;
    let v = lat.vertex_count();
    let mut pairs: Vec<(usize, usize)> = vec![(0, v - 1)];
    let far = lat.index(&(0..lat.dim).map(|i| if i == 0 { lat.side as i64 } else { 0 }).collect::<Vec<_>>());
    if let Some(f) = far {
        let opposite = lat.coords(f).iter().map(|&c| lat.side as i64 - c).collect::<Vec<_>>();
        pairs.push((f, lat.index(&opposite).unwrap()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random_pairs {
        pairs.push((rng.random_range(0..v), rng.random_range(0..v)));
    }
    let lens: Vec<usize> = pairs
        .par_iter()
        .map(|&(s, t)| {
            let tree = shortest_path_tree(&tw, None, &[(s, 0.0)], QueueKind::Auto)?;
            Ok(tree.hops[t] as usize)
        })
        .collect::<Result<_>>()?;
    let n = lat.side as f64;
    let ladder = ladder
        .iter()
        .map(|&l| {
            let hits = lens.iter().filter(|&&k| k as f64 >= l * n).count();
            (l, hits as f64 / lens.len() as f64)
        })
        .collect();
    Ok(GeodesicLengthTable {
        n: lat.side,
        b,
        pairs: pairs
            .iter()
            .zip(&lens)
            .map(|(&(s, t), &k)| (lat.coords(s), lat.coords(t), k))
            .collect(),
        ladder,
        max_length: lens.iter().copied().max().unwrap_or(0),
    })
}

/// `M_v`: sum of `(tau_e - b)^+` over the edges at `v`.
pub fn vertex_excess(w: &WeightField, b: f64, v: usize) -> f64 {
    w.lattice
        .neighbors(v)
        .map(|(_, slot)| (w.weight(slot) - b).max(0.0))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcessCheck {
    /// `tau(pi) - tau^(b)(pi)`.
    pub excess: f64,
    /// `sum over vertices of pi of M_v`.
    pub animal_bound: f64,
}

impl ExcessCheck {
    pub fn holds(&self) -> bool {
        self.excess <= self.animal_bound * (1.0 + 1e-12) + 1e-12
    }
}

/// Compares the truncation excess of a self-avoiding path with its vertex sum.
pub fn truncation_excess(w: &WeightField, b: f64, path: &DiscretePath) -> Result<ExcessCheck> {
    if !path.is_self_avoiding() {
        return Err(FppError::InvalidArgument("path must be self-avoiding".into()));
    }
    let full = path_time(path, w)?;
    let cut = path_time(path, &w.truncated(b)?)?;
    let animal_bound = path
        .vertices()
        .iter()
        .map(|v| vertex_excess(w, b, w.lattice.index(v).unwrap()))
        .sum();
    Ok(ExcessCheck { excess: full - cut, animal_bound })
}
