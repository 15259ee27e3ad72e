use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dijkstra::{shortest_path_tree, QueueKind};
use crate::error::{FppError, Result};
use crate::model::WeightField;

/// Interpolated, `b`-capped extension of the truncated box metric to `[0,1]^d`.
///
/// With weights capped at `b`, the extension reduces to
/// `min(b|x-y|_1, min_{p,q} A(x,p) + T(p,q) + A(y,q))` where `A(x,p)` is the
/// cheapest way to reach vertex `p`: go at cost `b` to the nearest point of an
/// edge at `p`, then along that edge at its own rate.
#[derive(Clone, Debug)]
pub struct ContinuousMetric {
    field: WeightField,
    pub b: f64,
}

/// Distances from one point of `[0,1]^d` to every vertex, in lattice units.
#[derive(Clone, Debug)]
pub struct ContinuousSource {
    point: Vec<f64>,
    dist: Vec<f64>,
}

impl ContinuousMetric {
    pub fn new(w: &WeightField, b: f64) -> Result<Self> {
        if !(b >= w.distribution.support_infimum()) || !b.is_finite() {
            return Err(FppError::InvalidArgument(format!(
                "truncation level {b} below the support infimum {}",
                w.distribution.support_infimum()
            )));
        }
        Ok(ContinuousMetric { field: w.truncated(b)?, b })
    }

    pub fn n(&self) -> usize {
        self.field.lattice.side
    }

    pub fn truncated_field(&self) -> &WeightField {
        &self.field
    }

    fn lattice_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        let lat = &self.field.lattice;
        if x.len() != lat.dim {
            return Err(FppError::InvalidArgument("point dimension mismatch".into()));
        }
        if x.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(FppError::OutsideDomain(format!("{x:?} is not in [0,1]^d")));
        }
        Ok(x.iter().map(|c| c * lat.side as f64).collect())
    }

    /// `A(X, p)` for every vertex `p`, with `X` in lattice units.
    fn access(&self, xl: &[f64]) -> Vec<(usize, f64)> {
        let lat = &self.field.lattice;
        let b = self.b;
        (0..lat.vertex_count())
            .map(|p| {
                let pc = lat.coords(p);
                let base: f64 = xl.iter().zip(&pc).map(|(x, &c)| (x - c as f64).abs()).sum();
                let mut best = f64::INFINITY;
                for (q, slot) in lat.neighbors(p) {
                    let dir = (0..lat.dim).find(|&i| lat.coord(q, i) != pc[i] as usize).unwrap();
                    let sign = lat.coord(q, dir) as f64 - pc[dir] as f64;
                    let along = ((xl[dir] - pc[dir] as f64) * sign).clamp(0.0, 1.0);
                    // distance from X to the clamped point on the edge
                    let off = base - (xl[dir] - pc[dir] as f64).abs()
                        + (xl[dir] - (pc[dir] as f64 + sign * along)).abs();
                    best = best.min(b * off + self.field.weight(slot) * along);
                }
                (p, best)
            })
            .collect()
    }

    pub fn source(&self, x: &[f64]) -> Result<ContinuousSource> {
        let xl = self.lattice_point(x)?;
        let init = self.access(&xl);
        let tree = shortest_path_tree(&self.field, None, &init, QueueKind::BinaryHeap)?;
        Ok(ContinuousSource { point: xl, dist: tree.dist })
    }

    pub fn distance_from(&self, src: &ContinuousSource, y: &[f64]) -> Result<f64> {
        let yl = self.lattice_point(y)?;
        let cap: f64 = self.b * src.point.iter().zip(&yl).map(|(a, c)| (a - c).abs()).sum::<f64>();
        let via = self
            .access(&yl)
            .into_iter()
            .map(|(q, a)| src.dist[q] + a)
            .fold(f64::INFINITY, f64::min);
        Ok(cap.min(via) / self.n() as f64)
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let src = self.source(x)?;
        self.distance_from(&src, y)
    }
}

/// Free-function constructor.
pub fn continuous_metric(w: &WeightField, b: f64) -> Result<ContinuousMetric> {
    ContinuousMetric::new(w, b)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapOptions {
    /// Uniformly random evaluation points.
    pub random_points: usize,
    /// Grid vertices included (spread evenly over the row-major order).
    pub grid_points: usize,
    /// Edge midpoints included.
    pub edge_midpoints: usize,
    pub seed: u64,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions { random_points: 24, grid_points: 12, edge_midpoints: 12, seed: 0 }
    }
}

impl GapOptions {
    pub fn grid_only(points: usize) -> Self {
        GapOptions { random_points: 0, grid_points: points, edge_midpoints: 0, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gap: f64,
    /// The almost-sure bound `2bd/n`.
    pub bound: f64,
    pub points: usize,
    pub worst_pair: Option<(Vec<f64>, Vec<f64>)>,
}

/// Largest `|T_hat^(b) - T_tilde|` over an evaluation set.
pub fn uniform_gap(w: &WeightField, b: f64, opts: &GapOptions) -> Result<GapReport> {
    let metric = ContinuousMetric::new(w, b)?;
    let lat = w.lattice;
    let n = lat.side as f64;
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let v = lat.vertex_count();
    let g = opts.grid_points.min(v);
    for k in 0..g {
        let idx = if g <= 1 { 0 } else { k * (v - 1) / (g - 1) };
        pts.push(lat.coords(idx).iter().map(|&c| c as f64 / n).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_points {
        pts.push((0..lat.dim).map(|_| rng.random::<f64>()).collect());
    }
    let edges: Vec<usize> = lat.edges().collect();
    for _ in 0..opts.edge_midpoints {
        let e = edges[rng.random_range(0..edges.len())];
        let (lo, hi, _) = lat.edge_endpoints(e);
        let (a, c) = (lat.coords(lo), lat.coords(hi));
        pts.push(a.iter().zip(&c).map(|(p, q)| (p + q) as f64 / (2.0 * n)).collect());
    }
    let floors: Vec<usize> = pts
        .iter()
        .map(|p| lat.index(&lat.grid_floor(p)?).ok_or_else(|| FppError::OutsideDomain("point".into())))
        .collect::<Result<_>>()?;
    let tf = metric.truncated_field();
    let rows: Vec<(f64, usize, usize)> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let src = metric.source(&pts[i])?;
            let tree = shortest_path_tree(tf, None, &[(floors[i], 0.0)], QueueKind::Auto)?;
            let mut worst = (0.0, i, i);
            for j in 0..pts.len() {
                let hat = tree.dist[floors[j]] / n;
                let tilde = metric.distance_from(&src, &pts[j])?;
                let gap = (hat - tilde).abs();
                if gap > worst.0 {
                    worst = (gap, i, j);
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    let worst = rows.into_iter().fold((0.0, 0, 0), |a, r| if r.0 > a.0 { r } else { a });
    Ok(GapReport {
        gap: worst.0,
        bound: 2.0 * b * lat.dim as f64 / n,
        points: pts.len(),
        worst_pair: (worst.0 > 0.0).then(|| (pts[worst.1].clone(), pts[worst.2].clone())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_weights, EdgeDistribution, LatticeBox};
    use crate::passage_time::rescaled_distance;

    #[test]
    fn deterministic_gap_within_bound() {
        let d = EdgeDistribution::deterministic(1.0).unwrap();
        let w = sample_weights(&d, LatticeBox::new(2, 8).unwrap(), 0).unwrap();
        let r = uniform_gap(&w, 1.0, &GapOptions::default()).unwrap();
        assert!(r.gap <= 4.0 / 8.0 + 1e-12);
        assert_eq!(r.bound, 0.5);
    }

    #[test]
    fn grid_only_gap_is_zero() {
        let d = EdgeDistribution::uniform(0.5, 3.0).unwrap();
        let w = sample_weights(&d, LatticeBox::new(2, 4).unwrap(), 9).unwrap();
        let r = uniform_gap(&w, 2.0, &GapOptions::grid_only(25)).unwrap();
        assert!(r.gap <= 1e-12, "{}", r.gap);
    }

    #[test]
    fn agrees_with_truncated_metric_on_grid() {
        let d = EdgeDistribution::fair_two_point(1.0, 5.0).unwrap();
        let w = sample_weights(&d, LatticeBox::new(3, 3).unwrap(), 2).unwrap();
        let m = ContinuousMetric::new(&w, 2.0).unwrap();
        let t = w.truncated(2.0).unwrap();
        for (x, y) in [([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]), ([1.0 / 3.0, 0.0, 2.0 / 3.0], [1.0, 1.0 / 3.0, 0.0])] {
            let a = m.distance(&x, &y).unwrap();
            let b = rescaled_distance(&t, &x, &y).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn edge_midpoint_to_endpoint() {
        let d = EdgeDistribution::fair_two_point(1.0, 5.0).unwrap();
        let w = sample_weights(&d, LatticeBox::new(2, 4).unwrap(), 6).unwrap();
        let b = 3.0;
        let m = ContinuousMetric::new(&w, b).unwrap();
        let lat = w.lattice;
        for e in lat.edges().take(10) {
            let (lo, hi, _) = lat.edge_endpoints(e);
            let (a, c) = (lat.coords(lo), lat.coords(hi));
            let mid: Vec<f64> = a.iter().zip(&c).map(|(p, q)| (p + q) as f64 / 8.0).collect();
            let end: Vec<f64> = a.iter().map(|&p| p as f64 / 4.0).collect();
            let expect = 0.5 * w.weight(e).min(b) / 4.0;
            assert!((m.distance(&mid, &end).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn capped_by_b_l1_and_symmetric() {
        let d = EdgeDistribution::exponential(1.0, 0.0).unwrap();
        let w = sample_weights(&d, LatticeBox::new(2, 5).unwrap(), 4).unwrap();
        let m = ContinuousMetric::new(&w, 1.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..30 {
            let x: Vec<f64> = (0..2).map(|_| rng.random()).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.random()).collect();
            let z: Vec<f64> = (0..2).map(|_| rng.random()).collect();
            let l1: f64 = x.iter().zip(&y).map(|(a, c)| (a - c).abs()).sum();
            let dxy = m.distance(&x, &y).unwrap();
            assert!(dxy <= 1.5 * l1 + 1e-12);
            assert!((dxy - m.distance(&y, &x).unwrap()).abs() < 1e-12);
            assert!(dxy <= m.distance(&x, &z).unwrap() + m.distance(&z, &y).unwrap() + 1e-12);
            assert_eq!(m.distance(&x, &x).unwrap(), 0.0);
        }
    }
}
