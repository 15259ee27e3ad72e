use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::path::DiscretePath;
use super::region::Region;
use crate::error::{FppError, Result};
use crate::model::{LatticeBox, WeightField};

/// Largest edge weight for which the bucket queue is used automatically.
pub const BUCKET_WEIGHT_LIMIT: f64 = 64.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueueKind {
    /// Bucket queue for small integer weights, binary heap otherwise.
    #[default]
    Auto,
    BinaryHeap,
    Bucket,
}

#[derive(Clone, Copy, PartialEq)]
struct Key {
    dist: f64,
    hops: u32,
    idx: usize,
}

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.hops.cmp(&other.hops))
            .then(self.idx.cmp(&other.idx))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distances from a source set, ordered lexicographically by (time, hops).
///
/// `hops[v]` is the fewest edges among minimal-time paths, which makes the
/// canonical geodesic independent of the queue implementation.
#[derive(Clone, Debug)]
pub struct ShortestPathTree {
    pub lattice: LatticeBox,
    pub dist: Vec<f64>,
    pub hops: Vec<u32>,
    mask: Option<Vec<bool>>,
}

impl ShortestPathTree {
    pub fn distance(&self, v: usize) -> f64 {
        self.dist[v]
    }

    fn allowed(&self, v: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[v])
    }

    /// Canonical geodesic to `target`: at each step back, the smallest-index
    /// neighbour that is a (time, hops) predecessor. `None` when unreachable.
    pub fn geodesic_indices(&self, w: &WeightField, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut out = vec![target];
        let mut v = target;
        while self.hops[v] > 0 {
            let mut best: Option<usize> = None;
            for (u, slot) in self.lattice.neighbors(v) {
                if !self.allowed(u) || self.hops[u] + 1 != self.hops[v] {
                    continue;
                }
                if self.dist[u] + w.weight(slot) == self.dist[v] && best.is_none_or(|b| u < b) {
                    best = Some(u);
                }
            }
            v = best.expect("predecessor exists for a settled vertex");
            out.push(v);
        }
        out.reverse();
        Some(out)
    }

    pub fn geodesic(&self, w: &WeightField, target: usize) -> Option<DiscretePath> {
        self.geodesic_indices(w, target)
            .map(|idx| DiscretePath::from_indices(&self.lattice, &idx).expect("unit steps"))
    }
}

/// Shortest paths from `sources` (vertex, initial time) inside `mask`.
pub fn shortest_path_tree(
    w: &WeightField,
    mask: Option<Vec<bool>>,
    sources: &[(usize, f64)],
    queue: QueueKind,
) -> Result<ShortestPathTree> {
    let lattice = w.lattice;
    let v = lattice.vertex_count();
    let allowed = |i: usize| mask.as_ref().is_none_or(|m| m[i]);
    let integer_input = w.small_integer_weights(BUCKET_WEIGHT_LIMIT)
        && sources.iter().all(|&(_, d)| d.fract() == 0.0 && d >= 0.0 && d < 1e12);
    let use_bucket = match queue {
        QueueKind::Auto => integer_input,
        QueueKind::BinaryHeap => false,
        QueueKind::Bucket => {
            if !integer_input {
                return Err(FppError::InvalidArgument(
                    "bucket queue needs small integer weights".into(),
                ));
            }
            true
        }
    };
    let mut dist = vec![f64::INFINITY; v];
    let mut hops = vec![u32::MAX; v];
    let mut done = vec![false; v];
    for &(s, d0) in sources {
        if s >= v || !allowed(s) {
            return Err(FppError::OutsideRegion(lattice.coords(s.min(v - 1))));
        }
        if d0 < dist[s] {
            dist[s] = d0;
            hops[s] = 0;
        }
    }

    if use_bucket {
        let width = BUCKET_WEIGHT_LIMIT as usize + 1;
        let mut buckets: Vec<BinaryHeap<Reverse<(u32, usize)>>> = vec![BinaryHeap::new(); width];
        let mut pending = 0usize;
        let mut current = 0u64;
        // Initial sources may be spread beyond one window; seed them lazily.
        let mut seeds: Vec<(u64, usize)> = (0..v)
            .filter(|&s| dist[s].is_finite())
            .map(|s| (dist[s] as u64, s))
            .collect();
        seeds.sort_unstable();
        let mut next_seed = 0usize;
        while pending > 0 || next_seed < seeds.len() {
            if pending == 0 {
                current = seeds[next_seed].0;
            }
            while next_seed < seeds.len() && seeds[next_seed].0 < current + width as u64 {
                let (d, s) = seeds[next_seed];
                if dist[s] == d as f64 && !done[s] {
                    buckets[(d % width as u64) as usize].push(Reverse((hops[s], s)));
                    pending += 1;
                }
                next_seed += 1;
            }
            let b = (current % width as u64) as usize;
            while let Some(Reverse((h, u))) = buckets[b].pop() {
                pending -= 1;
                if done[u] || h != hops[u] || dist[u] != current as f64 {
                    continue;
                }
                done[u] = true;
                for (nb, slot) in lattice.neighbors(u) {
                    if done[nb] || !allowed(nb) {
                        continue;
                    }
                    let nd = dist[u] + w.weight(slot);
                    let nh = h + 1;
                    if nd < dist[nb] || (nd == dist[nb] && nh < hops[nb]) {
                        dist[nb] = nd;
                        hops[nb] = nh;
                        buckets[(nd as u64 % width as u64) as usize].push(Reverse((nh, nb)));
                        pending += 1;
                    }
                }
            }
            current += 1;
        }
    } else {
        let mut heap = BinaryHeap::new();
        for s in 0..v {
            if dist[s].is_finite() {
                heap.push(Reverse(Key { dist: dist[s], hops: 0, idx: s }));
            }
        }
        while let Some(Reverse(k)) = heap.pop() {
            let u = k.idx;
            if done[u] || k.dist != dist[u] || k.hops != hops[u] {
                continue;
            }
            done[u] = true;
            for (nb, slot) in lattice.neighbors(u) {
                if done[nb] || !allowed(nb) {
                    continue;
                }
                let nd = dist[u] + w.weight(slot);
                let nh = k.hops + 1;
                if nd < dist[nb] || (nd == dist[nb] && nh < hops[nb]) {
                    dist[nb] = nd;
                    hops[nb] = nh;
                    heap.push(Reverse(Key { dist: nd, hops: nh, idx: nb }));
                }
            }
        }
    }
    Ok(ShortestPathTree { lattice, dist, hops, mask })
}

/// Single-source tree from vertex `x` within `region`.
pub fn passage_tree(
    w: &WeightField,
    region: &Region,
    x: &[i64],
    queue: QueueKind,
) -> Result<ShortestPathTree> {
    if !region.contains(&w.lattice, x) {
        return Err(FppError::OutsideRegion(x.to_vec()));
    }
    let s = w.lattice.index(x).expect("inside box");
    shortest_path_tree(w, region.mask(&w.lattice)?, &[(s, 0.0)], queue)
}

/// `T_A(x, y)`; `f64::INFINITY` when `y` is unreachable inside `A`.
pub fn restricted_passage_time(region: &Region, x: &[i64], y: &[i64], w: &WeightField) -> Result<f64> {
    restricted_passage_time_with(region, x, y, w, QueueKind::Auto)
}

pub fn restricted_passage_time_with(
    region: &Region,
    x: &[i64],
    y: &[i64],
    w: &WeightField,
    queue: QueueKind,
) -> Result<f64> {
    if !region.contains(&w.lattice, y) {
        return Err(FppError::OutsideRegion(y.to_vec()));
    }
    let tree = passage_tree(w, region, x, queue)?;
    Ok(tree.distance(w.lattice.index(y).unwrap()))
}

/// `T_A(x, y)` together with the canonical geodesic when one exists.
pub fn restricted_geodesic(
    region: &Region,
    x: &[i64],
    y: &[i64],
    w: &WeightField,
) -> Result<(f64, Option<DiscretePath>)> {
    if !region.contains(&w.lattice, y) {
        return Err(FppError::OutsideRegion(y.to_vec()));
    }
    let tree = passage_tree(w, region, x, QueueKind::Auto)?;
    let t = w.lattice.index(y).unwrap();
    Ok((tree.distance(t), tree.geodesic(w, t)))
}

/// Box passage time between two vertices.
pub fn box_passage_time(w: &WeightField, x: &[i64], y: &[i64]) -> Result<f64> {
    restricted_passage_time(&Region::Full, x, y, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{l1, sample_weights, EdgeDistribution};
    use crate::passage_time::path_time;

    fn unit_square(bottom: f64, right: f64, left: f64, top: f64) -> WeightField {
        let b = LatticeBox::new(2, 1).unwrap();
        let d = EdgeDistribution::uniform(0.0, 10.0).unwrap();
        WeightField::from_fn(b, d, |lower, dir| match (lower, dir) {
            ([0, 0], 0) => bottom,
            ([1, 0], 1) => right,
            ([0, 0], 1) => left,
            ([0, 1], 0) => top,
            _ => unreachable!(),
        })
    }

    #[test]
    fn four_cycle() {
        let w = unit_square(1.0, 5.0, 2.0, 1.0);
        let t = box_passage_time(&w, &[0, 0], &[1, 1]).unwrap();
        // simple paths: bottom+right = 6, left+top = 3
        assert_eq!(t, 3.0);
        let (t2, g) = restricted_geodesic(&Region::Full, &[0, 0], &[1, 1], &w).unwrap();
        assert_eq!(t2, 3.0);
        assert_eq!(path_time(&g.unwrap(), &w).unwrap(), 3.0);
    }

    #[test]
    fn deterministic_is_scaled_l1() {
        let d = EdgeDistribution::deterministic(2.0).unwrap();
        let w = sample_weights(&d, LatticeBox::new(3, 5).unwrap(), 1).unwrap();
        let tree = passage_tree(&w, &Region::Full, &[1, 2, 0], QueueKind::Auto).unwrap();
        for i in 0..w.lattice.vertex_count() {
            assert_eq!(tree.dist[i], 2.0 * l1(&[1, 2, 0], &w.lattice.coords(i)) as f64);
        }
    }

    #[test]
    fn strip_forces_the_straight_path() {
        let d = EdgeDistribution::uniform(0.0, 1.0).unwrap();
        let w = sample_weights(&d, LatticeBox::new(2, 4).unwrap(), 3).unwrap();
        let strip = Region::sub_box(vec![0, 2], vec![4, 2]);
        let t = restricted_passage_time(&strip, &[0, 2], &[4, 2], &w).unwrap();
        let p = DiscretePath::new((0..=4).map(|i| vec![i, 2]).collect()).unwrap();
        assert_eq!(t, path_time(&p, &w).unwrap());
        assert!(restricted_passage_time(&strip, &[0, 1], &[4, 2], &w).is_err());
    }

    #[test]
    fn disconnected_region_is_infinite() {
        let d = EdgeDistribution::deterministic(1.0).unwrap();
        let w = sample_weights(&d, LatticeBox::new(2, 3).unwrap(), 1).unwrap();
        let r = Region::Vertices { vertices: vec![vec![0, 0], vec![2, 2]] };
        assert_eq!(restricted_passage_time(&r, &[0, 0], &[2, 2], &w).unwrap(), f64::INFINITY);
        let (_, g) = restricted_geodesic(&r, &[0, 0], &[2, 2], &w).unwrap();
        assert!(g.is_none());
    }

    #[test]
    fn zero_weight_geodesics_terminate() {
        let d = EdgeDistribution::two_point(0.0, 1.0, crate::model::Prob::new(4, 5).unwrap()).unwrap();
        let w = sample_weights(&d, LatticeBox::new(2, 6).unwrap(), 8).unwrap();
        let tree = passage_tree(&w, &Region::Full, &[0, 0], QueueKind::BinaryHeap).unwrap();
        for t in 0..w.lattice.vertex_count() {
            let g = tree.geodesic(&w, t).unwrap();
            assert_eq!(path_time(&g, &w).unwrap(), tree.dist[t]);
            assert_eq!(g.len() as u32, tree.hops[t]);
        }
    }

    #[test]
    fn queues_agree() {
        let d = EdgeDistribution::finite(vec![
            crate::model::Atom { value: 0.0, prob: crate::model::Prob::new(1, 4).unwrap() },
            crate::model::Atom { value: 3.0, prob: crate::model::Prob::new(1, 2).unwrap() },
            crate::model::Atom { value: 64.0, prob: crate::model::Prob::new(1, 4).unwrap() },
        ])
        .unwrap();
        for seed in 0..5 {
            let w = sample_weights(&d, LatticeBox::new(3, 5).unwrap(), seed).unwrap();
            let a = passage_tree(&w, &Region::Full, &[2, 0, 1], QueueKind::BinaryHeap).unwrap();
            let b = passage_tree(&w, &Region::Full, &[2, 0, 1], QueueKind::Bucket).unwrap();
            assert_eq!(a.dist, b.dist);
            assert_eq!(a.hops, b.hops);
            for t in (0..w.lattice.vertex_count()).step_by(7) {
                assert_eq!(a.geodesic_indices(&w, t), b.geodesic_indices(&w, t));
            }
        }
    }
}
