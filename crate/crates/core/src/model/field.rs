use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distribution::EdgeDistribution;
use super::lattice::LatticeBox;
use crate::error::{FppError, Result};

/// splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the `index`-th replicate derived from a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master ^ 0x5851_f42d_4c95_7f2d).wrapping_add(index))
}

/// Seed of one edge, a function of its lattice coordinates only.
pub fn edge_seed(master: u64, lower: &[i64], dir: usize) -> u64 {
    let mut h = mix64(master ^ (lower.len() as u64).wrapping_mul(0x2545_f491_4f6c_dd1d));
    for &c in lower {
        h = mix64(h ^ (c as u64));
    }
    mix64(h ^ (dir as u64).wrapping_add(0xa076_1d64_78bd_642f))
}

/// Uniform variate in `[0, 1)` driving one edge.
pub fn edge_uniform(master: u64, lower: &[i64], dir: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(edge_seed(master, lower, dir));
    rng.random::<f64>()
}

/// A realized assignment of passage times to the edges of a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightField {
    pub lattice: LatticeBox,
    /// Padded slot storage, `f64::INFINITY` on unused slots.
    weights: Vec<f64>,
    pub master_seed: u64,
    pub distribution: EdgeDistribution,
}

impl WeightField {
    /// Builds a field from weights listed in increasing edge-slot order.
    pub fn from_edge_weights(
        lattice: LatticeBox,
        distribution: EdgeDistribution,
        edge_weights: &[f64],
    ) -> Result<Self> {
        if edge_weights.len() != lattice.edge_count() {
            return Err(FppError::InvalidArgument(format!(
                "expected {} edge weights, got {}",
                lattice.edge_count(),
                edge_weights.len()
            )));
        }
        let mut weights = vec![f64::INFINITY; lattice.edge_slots()];
        for (slot, &w) in lattice.edges().zip(edge_weights) {
            if !(w >= 0.0) {
                return Err(FppError::InvalidArgument(format!("negative weight {w}")));
            }
            weights[slot] = w;
        }
        Ok(WeightField { lattice, weights, master_seed: 0, distribution })
    }

    /// Builds a field by evaluating `f(lower_coords, dir)` on every edge.
    pub fn from_fn(
        lattice: LatticeBox,
        distribution: EdgeDistribution,
        f: impl Fn(&[i64], usize) -> f64 + Sync,
    ) -> Self {
        let v = lattice.vertex_count();
        let weights = (0..lattice.edge_slots())
            .into_par_iter()
            .map(|slot| {
                let (dir, lower) = (slot / v, slot % v);
                if lattice.coord(lower, dir) < lattice.side {
                    f(&lattice.coords(lower), dir)
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        WeightField { lattice, weights, master_seed: 0, distribution }
    }

    pub fn weight(&self, slot: usize) -> f64 {
        self.weights[slot]
    }

    pub fn slots(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of the edge between two vertex indices.
    pub fn weight_between(&self, a: usize, b: usize) -> Option<f64> {
        self.lattice.edge_between(a, b).map(|s| self.weights[s])
    }

    /// Weights of real edges in increasing slot order.
    pub fn edge_weights(&self) -> Vec<f64> {
        self.lattice.edges().map(|s| self.weights[s]).collect()
    }

    pub fn set_weight(&mut self, slot: usize, w: f64) -> Result<()> {
        if !self.lattice.is_edge_slot(slot) || !(w >= 0.0) {
            return Err(FppError::InvalidArgument(format!("cannot set slot {slot} to {w}")));
        }
        self.weights[slot] = w;
        Ok(())
    }

    /// Edgewise `min(tau, b)` with the truncated law.
    pub fn truncated(&self, b: f64) -> Result<Self> {
        let distribution = self.distribution.truncate(b)?;
        let weights = self
            .weights
            .iter()
            .map(|&w| if w.is_finite() { w.min(b) } else { w })
            .collect();
        Ok(WeightField {
            lattice: self.lattice,
            weights,
            master_seed: self.master_seed,
            distribution,
        })
    }

    /// True when every weight is a small nonnegative integer (bucket-queue eligible).
    pub fn small_integer_weights(&self, limit: f64) -> bool {
        self.lattice.edges().all(|s| {
            let w = self.weights[s];
            w.fract() == 0.0 && w <= limit
        })
    }
}

/// Samples an i.i.d. field; deterministic in `(dist, lattice, seed)`.
pub fn sample_weights(dist: &EdgeDistribution, lattice: LatticeBox, seed: u64) -> Result<WeightField> {
    dist.validate()?;
    lattice.validate()?;
    let mut field = WeightField::from_fn(lattice, dist.clone(), |lower, dir| {
        dist.quantile(edge_uniform(seed, lower, dir))
    });
    field.master_seed = seed;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::distribution::Prob;

    #[test]
    fn deterministic_field() {
        let d = EdgeDistribution::deterministic(1.0).unwrap();
        let f = sample_weights(&d, LatticeBox::new(2, 3).unwrap(), 7).unwrap();
        let w = f.edge_weights();
        assert_eq!(w.len(), 24);
        assert!(w.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn two_point_support_and_determinism() {
        let d = EdgeDistribution::two_point(1.0, 2.0, Prob::new(1, 2).unwrap()).unwrap();
        let b = LatticeBox::new(2, 1).unwrap();
        let f = sample_weights(&d, b, 99).unwrap();
        assert_eq!(f.edge_weights().len(), 4);
        assert!(f.edge_weights().iter().all(|&x| x == 1.0 || x == 2.0));
        assert_eq!(f, sample_weights(&d, b, 99).unwrap());
    }

    #[test]
    fn enlarging_the_box_preserves_shared_edges() {
        let d = EdgeDistribution::uniform(0.0, 1.0).unwrap();
        let small = sample_weights(&d, LatticeBox::new(2, 3).unwrap(), 5).unwrap();
        let big = sample_weights(&d, LatticeBox::new(2, 6).unwrap(), 5).unwrap();
        for e in small.lattice.edges() {
            let (lo, hi, _) = small.lattice.edge_endpoints(e);
            let a = big.lattice.index(&small.lattice.coords(lo)).unwrap();
            let b = big.lattice.index(&small.lattice.coords(hi)).unwrap();
            assert_eq!(small.weight(e), big.weight_between(a, b).unwrap());
        }
    }

    #[test]
    fn truncation_coupling() {
        let d = EdgeDistribution::exponential(1.0, 0.0).unwrap();
        let b = LatticeBox::new(3, 3).unwrap();
        let f = sample_weights(&d, b, 11).unwrap();
        let t = f.truncated(0.8).unwrap();
        let direct = sample_weights(&d.truncate(0.8).unwrap(), b, 11).unwrap();
        for e in b.edges() {
            assert_eq!(t.weight(e), f.weight(e).min(0.8));
            assert_eq!(direct.weight(e), t.weight(e));
        }
    }

    #[test]
    fn replicate_seeds_are_uncorrelated() {
        // Lag-1 correlation of the first-edge uniform across replicate seeds.
        let m = 20_000;
        let u: Vec<f64> = (0..m).map(|i| edge_uniform(derive_seed(3, i), &[0, 0], 0)).collect();
        let mean = u.iter().sum::<f64>() / m as f64;
        let var = u.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m as f64;
        let cov = u.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / (m - 1) as f64;
        // 4 standard errors of a null correlation estimate
        assert!((cov / var).abs() < 4.0 / (m as f64).sqrt());
        assert!((mean - 0.5).abs() < 4.0 * (1.0 / 12.0 / m as f64).sqrt());
    }
}
