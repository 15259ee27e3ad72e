//! Edge laws, the lattice box and reproducible weight fields.

mod distribution;
mod field;
mod lattice;

pub use distribution::{big_to_f64, Atom, EdgeDistribution, MomentClass, Prob};
pub use field::{derive_seed, edge_seed, edge_uniform, mix64, sample_weights, WeightField};
pub use lattice::{l1, LatticeBox};

use num_rational::BigRational;

use crate::error::{FppError, Result};

/// Bond percolation threshold on `Z^d`.
///
/// d = 2 is exact (Kesten). d = 3 is a numerical estimate (Lorenz & Ziff 1998,
/// 0.2488126), not an exact constant.
pub fn critical_probability(d: usize) -> Result<f64> {
    match d {
        2 => Ok(0.5),
        3 => Ok(0.248_812_6),
        _ => Err(FppError::UnknownCriticalProbability(d)),
    }
}

/// Whether `P(tau = 0) < p_c(d)`.
pub fn subcritical_atom_check(dist: &EdgeDistribution, d: usize) -> Result<bool> {
    let pc = critical_probability(d)?;
    dist.validate()?;
    if d == 2 {
        if let Some(p0) = dist.exact_atom_mass(0.0) {
            return Ok(p0 < BigRational::new(1.into(), 2.into()));
        }
    }
    Ok(dist.atom_mass(0.0) < pc)
}

/// Free-function form of [`EdgeDistribution::truncate`].
pub fn truncate(dist: &EdgeDistribution, b: f64) -> Result<EdgeDistribution> {
    dist.truncate(b)
}
