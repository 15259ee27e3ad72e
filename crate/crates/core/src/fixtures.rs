//! Highway metrics used by tests, the acceptance suite and `selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FppError, Result};
use crate::geometry::{validate_geodesic, Highway, NormPlusHighways, WeightedL1};

/// `l1` on `[0,1]^2` with the diagonal highway at speed `lambda`.
pub fn diagonal_highway(lambda: f64) -> Result<NormPlusHighways> {
    NormPlusHighways::new(
        WeightedL1::scaled_l1(2, 1.0)?,
        vec![Highway::straight(&[0.0, 0.0], &[1.0, 1.0], lambda)?],
    )
}

/// One to three straight highways in separate slabs of the second
/// coordinate, with speeds in `(0.1, 0.9)`. Draws are repeated until every
/// highway is a geodesic of the resulting metric.
pub fn random_segment_highways(seed: u64, dim: usize) -> Result<NormPlusHighways> {
    if dim < 2 {
        return Err(FppError::InvalidArgument("need dim >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..64 {
        let m = rng.random_range(1..=3usize);
        let gap = 0.1 / m as f64;
        let mut highways = Vec::new();
        for k in 0..m {
            let lo = k as f64 / m as f64 + gap;
            let hi = (k + 1) as f64 / m as f64 - gap;
            let point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..dim).map(|i| if i == 1 { rng.random_range(lo..hi) } else { rng.random_range(0.0..1.0) }).collect()
            };
            let a = point(&mut rng);
            let b = point(&mut rng);
            let lambda = rng.random_range(0.1..0.9);
            highways.push(Highway::straight(&a, &b, lambda)?);
        }
        let weights: Vec<f64> = (0..dim).map(|_| rng.random_range(0.5..2.0)).collect();
        let Ok(d) = NormPlusHighways::new(WeightedL1::new(weights)?, highways) else {
            continue;
        };
        if d.highways().iter().all(|h| validate_geodesic(&d, h, 1e-9).is_ok()) {
            return Ok(d);
        }
    }
    Err(FppError::NoConvergence {
        message: format!("no admissible highway draw for seed {seed}"),
        lower: 0.0,
        upper: 0.0,
    })
}

/// `d` with every highway speed multiplied by `factor` in `(0, 1)`.
pub fn scaled_speeds(d: &NormPlusHighways, factor: f64) -> Result<NormPlusHighways> {
    let highways = d
        .highways()
        .iter()
        .map(|h| Highway::new(h.path.clone(), h.speeds.iter().map(|l| l * factor).collect()))
        .collect::<Result<Vec<_>>>()?;
    NormPlusHighways::new(d.g().clone(), highways)
}
