use serde::{Deserialize, Serialize};

use crate::error::{FppError, Result};

/// A pseudometric on `[0,1]^d`.
pub trait Pseudometric: Sync {
    fn dim(&self) -> usize;
    fn distance(&self, x: &[f64], y: &[f64]) -> f64;
}

/// `g(u) = sum_i w_i |u_i|` with positive weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedL1 {
    pub weights: Vec<f64>,
}

impl WeightedL1 {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(FppError::Geometry(format!("norm weights must be positive, got {weights:?}")));
        }
        Ok(WeightedL1 { weights })
    }

    /// Plain `|.|_1` scaled by `c`.
    pub fn scaled_l1(dim: usize, c: f64) -> Result<Self> {
        WeightedL1::new(vec![c; dim])
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.weights.iter().zip(u).map(|(w, x)| w * x.abs()).sum()
    }

    pub fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        self.weights.iter().zip(x.iter().zip(y)).map(|(w, (a, b))| w * (a - b).abs()).sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }
}

impl Pseudometric for WeightedL1 {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        self.dist(x, y)
    }
}

/// A pseudometric sampled on the grid `(1/m) [[0, m]]^d`.
///
/// Off-grid arguments are rounded to the nearest grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPseudometric {
    pub m: usize,
    pub dim: usize,
    /// `values[i * N + j]`, grid points indexed row-major.
    pub values: Vec<f64>,
}

impl GridPseudometric {
    pub fn points(&self) -> usize {
        (self.m + 1).pow(self.dim as u32)
    }

    pub fn from_fn(m: usize, dim: usize, f: impl Fn(&[f64], &[f64]) -> f64) -> Result<Self> {
        if m == 0 || dim == 0 {
            return Err(FppError::Geometry("empty grid".into()));
        }
        let pts: Vec<Vec<f64>> = (0..(m + 1).pow(dim as u32)).map(|i| grid_point(m, dim, i)).collect();
        let n = pts.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                values[i * n + j] = f(&pts[i], &pts[j]);
            }
        }
        Ok(GridPseudometric { m, dim, values })
    }

    pub fn sample<D: Pseudometric>(d: &D, m: usize) -> Result<Self> {
        GridPseudometric::from_fn(m, d.dim(), |x, y| d.distance(x, y))
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        grid_point(self.m, self.dim, i)
    }

    pub fn nearest(&self, x: &[f64]) -> usize {
        x.iter().fold(0usize, |acc, &c| {
            acc * (self.m + 1) + ((c.clamp(0.0, 1.0) * self.m as f64).round() as usize)
        })
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.points() + j]
    }

    /// First violated pseudometric axiom, if any (exact comparisons plus `tol`).
    pub fn check_axioms(&self, tol: f64) -> std::result::Result<(), String> {
        let n = self.points();
        for i in 0..n {
            if self.value(i, i) != 0.0 {
                return Err(format!("D(x{i}, x{i}) = {}", self.value(i, i)));
            }
            for j in 0..n {
                let v = self.value(i, j);
                if v < 0.0 || v != self.value(j, i) {
                    return Err(format!("asymmetric or negative at ({i}, {j})"));
                }
                for k in 0..n {
                    if v > self.value(i, k) + self.value(k, j) + tol {
                        return Err(format!("triangle inequality fails at ({i}, {k}, {j})"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks `|D(x,y) - D(x',y')| <= g(x-x') + g(y-y')` on every grid quadruple
    /// reachable by one grid step from `(x, y)`.
    pub fn check_equicontinuity(&self, g: &WeightedL1, tol: f64) -> std::result::Result<(), String> {
        let n = self.points();
        let pts: Vec<Vec<f64>> = (0..n).map(|i| self.point(i)).collect();
        for i in 0..n {
            for j in 0..n {
                for i2 in 0..n {
                    let bound_x = g.dist(&pts[i], &pts[i2]);
                    for j2 in 0..n {
                        let diff = (self.value(i, j) - self.value(i2, j2)).abs();
                        if diff > bound_x + g.dist(&pts[j], &pts[j2]) + tol {
                            return Err(format!("modulus fails at ({i},{j}) vs ({i2},{j2})"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl Pseudometric for GridPseudometric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        self.value(self.nearest(x), self.nearest(y))
    }
}

pub(crate) fn grid_point(m: usize, dim: usize, mut i: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for c in out.iter_mut().rev() {
        *c = (i % (m + 1)) as f64 / m as f64;
        i /= m + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_norm() {
        let g = WeightedL1::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(g.norm(&[1.0, -1.0]), 3.0);
        assert!(WeightedL1::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn grid_sample_of_a_norm() {
        let g = WeightedL1::new(vec![1.0, 2.0]).unwrap();
        let grid = GridPseudometric::sample(&g, 3).unwrap();
        assert!(grid.check_axioms(1e-12).is_ok());
        assert!(grid.check_equicontinuity(&g, 1e-12).is_ok());
        assert_eq!(grid.distance(&[0.0, 0.0], &[1.0, 1.0]), 3.0);
        let half = WeightedL1::new(vec![0.5, 1.0]).unwrap();
        assert!(grid.check_equicontinuity(&half, 1e-12).is_err());
    }
}
