use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dijkstra::{shortest_path_tree, QueueKind};
use crate::error::{FppError, Result};
use crate::model::WeightField;

/// Largest grid for which [`rescaled_metric`] tabulates every vertex.
pub const FULL_TABLE_LIMIT: usize = 4096;

/// `(1/n) T(floor(n x), floor(n y))` tabulated on a set of grid vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledMetric {
    pub n: usize,
    pub dim: usize,
    pub master_seed: u64,
    /// Row-major vertex indices of the tabulated points.
    pub points: Vec<usize>,
    /// `values[i * points.len() + j]`.
    pub values: Vec<f64>,
}

impl RescaledMetric {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.points.len() + j]
    }

    /// Distance matrix as CSV, one row per source (`source` = grid index).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["source".to_string()];
        header.extend(self.points.iter().map(|p| format!("t{p}")));
        wtr.write_record(&header)?;
        for (i, p) in self.points.iter().enumerate() {
            let mut row = vec![p.to_string()];
            row.extend((0..self.len()).map(|j| format!("{}", self.value(i, j))));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// All-pairs table over every grid vertex (one shortest-path run per source).
pub fn rescaled_metric(w: &WeightField) -> Result<RescaledMetric> {
    let v = w.lattice.vertex_count();
    if v > FULL_TABLE_LIMIT {
        return Err(FppError::BudgetExceeded(format!(
            "{v} grid points exceed the full-table limit {FULL_TABLE_LIMIT}; use rescaled_metric_on"
        )));
    }
    rescaled_metric_on(w, &(0..v).collect::<Vec<_>>())
}

/// Table restricted to the given vertex indices.
pub fn rescaled_metric_on(w: &WeightField, points: &[usize]) -> Result<RescaledMetric> {
    let v = w.lattice.vertex_count();
    if let Some(&bad) = points.iter().find(|&&p| p >= v) {
        return Err(FppError::InvalidArgument(format!("grid index {bad} out of range")));
    }
    let n = w.lattice.side as f64;
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&s| {
            let tree = shortest_path_tree(w, None, &[(s, 0.0)], QueueKind::Auto)?;
            Ok(points.iter().map(|&t| tree.dist[t] / n).collect())
        })
        .collect::<Result<_>>()?;
    let m = points.len();
    let mut values = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            // both directions are path sums; keep the smaller so the table is symmetric
            values[i * m + j] = rows[i][j].min(rows[j][i]);
        }
    }
    Ok(RescaledMetric {
        n: w.lattice.side,
        dim: w.lattice.dim,
        master_seed: w.master_seed,
        points: points.to_vec(),
        values,
    })
}

/// `T_hat_n(x, y)` for points of `[0,1]^d`.
pub fn rescaled_distance(w: &WeightField, x: &[f64], y: &[f64]) -> Result<f64> {
    let lx = w.lattice.grid_floor(x)?;
    let ly = w.lattice.grid_floor(y)?;
    let s = w.lattice.index(&lx).unwrap();
    let t = w.lattice.index(&ly).unwrap();
    let tree = shortest_path_tree(w, None, &[(s, 0.0)], QueueKind::Auto)?;
    Ok(tree.dist[t] / w.lattice.side as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{l1, sample_weights, EdgeDistribution, LatticeBox};

    #[test]
    fn deterministic_table() {
        let d = EdgeDistribution::deterministic(1.0).unwrap();
        let w = sample_weights(&d, LatticeBox::new(2, 4).unwrap(), 0).unwrap();
        let m = rescaled_metric(&w).unwrap();
        for i in 0..m.len() {
            for j in 0..m.len() {
                let (a, b) = (w.lattice.coords(m.points[i]), w.lattice.coords(m.points[j]));
                assert_eq!(m.value(i, j), l1(&a, &b) as f64 / 4.0);
            }
        }
        let x = [0.3, 0.9];
        let y = [1.0, 0.0];
        assert_eq!(rescaled_distance(&w, &x, &y).unwrap(), (3.0 + 3.0) / 4.0);
    }

    #[test]
    fn pseudometric_axioms_on_integer_field() {
        let d = EdgeDistribution::fair_two_point(1.0, 3.0).unwrap();
        let w = sample_weights(&d, LatticeBox::new(2, 4).unwrap(), 12).unwrap();
        let m = rescaled_metric(&w).unwrap();
        let k = m.len();
        for i in 0..k {
            assert_eq!(m.value(i, i), 0.0);
            for j in 0..k {
                assert_eq!(m.value(i, j), m.value(j, i));
                for l in (0..k).step_by(3) {
                    assert!(m.value(i, j) <= m.value(i, l) + m.value(l, j));
                }
            }
        }
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), k + 1);
        assert!(text.starts_with("source,t0,t1"));
    }
}
