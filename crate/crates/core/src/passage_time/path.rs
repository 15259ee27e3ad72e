use serde::{Deserialize, Serialize};

use crate::error::{FppError, Result};
use crate::model::{l1, LatticeBox, WeightField};

/// A nearest-neighbour vertex sequence in `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscretePath {
    vertices: Vec<Vec<i64>>,
}

impl DiscretePath {
    pub fn new(vertices: Vec<Vec<i64>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(FppError::InvalidArgument("empty path".into()));
        }
        let d = vertices[0].len();
        for w in vertices.windows(2) {
            if w[1].len() != d || l1(&w[0], &w[1]) != 1 {
                return Err(FppError::InvalidArgument(format!(
                    "{:?} -> {:?} is not a unit step",
                    w[0], w[1]
                )));
            }
        }
        Ok(DiscretePath { vertices })
    }

    pub fn from_indices(lattice: &LatticeBox, idx: &[usize]) -> Result<Self> {
        DiscretePath::new(idx.iter().map(|&i| lattice.coords(i)).collect())
    }

    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn start(&self) -> &[i64] {
        &self.vertices[0]
    }

    pub fn end(&self) -> &[i64] {
        self.vertices.last().unwrap()
    }

    /// True when no vertex repeats.
    pub fn is_self_avoiding(&self) -> bool {
        let mut seen: Vec<&Vec<i64>> = self.vertices.iter().collect();
        seen.sort();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    /// Edge slots traversed, in order.
    pub fn edge_slots(&self, lattice: &LatticeBox) -> Result<Vec<usize>> {
        self.vertices
            .windows(2)
            .map(|w| {
                let a = lattice.index(&w[0]);
                let b = lattice.index(&w[1]);
                match (a, b) {
                    (Some(a), Some(b)) => lattice
                        .edge_between(a, b)
                        .ok_or_else(|| FppError::EdgeOutsideBox(w[0].clone(), w[1].clone())),
                    _ => Err(FppError::EdgeOutsideBox(w[0].clone(), w[1].clone())),
                }
            })
            .collect()
    }
}

/// Sum of the edge weights along `path`, accumulated from its start.
pub fn path_time(path: &DiscretePath, w: &WeightField) -> Result<f64> {
    Ok(path
        .edge_slots(&w.lattice)?
        .into_iter()
        .fold(0.0, |acc, s| acc + w.weight(s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EdgeDistribution;

    #[test]
    fn path_time_examples() {
        let b = LatticeBox::new(2, 3).unwrap();
        let d = EdgeDistribution::uniform(0.0, 10.0).unwrap();
        let mut w = WeightField::from_fn(b, d, |_, _| 0.0);
        let p = DiscretePath::new(vec![vec![0, 0], vec![1, 0], vec![1, 1], vec![2, 1]]).unwrap();
        for (s, v) in p.edge_slots(&b).unwrap().into_iter().zip([1.0, 2.0, 3.0]) {
            w.set_weight(s, v).unwrap();
        }
        assert_eq!(path_time(&p, &w).unwrap(), 6.0);
        let single = DiscretePath::new(vec![vec![2, 2]]).unwrap();
        assert_eq!(path_time(&single, &w).unwrap(), 0.0);
        let outside = DiscretePath::new(vec![vec![3, 0], vec![4, 0]]).unwrap();
        assert!(matches!(path_time(&outside, &w), Err(FppError::EdgeOutsideBox(..))));
        assert!(DiscretePath::new(vec![vec![0, 0], vec![1, 1]]).is_err());
    }
}
