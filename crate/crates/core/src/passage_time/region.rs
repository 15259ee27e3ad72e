use serde::{Deserialize, Serialize};

use crate::error::{FppError, Result};
use crate::model::LatticeBox;

/// A vertex subset of the box to which paths are confined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Region {
    Full,
    /// Axis-aligned sub-box `lower <= v <= upper` (cylinders and strips included).
    SubBox { lower: Vec<i64>, upper: Vec<i64> },
    Vertices { vertices: Vec<Vec<i64>> },
}

impl Region {
    pub fn sub_box(lower: Vec<i64>, upper: Vec<i64>) -> Self {
        Region::SubBox { lower, upper }
    }

    pub fn contains(&self, lattice: &LatticeBox, v: &[i64]) -> bool {
        if !lattice.contains(v) {
            return false;
        }
        match self {
            Region::Full => true,
            Region::SubBox { lower, upper } => v
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(c, (lo, hi))| lo <= c && c <= hi),
            Region::Vertices { vertices } => vertices.iter().any(|u| u == v),
        }
    }

    /// Membership mask over vertex indices; `None` means the whole box.
    pub fn mask(&self, lattice: &LatticeBox) -> Result<Option<Vec<bool>>> {
        match self {
            Region::Full => Ok(None),
            Region::SubBox { lower, upper } => {
                if lower.len() != lattice.dim || upper.len() != lattice.dim {
                    return Err(FppError::InvalidArgument("sub-box dimension mismatch".into()));
                }
                Ok(Some(
                    (0..lattice.vertex_count())
                        .map(|i| self.contains(lattice, &lattice.coords(i)))
                        .collect(),
                ))
            }
            Region::Vertices { vertices } => {
                let mut m = vec![false; lattice.vertex_count()];
                for v in vertices {
                    let i = lattice
                        .index(v)
                        .ok_or_else(|| FppError::OutsideRegion(v.clone()))?;
                    m[i] = true;
                }
                Ok(Some(m))
            }
        }
    }
}
