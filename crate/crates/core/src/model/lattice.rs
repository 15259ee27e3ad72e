use serde::{Deserialize, Serialize};

use crate::error::{FppError, Result};

/// The box `[[0, n]]^d` with nearest-neighbour edges.
///
/// Vertices are indexed row-major, first coordinate slowest. Edges are
/// identified by `(dir, lower endpoint)` and stored at `dir * V + idx(lower)`;
/// slots whose lower endpoint sits on the upper face in `dir` are unused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeBox {
    pub dim: usize,
    pub side: usize,
}

impl LatticeBox {
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        if dim < 2 {
            return Err(FppError::InvalidBox(format!("dimension {dim} < 2")));
        }
        if side < 1 {
            return Err(FppError::InvalidBox("side must be at least 1".into()));
        }
        let b = LatticeBox { dim, side };
        let v = (side as u128 + 1).checked_pow(dim as u32);
        match v {
            Some(v) if v * dim as u128 <= u32::MAX as u128 => Ok(b),
            _ => Err(FppError::InvalidBox(format!("box [0,{side}]^{dim} is too large"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        LatticeBox::new(self.dim, self.side).map(|_| ())
    }

    pub fn width(&self) -> usize {
        self.side + 1
    }

    pub fn vertex_count(&self) -> usize {
        self.width().pow(self.dim as u32)
    }

    pub fn edge_count(&self) -> usize {
        self.dim * self.side * self.width().pow(self.dim as u32 - 1)
    }

    /// Number of padded edge slots.
    pub fn edge_slots(&self) -> usize {
        self.dim * self.vertex_count()
    }

    /// Index stride of coordinate `dir`.
    pub fn stride(&self, dir: usize) -> usize {
        self.width().pow((self.dim - 1 - dir) as u32)
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.dim && x.iter().all(|&c| c >= 0 && c <= self.side as i64)
    }

    pub fn index(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let w = self.width();
        Some(x.iter().fold(0usize, |acc, &c| acc * w + c as usize))
    }

    pub fn coords(&self, mut idx: usize) -> Vec<i64> {
        let w = self.width();
        let mut out = vec![0i64; self.dim];
        for c in out.iter_mut().rev() {
            *c = (idx % w) as i64;
            idx /= w;
        }
        out
    }

    pub fn coord(&self, idx: usize, dir: usize) -> usize {
        (idx / self.stride(dir)) % self.width()
    }

    /// Edge slot of the edge from `lower` to `lower + e_dir`, if both ends are in the box.
    pub fn edge_slot(&self, lower: usize, dir: usize) -> Option<usize> {
        if self.coord(lower, dir) < self.side {
            Some(dir * self.vertex_count() + lower)
        } else {
            None
        }
    }

    /// Edge slot joining two vertex indices, if they are neighbours.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let diff = hi - lo;
        (0..self.dim)
            .find(|&dir| self.stride(dir) == diff && self.coord(lo, dir) < self.side)
            .map(|dir| dir * self.vertex_count() + lo)
    }

    /// `(lower, upper, dir)` of a valid slot.
    pub fn edge_endpoints(&self, slot: usize) -> (usize, usize, usize) {
        let v = self.vertex_count();
        let dir = slot / v;
        let lower = slot % v;
        (lower, lower + self.stride(dir), dir)
    }

    pub fn is_edge_slot(&self, slot: usize) -> bool {
        slot < self.edge_slots() && {
            let v = self.vertex_count();
            self.coord(slot % v, slot / v) < self.side
        }
    }

    /// All valid edge slots in increasing order.
    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edge_slots()).filter(move |&s| self.is_edge_slot(s))
    }

    /// Neighbours of `idx` together with the connecting edge slot.
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let v = self.vertex_count();
        (0..self.dim).flat_map(move |dir| {
            let s = self.stride(dir);
            let c = self.coord(idx, dir);
            let down = (c > 0).then(|| (idx - s, dir * v + idx - s));
            let up = (c < self.side).then(|| (idx + s, dir * v + idx));
            down.into_iter().chain(up)
        })
    }

    /// Row-major index of `floor(n x)` for a point of `[0,1]^d`.
    pub fn grid_floor(&self, x: &[f64]) -> Result<Vec<i64>> {
        if x.len() != self.dim {
            return Err(FppError::InvalidArgument(format!(
                "point of dimension {} in a {}-dimensional box",
                x.len(),
                self.dim
            )));
        }
        let n = self.side as f64;
        x.iter()
            .map(|&c| {
                if !(0.0..=1.0).contains(&c) {
                    return Err(FppError::OutsideDomain(format!("coordinate {c} not in [0,1]")));
                }
                Ok(((c * n + 1e-9).floor() as i64).min(self.side as i64))
            })
            .collect()
    }
}

pub fn l1(x: &[i64], y: &[i64]) -> i64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let b = LatticeBox::new(2, 3).unwrap();
        assert_eq!(b.edge_count(), 24);
        assert_eq!(b.edges().count(), 24);
        let b = LatticeBox::new(3, 2).unwrap();
        assert_eq!(b.edge_count(), 3 * 2 * 9);
        assert_eq!(b.edges().count(), 54);
        assert!(LatticeBox::new(1, 3).is_err());
        assert!(LatticeBox::new(2, 0).is_err());
    }

    #[test]
    fn edges_join_unit_neighbours() {
        let b = LatticeBox::new(3, 3).unwrap();
        for e in b.edges() {
            let (lo, hi, _) = b.edge_endpoints(e);
            assert_eq!(l1(&b.coords(lo), &b.coords(hi)), 1);
            assert_eq!(b.edge_between(hi, lo), Some(e));
        }
    }

    #[test]
    fn index_roundtrip_and_neighbours() {
        let b = LatticeBox::new(2, 4).unwrap();
        for i in 0..b.vertex_count() {
            assert_eq!(b.index(&b.coords(i)), Some(i));
        }
        assert_eq!(b.coords(1), vec![0, 1]);
        let corner = b.index(&[0, 0]).unwrap();
        assert_eq!(b.neighbors(corner).count(), 2);
        let inner = b.index(&[2, 2]).unwrap();
        assert_eq!(b.neighbors(inner).count(), 4);
        assert_eq!(b.index(&[5, 0]), None);
    }
}
