use std::collections::HashSet;

use super::path::DiscretePath;
use crate::error::{FppError, Result};
use crate::model::{l1, LatticeBox};

/// `d` paths from `x` to `y`, pairwise vertex-disjoint except at the
/// endpoints, of length `|x-y|_1` or `|x-y|_1 + 2`.
///
/// Coordinates are first reflected so that unequal coordinates increase and
/// equal ones differ from `n`. Equal coordinates get a copy of a shortest
/// path shifted by one in that coordinate; the others get the rotated
/// concatenations of straight lines.
pub fn disjoint_paths(x: &[i64], y: &[i64], lattice: &LatticeBox) -> Result<Vec<DiscretePath>> {
    if !lattice.contains(x) {
        return Err(FppError::OutsideRegion(x.to_vec()));
    }
    if !lattice.contains(y) {
        return Err(FppError::OutsideRegion(y.to_vec()));
    }
    if x == y {
        return Err(FppError::InvalidArgument("endpoints must be distinct".into()));
    }
    let n = lattice.side as i64;
    let d = lattice.dim;
    let flip: Vec<bool> = (0..d).map(|i| x[i] > y[i] || (x[i] == y[i] && x[i] == n)).collect();
    let to_norm = |v: &[i64]| -> Vec<i64> {
        v.iter().enumerate().map(|(i, &c)| if flip[i] { n - c } else { c }).collect()
    };
    let xn = to_norm(x);
    let yn = to_norm(y);
    let equal: Vec<usize> = (0..d).filter(|&i| xn[i] == yn[i]).collect();
    let moving: Vec<usize> = (0..d).filter(|&i| xn[i] < yn[i]).collect();
    if equal.iter().any(|&i| xn[i] >= n) {
        return Err(FppError::Precondition("box too small to normalize".into()));
    }

    let straight_lines = |order: &[usize]| -> Vec<Vec<i64>> {
        let mut cur = xn.clone();
        let mut out = vec![cur.clone()];
        for &i in order {
            while cur[i] < yn[i] {
                cur[i] += 1;
                out.push(cur.clone());
            }
        }
        out
    };

    let mut paths = Vec::with_capacity(d);
    let z = straight_lines(&moving);
    for &i in &equal {
        let mut p = vec![xn.clone()];
        for v in &z {
            let mut s = v.clone();
            s[i] += 1;
            p.push(s);
        }
        p.push(yn.clone());
        paths.push(p);
    }
    for k in 0..moving.len() {
        let order: Vec<usize> = moving[k..].iter().chain(&moving[..k]).copied().collect();
        paths.push(straight_lines(&order));
    }
    paths
        .into_iter()
        .map(|p| DiscretePath::new(p.iter().map(|v| to_norm(v)).collect()))
        .collect()
}

/// Checks the contract of [`disjoint_paths`]; returns the first violation.
pub fn validate_disjoint_paths(
    x: &[i64],
    y: &[i64],
    lattice: &LatticeBox,
    paths: &[DiscretePath],
) -> std::result::Result<(), String> {
    if paths.len() != lattice.dim {
        return Err(format!("{} paths, expected {}", paths.len(), lattice.dim));
    }
    let dist = l1(x, y) as usize;
    let mut seen: HashSet<&[i64]> = HashSet::new();
    for (k, p) in paths.iter().enumerate() {
        if p.start() != x || p.end() != y {
            return Err(format!("path {k} has wrong endpoints"));
        }
        if p.len() != dist && p.len() != dist + 2 {
            return Err(format!("path {k} has length {}", p.len()));
        }
        if !p.is_self_avoiding() {
            return Err(format!("path {k} is not self-avoiding"));
        }
        for v in p.vertices() {
            if !lattice.contains(v) {
                return Err(format!("path {k} leaves the box at {v:?}"));
            }
        }
        for v in &p.vertices()[1..p.vertices().len() - 1] {
            if !seen.insert(v.as_slice()) {
                return Err(format!("path {k} shares interior vertex {v:?}"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staircases() {
        let b = LatticeBox::new(2, 3).unwrap();
        let ps = disjoint_paths(&[0, 0], &[2, 1], &b).unwrap();
        assert_eq!(ps.len(), 2);
        assert!(ps.iter().all(|p| p.len() == 3));
        validate_disjoint_paths(&[0, 0], &[2, 1], &b, &ps).unwrap();
    }

    #[test]
    fn straight_and_detour() {
        let b = LatticeBox::new(2, 3).unwrap();
        let ps = disjoint_paths(&[0, 0], &[2, 0], &b).unwrap();
        let mut lens: Vec<usize> = ps.iter().map(|p| p.len()).collect();
        lens.sort();
        assert_eq!(lens, vec![2, 4]);
        validate_disjoint_paths(&[0, 0], &[2, 0], &b, &ps).unwrap();
    }

    #[test]
    fn reflected_on_the_upper_face() {
        let b = LatticeBox::new(3, 2).unwrap();
        let (x, y) = ([2, 2, 0], [0, 2, 1]);
        let ps = disjoint_paths(&x, &y, &b).unwrap();
        validate_disjoint_paths(&x, &y, &b, &ps).unwrap();
        assert!(disjoint_paths(&x, &x, &b).is_err());
    }
}
