use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exact::{first_self_contact, segment_contact, Contact};
use super::highways::{validate_geodesic, NormPlusHighways};
use super::norm::Pseudometric;
use super::path::{l1_dist, lerp, Highway, LipschitzPath};
use crate::error::{FppError, Result};
use crate::model::big_to_f64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkOptions {
    pub k_max: usize,
    /// Stop once the sup-distance diagnostic falls to this level.
    pub tolerance: f64,
    /// Endpoint pairs whose geodesics are inserted before the dense sequence.
    #[serde(default)]
    pub seed_pairs: Vec<(Vec<f64>, Vec<f64>)>,
    /// Number of Halton pairs on which the sup-distance is measured.
    pub diagnostic_pairs: usize,
    /// `l1` clearance left around every cut.
    pub margin: f64,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        NetworkOptions { k_max: 32, tolerance: 1e-3, seed_pairs: Vec::new(), diagnostic_pairs: 64, margin: 1e-6 }
    }
}

impl NetworkOptions {
    /// Seeds the construction with the endpoints of every highway of `d`.
    pub fn seeded_by(d: &NormPlusHighways) -> Self {
        NetworkOptions {
            seed_pairs: d.highways().iter().map(|h| (h.path.start().to_vec(), h.path.end().to_vec())).collect(),
            ..NetworkOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighwayNetwork {
    pub metric: NormPlusHighways,
    /// Disjoint pieces in insertion order.
    pub paths: Vec<Highway>,
    /// `diagnostics[K] = sup (HW_K - D)^+` over the diagnostic pairs.
    pub diagnostics: Vec<f64>,
    pub converged: bool,
}

impl HighwayNetwork {
    /// `HW(D; sigma_1..sigma_K)` for the pieces inserted so far.
    pub fn chain_metric(&self) -> NormPlusHighways {
        NormPlusHighways::raw(
            self.metric.g().clone(),
            self.paths.clone(),
            self.metric.access_resolution(),
            false,
        )
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Halton point `i` in `[0,1]^(2d)` split into a pair of points of `[0,1]^d`.
pub fn halton_pair(i: u64, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let v: Vec<f64> = (0..2 * dim).map(|k| radical_inverse(i + 1, PRIMES[k])).collect();
    (v[..dim].to_vec(), v[dim..].to_vec())
}

/// Removes loops so the polyline is injective.
pub fn remove_loops(h: &Highway) -> Highway {
    let mut points = h.path.points.clone();
    let mut speeds = h.speeds.clone();
    while let Some((i, j, s, _)) = first_self_contact(&points) {
        let p = lerp(&points[i], &points[i + 1], s);
        let mut np: Vec<Vec<f64>> = points[..=i].to_vec();
        let mut ns: Vec<f64> = speeds[..i].to_vec();
        let mut push = |q: &Vec<f64>, sp: f64| {
            if np.last() != Some(q) {
                np.push(q.clone());
                ns.push(sp);
            }
        };
        push(&p, speeds[i]);
        push(&points[j + 1], speeds[j]);
        for k in j + 2..points.len() {
            push(&points[k], speeds[k - 1]);
        }
        if np.len() < 2 {
            break;
        }
        points = np;
        speeds = ns;
    }
    Highway { path: LipschitzPath { points, duration: None }, speeds }
}

/// Splits `h` into maximal closed pieces disjoint from every path in `previous`,
/// leaving an `l1` clearance of `margin` around each contact.
pub fn cut_against(h: &Highway, previous: &[Highway], margin: f64) -> Vec<Highway> {
    let pts = &h.path.points;
    let mut pieces: Vec<Highway> = Vec::new();
    let mut cur_points: Vec<Vec<f64>> = Vec::new();
    let mut cur_speeds: Vec<f64> = Vec::new();
    let flush = |cp: &mut Vec<Vec<f64>>, cs: &mut Vec<f64>, out: &mut Vec<Highway>| {
        if cp.len() >= 2 {
            let len: f64 = cp.windows(2).map(|w| l1_dist(&w[0], &w[1])).sum();
            if len > margin {
                out.push(Highway { path: LipschitzPath { points: cp.clone(), duration: None }, speeds: cs.clone() });
            }
        }
        cp.clear();
        cs.clear();
    };
    for (k, w) in pts.windows(2).enumerate() {
        let len = l1_dist(&w[0], &w[1]);
        let pad = margin / len;
        let mut banned: Vec<(f64, f64)> = Vec::new();
        for prev in previous {
            for pw in prev.path.points.windows(2) {
                match segment_contact(&w[0], &w[1], &pw[0], &pw[1]) {
                    Contact::None => {}
                    Contact::Point { s, .. } => {
                        let s = big_to_f64(&s);
                        banned.push((s - pad, s + pad));
                    }
                    Contact::Overlap { s0, s1 } => banned.push((big_to_f64(&s0) - pad, big_to_f64(&s1) + pad)),
                }
            }
        }
        banned.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut kept: Vec<(f64, f64)> = Vec::new();
        let mut cursor = 0.0;
        for (lo, hi) in banned {
            if lo > cursor {
                kept.push((cursor, lo));
            }
            cursor = cursor.max(hi);
        }
        if cursor < 1.0 {
            kept.push((cursor, 1.0));
        }
        for (lo, hi) in kept {
            let a = if lo == 0.0 { w[0].clone() } else { lerp(&w[0], &w[1], lo) };
            let b = if hi == 1.0 { w[1].clone() } else { lerp(&w[0], &w[1], hi) };
            let continues = lo == 0.0 && cur_points.last() == Some(&w[0]);
            if !continues {
                flush(&mut cur_points, &mut cur_speeds, &mut pieces);
                cur_points.push(a);
            }
            cur_points.push(b);
            cur_speeds.push(h.speeds[k]);
            if hi < 1.0 {
                flush(&mut cur_points, &mut cur_speeds, &mut pieces);
            }
        }
        if cur_points.last() != Some(&w[1]) {
            flush(&mut cur_points, &mut cur_speeds, &mut pieces);
        }
    }
    flush(&mut cur_points, &mut cur_speeds, &mut pieces);
    pieces
}

/// Builds a highway network of `d` by inserting geodesics between seed pairs
/// and then Halton endpoint pairs, cutting each against the pieces already
/// kept.
///
/// Returns the partial network when `k_max` geodesics did not bring the
/// diagnostic under the tolerance; `converged` records which case occurred.
pub fn build_highway_network(d: &NormPlusHighways, opts: &NetworkOptions) -> Result<HighwayNetwork> {
    d.validate()?;
    let dim = d.dim();
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..opts.diagnostic_pairs as u64)
        .map(|i| halton_pair(i, dim))
        .chain(corner_pairs(dim))
        .collect();
    let target: Vec<f64> = pairs.par_iter().map(|(x, y)| d.eval(x, y)).collect();
    let sup_gap = |m: &NormPlusHighways| -> f64 {
        let gaps: Vec<f64> = pairs.par_iter().zip(&target).map(|((x, y), t)| (m.eval(x, y) - t).max(0.0)).collect();
        gaps.into_iter().fold(0.0, f64::max)
    };
    let mut paths: Vec<Highway> = Vec::new();
    let mut current = NormPlusHighways::raw(d.g().clone(), Vec::new(), d.access_resolution(), false);
    let mut diagnostics = vec![sup_gap(&current)];
    let mut endpoint_index = 0u64;
    let mut seeds = opts.seed_pairs.iter();
    let mut k = 0;
    while k < opts.k_max && *diagnostics.last().unwrap() > opts.tolerance {
        let (x, y) = match seeds.next() {
            Some(p) => p.clone(),
            None => {
                endpoint_index += 1;
                halton_pair(endpoint_index + 1000, dim)
            }
        };
        if x == y {
            continue;
        }
        let (_, geo) = d.geodesic(&x, &y)?;
        let geo = remove_loops(&geo);
        for piece in cut_against(&geo, &paths, opts.margin) {
            validate_geodesic(d, &piece, 1e-9)?;
            paths.push(piece);
        }
        current = NormPlusHighways::raw(d.g().clone(), paths.clone(), d.access_resolution(), false);
        k += 1;
        diagnostics.push(sup_gap(&current));
    }
    let converged = *diagnostics.last().unwrap() <= opts.tolerance;
    Ok(HighwayNetwork { metric: d.clone(), paths, diagnostics, converged })
}

fn corner_pairs(dim: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let corners: Vec<Vec<f64>> =
        (0..1usize << dim).map(|m| (0..dim).map(|i| ((m >> i) & 1) as f64).collect()).collect();
    let mut out = Vec::new();
    for a in 0..corners.len() {
        for b in a + 1..corners.len() {
            out.push((corners[a].clone(), corners[b].clone()));
        }
    }
    out
}

/// `sup |A - B|` over Halton pairs.
pub fn sup_distance<A: Pseudometric, B: Pseudometric>(a: &A, b: &B, pairs: usize) -> f64 {
    let dim = a.dim();
    (0..pairs as u64)
        .into_par_iter()
        .map(|i| {
            let (x, y) = halton_pair(i, dim);
            (a.distance(&x, &y) - b.distance(&x, &y)).abs()
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max)
}

pub fn check_disjoint(paths: &[Highway]) -> Result<()> {
    for a in 0..paths.len() {
        for b in a + 1..paths.len() {
            if super::exact::polylines_meet(&paths[a].path.points, &paths[b].path.points) {
                return Err(FppError::Overlap(format!("network paths {a} and {b} meet")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WeightedL1;

    fn l1() -> WeightedL1 {
        WeightedL1::scaled_l1(2, 1.0).unwrap()
    }

    #[test]
    fn crossing_segments_are_cut_in_two() {
        let a = Highway::straight(&[0.0, 0.0], &[1.0, 1.0], 1.0).unwrap();
        let b = Highway::straight(&[0.0, 1.0], &[1.0, 0.0], 1.0).unwrap();
        let pieces = cut_against(&b, &[a.clone()], 1e-6);
        assert_eq!(pieces.len(), 2);
        check_disjoint(&[vec![a], pieces].concat()).unwrap();
    }

    #[test]
    fn loops_are_removed() {
        let h = Highway::uniform(
            LipschitzPath::new(vec![vec![0.0, 0.5], vec![1.0, 0.5], vec![1.0, 1.0], vec![0.5, 1.0], vec![0.5, 0.0]])
                .unwrap(),
            1.0,
        )
        .unwrap();
        let clean = remove_loops(&h);
        assert!(first_self_contact(&clean.path.points).is_none());
        assert_eq!(clean.path.points, vec![vec![0.0, 0.5], vec![0.5, 0.5], vec![0.5, 0.0]]);
    }

    #[test]
    fn norm_network_is_immediately_exact() {
        let d = NormPlusHighways::norm(l1());
        let net = build_highway_network(&d, &NetworkOptions::default()).unwrap();
        assert!(net.converged);
        assert_eq!(net.diagnostics, vec![0.0]);
    }

    #[test]
    fn diagonal_network() {
        let d = NormPlusHighways::new(l1(), vec![Highway::straight(&[0.0, 0.0], &[1.0, 1.0], 0.5).unwrap()]).unwrap();
        let net = build_highway_network(&d, &NetworkOptions::seeded_by(&d)).unwrap();
        assert!(net.converged);
        assert_eq!(net.paths[0].path.points, vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(*net.diagnostics.last().unwrap(), 0.0);
        assert!(net.diagnostics.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn unseeded_network_stays_disjoint() {
        let d = NormPlusHighways::new(l1(), vec![Highway::straight(&[0.0, 0.0], &[1.0, 1.0], 0.5).unwrap()]).unwrap();
        let opts = NetworkOptions { k_max: 6, ..NetworkOptions::default() };
        let net = build_highway_network(&d, &opts).unwrap();
        check_disjoint(&net.paths).unwrap();
        assert!(net.diagnostics.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(net.diagnostics.len(), 7);
    }
}
