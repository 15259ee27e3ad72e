use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exact::{segment_contact, Contact};
use super::highways::NormPlusHighways;
use super::norm::{GridPseudometric, Pseudometric};
use super::path::{l2_dist, lerp, LipschitzPath};
use crate::error::{FppError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthOptions {
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for LengthOptions {
    fn default() -> Self {
        LengthOptions { rel_tol: 1e-9, max_depth: 14 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthEstimate {
    pub length: f64,
    /// Subdivision depth at which successive sums agreed.
    pub depth: u32,
    /// Sums per depth, nondecreasing by the triangle inequality.
    pub sums: Vec<f64>,
}

fn subdivision_sum<D: Pseudometric>(d: &D, path: &LipschitzPath, depth: u32) -> f64 {
    let parts = 1usize << depth;
    let pieces: Vec<f64> = path
        .points
        .par_windows(2)
        .map(|w| {
            let mut acc = 0.0;
            let mut prev = w[0].clone();
            for k in 1..=parts {
                let next = if k == parts { w[1].clone() } else { lerp(&w[0], &w[1], k as f64 / parts as f64) };
                acc += d.distance(&prev, &next);
                prev = next;
            }
            acc
        })
        .collect();
    pieces.iter().sum()
}

/// `D`-length as the limit of sums over nested dyadic subdivisions of every
/// linear piece.
pub fn d_length<D: Pseudometric>(d: &D, path: &LipschitzPath, opts: LengthOptions) -> Result<LengthEstimate> {
    path.validate()?;
    if path.dim() != d.dim() {
        return Err(FppError::Geometry("path and metric dimensions differ".into()));
    }
    let mut sums = vec![subdivision_sum(d, path, 0)];
    for depth in 1..=opts.max_depth {
        let s = subdivision_sum(d, path, depth);
        let prev = *sums.last().unwrap();
        sums.push(s);
        if (s - prev).abs() <= opts.rel_tol * s.abs().max(f64::MIN_POSITIVE) {
            return Ok(LengthEstimate { length: s, depth, sums });
        }
    }
    let n = sums.len();
    Err(FppError::NoConvergence {
        message: "dyadic subdivision sums did not settle".into(),
        lower: sums[n - 2],
        upper: sums[n - 1],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeEstimate {
    /// Richardson-extrapolated symmetric quotient.
    pub value: f64,
    pub left: f64,
    pub right: f64,
    /// Spread of the last two extrapolated ladder entries.
    pub spread: f64,
    /// False when the ladder or the one-sided quotients disagree.
    pub regular: bool,
}

/// Metric derivative `|gamma'|_D(t)` from a halving ladder of difference quotients.
pub fn metric_derivative<D: Pseudometric>(d: &D, path: &LipschitzPath, t: f64) -> Result<DerivativeEstimate> {
    let duration = path.duration();
    if !(t > 0.0 && t < duration) {
        return Err(FppError::Geometry(format!("t = {t} is not interior to [0, {duration}]")));
    }
    let h0 = (0.1 * duration).min(t).min(duration - t) * 0.5;
    let rungs = 12;
    let centre = path.at(t);
    let mut sym = Vec::with_capacity(rungs);
    let mut left = 0.0;
    let mut right = 0.0;
    for k in 0..rungs {
        let h = h0 / (1u64 << k) as f64;
        let (a, b) = (path.at(t - h), path.at(t + h));
        sym.push(d.distance(&a, &b) / (2.0 * h));
        left = d.distance(&a, &centre) / h;
        right = d.distance(&centre, &b) / h;
    }
    let rich: Vec<f64> = sym.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    let value = *rich.last().unwrap();
    let spread = (rich[rich.len() - 1] - rich[rich.len() - 2]).abs();
    let scale = value.abs().max(left.abs()).max(right.abs()).max(1e-300);
    let regular = spread <= 1e-6 * scale && (left - right).abs() <= 1e-6 * scale;
    Ok(DerivativeEstimate { value, left, right, spread, regular })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GradientKind {
    OffHighways,
    /// Regular point of a highway, direction along it.
    AlongHighway { highway: usize },
    /// Regular point of a highway, direction across it.
    AcrossHighway { highway: usize },
    /// Highway endpoint or breakpoint; the value is `g(u)`.
    Boundary { highway: usize, warning: String },
    /// `D(z, z + t u) / t` for one probe; an upper bound only.
    StraightProbeUpperBound { t: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gradient {
    pub value: f64,
    pub kind: GradientKind,
}

const ON_TOL: f64 = 1e-12;

fn parallel(u: &[f64], v: &[f64]) -> bool {
    let nu: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (0..u.len()).all(|i| (i + 1..u.len()).all(|j| (u[i] * v[j] - u[j] * v[i]).abs() <= 1e-12 * nu * nv))
}

/// Closest point parameter of `z` on segment `[a, b]` and its distance.
fn project(a: &[f64], b: &[f64], z: &[f64]) -> (f64, f64) {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let az: Vec<f64> = a.iter().zip(z).map(|(x, y)| y - x).collect();
    let len2: f64 = ab.iter().map(|x| x * x).sum();
    let s = (ab.iter().zip(&az).map(|(p, q)| p * q).sum::<f64>() / len2).clamp(0.0, 1.0);
    (s, l2_dist(&lerp(a, b, s), z))
}

/// Gradient by paths of a highway metric, evaluated analytically.
pub fn gradient_by_paths(d: &NormPlusHighways, z: &[f64], u: &[f64]) -> Result<Gradient> {
    if z.len() != d.dim() || u.len() != d.dim() {
        return Err(FppError::Geometry("dimension mismatch".into()));
    }
    if z.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(FppError::OutsideDomain(format!("{z:?} is not in [0,1]^d")));
    }
    if u.iter().all(|&c| c == 0.0) {
        return Err(FppError::InvalidArgument("direction must be nonzero".into()));
    }
    let gu = d.g().norm(u);
    for (h, hw) in d.highways().iter().enumerate() {
        let pts = &hw.path.points;
        for (k, w) in pts.windows(2).enumerate() {
            let (s, dist) = project(&w[0], &w[1], z);
            if dist > ON_TOL {
                continue;
            }
            let seg_len = l2_dist(&w[0], &w[1]);
            let at_break = s * seg_len <= ON_TOL || (1.0 - s) * seg_len <= ON_TOL;
            if at_break {
                return Ok(Gradient {
                    value: gu,
                    kind: GradientKind::Boundary {
                        highway: h,
                        warning: format!("z is a breakpoint or endpoint of highway {h}; returning g(u)"),
                    },
                });
            }
            let tangent: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| b - a).collect();
            return Ok(if parallel(u, &tangent) {
                Gradient { value: hw.speeds[k] * gu, kind: GradientKind::AlongHighway { highway: h } }
            } else {
                Gradient { value: gu, kind: GradientKind::AcrossHighway { highway: h } }
            });
        }
    }
    Ok(Gradient { value: gu, kind: GradientKind::OffHighways })
}

/// Straight-probe upper bound on the gradient by paths of a grid metric,
/// using the smallest probe that lands one grid step away.
pub fn gradient_probe_grid(d: &GridPseudometric, z: &[f64], u: &[f64]) -> Result<Gradient> {
    let umax = u.iter().fold(0.0f64, |a, &c| a.max(c.abs()));
    if umax == 0.0 {
        return Err(FppError::InvalidArgument("direction must be nonzero".into()));
    }
    let t = 1.0 / (d.m as f64 * umax);
    let end: Vec<f64> = z.iter().zip(u).map(|(a, b)| a + t * b).collect();
    if end.iter().any(|c| !(-1e-12..=1.0 + 1e-12).contains(c)) {
        return Err(FppError::OutsideDomain(format!("probe {end:?} leaves [0,1]^d")));
    }
    Ok(Gradient { value: d.distance(z, &end) / t, kind: GradientKind::StraightProbeUpperBound { t } })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order.max(1);
    if n == 1 {
        return vec![(0.0, 2.0)];
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `int phi dH^1` over a union of piecewise-linear paths, piece by piece in
/// Euclidean arclength. `order = 1` is the midpoint rule, exact for integrands
/// constant on each piece.
pub fn hausdorff_integrate<F>(paths: &[LipschitzPath], phi: F, order: usize) -> Result<f64>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let segs: Vec<(&Vec<f64>, &Vec<f64>, usize)> = paths
        .iter()
        .enumerate()
        .flat_map(|(i, p)| p.points.windows(2).map(move |w| (&w[0], &w[1], i)))
        .collect();
    for a in 0..segs.len() {
        for b in a + 1..segs.len() {
            if let Contact::Overlap { .. } = segment_contact(segs[a].0, segs[a].1, segs[b].0, segs[b].1) {
                return Err(FppError::Overlap(format!(
                    "pieces of paths {} and {} overlap; H^1 would be counted twice",
                    segs[a].2, segs[b].2
                )));
            }
        }
    }
    let rule = gauss_legendre(order);
    let parts: Vec<f64> = segs
        .par_iter()
        .map(|(a, b, _)| {
            let len = l2_dist(a, b);
            let tangent: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| (y - x) / len).collect();
            let s: f64 = rule.iter().map(|&(x, w)| w * phi(&lerp(a, b, 0.5 * (1.0 + x)), &tangent)).sum();
            0.5 * len * s
        })
        .collect();
    Ok(parts.iter().sum())
}
