use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rate::RateFunction;
use crate::error::{FppError, Result};
use crate::geometry::{
    check_disjoint, first_self_contact, gradient_by_paths, hausdorff_integrate, metric_derivative, polylines_meet,
    validate_geodesic, HighwayNetwork, LipschitzPath, NormPlusHighways,
};

/// Relative tolerance used when comparing two expressions of the functional.
pub const CROSS_CHECK_TOL: f64 = 1e-9;

const GEODESIC_TOL: f64 = 1e-9;
const COLLINEAR_TOL: f64 = 1e-9;

/// Result of recomputing the validity of a path family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub injective: bool,
    pub pairwise_disjoint: bool,
}

impl Certificate {
    pub fn valid(&self) -> bool {
        self.injective && self.pairwise_disjoint
    }
}

/// Finite family of paths for the supremum expression. The certificate is
/// always recomputed from the points; a supplied one is ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr")]
pub struct PathFamily {
    pub paths: Vec<LipschitzPath>,
    certificate: Certificate,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyRepr {
    paths: Vec<LipschitzPath>,
    #[serde(default)]
    #[allow(dead_code)]
    certificate: Option<Certificate>,
}

impl TryFrom<FamilyRepr> for PathFamily {
    type Error = FppError;

    fn try_from(r: FamilyRepr) -> Result<Self> {
        for p in &r.paths {
            p.validate()?;
        }
        Ok(PathFamily::new(r.paths))
    }
}

impl PathFamily {
    pub fn new(paths: Vec<LipschitzPath>) -> Self {
        let certificate = certify(&paths);
        PathFamily { paths, certificate }
    }

    /// The pieces of a highway network, as paths.
    pub fn from_network(net: &HighwayNetwork) -> Self {
        PathFamily::new(net.paths.iter().map(|h| h.path.clone()).collect())
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    /// Recomputes the certificate and fails unless it is valid.
    pub fn check(&self) -> Result<()> {
        let c = certify(&self.paths);
        if !c.injective {
            return Err(FppError::Overlap("a family member is not injective".into()));
        }
        if !c.pairwise_disjoint {
            return Err(FppError::Overlap("family members meet".into()));
        }
        Ok(())
    }
}

fn certify(paths: &[LipschitzPath]) -> Certificate {
    let injective = paths.iter().all(|p| first_self_contact(&p.points).is_none());
    let pairwise_disjoint =
        (0..paths.len()).all(|i| (i + 1..paths.len()).all(|j| !polylines_meet(&paths[i].points, &paths[j].points)));
    Certificate { injective, pairwise_disjoint }
}

/// Checks that `net` is a disjoint network of geodesics of `d`.
pub fn validate_network(d: &NormPlusHighways, net: &HighwayNetwork) -> Result<()> {
    if net.metric != *d {
        return Err(FppError::Precondition("the network was built for another metric".into()));
    }
    check_disjoint(&net.paths)?;
    net.paths.par_iter().try_for_each(|h| validate_geodesic(d, h, GEODESIC_TOL))
}

/// Sum over network segments of `J(v, lambda g(v))`. For piecewise-linear
/// pieces with piecewise-constant speed this is the exact value.
pub fn functional_geodesic_sum<J: RateFunction>(d: &NormPlusHighways, net: &HighwayNetwork, j: &J) -> Result<f64> {
    validate_network(d, net)?;
    let terms: Vec<f64> = net
        .paths
        .par_iter()
        .map(|h| {
            h.path
                .points
                .windows(2)
                .zip(&h.speeds)
                .map(|(w, l)| {
                    let v: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| b - a).collect();
                    j.rate(&v, l * d.g().norm(&v))
                })
                .sum()
        })
        .collect();
    Ok(terms.iter().sum())
}

/// `int max_u J(u, grad D_z(u)) dH^1(z)` over the highways of `d`. Off the
/// highways the gradient is `g` and the integrand vanishes; it is not
/// integrated. The maximum is taken over both tangent directions and the
/// coordinate axes.
pub fn functional_intrinsic<J: RateFunction>(
    d: &NormPlusHighways,
    net: &HighwayNetwork,
    j: &J,
    order: usize,
) -> Result<f64> {
    validate_network(d, net)?;
    let paths: Vec<LipschitzPath> = d.highways().iter().map(|h| h.path.clone()).collect();
    if paths.is_empty() {
        return Ok(0.0);
    }
    let dim = d.dim();
    let phi = |z: &[f64], tau: &[f64]| -> f64 {
        let mut dirs: Vec<Vec<f64>> = vec![tau.to_vec(), tau.iter().map(|c| -c).collect()];
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            dirs.push(e);
        }
        dirs.iter()
            .filter_map(|u| gradient_by_paths(d, z, u).ok().map(|gr| j.rate(u, gr.value)))
            .fold(0.0, f64::max)
    };
    hausdorff_integrate(&paths, phi, order)
}

/// Parameter intervals of `[a, b]` lying along `[p, q]`, if the two are collinear.
fn collinear_overlap(a: &[f64], b: &[f64], p: &[f64], q: &[f64]) -> Option<(f64, f64)> {
    let v: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let w: Vec<f64> = p.iter().zip(q).map(|(x, y)| y - x).collect();
    let ww: f64 = w.iter().map(|x| x * x).sum();
    // distance of p and q from the line through a, b
    let off = |z: &[f64]| -> (f64, f64) {
        let az: Vec<f64> = a.iter().zip(z).map(|(x, y)| y - x).collect();
        let s = az.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>() / vv;
        let r2: f64 = az.iter().zip(&v).map(|(x, y)| (x - s * y).powi(2)).sum();
        (s, r2.sqrt())
    };
    let (sp, dp) = off(p);
    let (sq, dq) = off(q);
    let scale = vv.sqrt().max(ww.sqrt());
    if dp > COLLINEAR_TOL * scale || dq > COLLINEAR_TOL * scale {
        return None;
    }
    let (lo, hi) = (sp.min(sq).max(0.0), sp.max(sq).min(1.0));
    (hi > lo).then_some((lo, hi))
}

/// Metric speed per unit `g` along `[a, b]`, piecewise in the segment parameter.
fn speed_profile(d: &NormPlusHighways, a: &[f64], b: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut marks: Vec<(f64, f64, f64)> = Vec::new();
    for h in d.highways() {
        for (w, &l) in h.path.points.windows(2).zip(&h.speeds) {
            if let Some((s0, s1)) = collinear_overlap(a, b, &w[0], &w[1]) {
                marks.push((s0, s1, l));
            }
        }
    }
    let mut cuts: Vec<f64> = vec![0.0, 1.0];
    for &(s0, s1, _) in &marks {
        cuts.push(s0);
        cuts.push(s1);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .filter(|c| c[1] > c[0])
        .map(|c| {
            let m = 0.5 * (c[0] + c[1]);
            let l = marks.iter().filter(|x| x.0 <= m && m <= x.1).map(|x| x.2).fold(1.0, f64::min);
            (c[0], c[1], l)
        })
        .collect()
}

/// Lower bound from one valid family: `sum_k int J(gamma', |gamma'|_D) dt`
/// with the metric speed read off the highways (`lambda g` along a highway,
/// `g` elsewhere).
pub fn functional_sup_lower_bound<J: RateFunction>(d: &NormPlusHighways, j: &J, family: &PathFamily) -> Result<f64> {
    family.check()?;
    if family.paths.iter().any(|p| p.dim() != d.dim()) {
        return Err(FppError::Geometry("family dimension does not match the metric".into()));
    }
    let terms: Vec<f64> = family
        .paths
        .par_iter()
        .map(|p| {
            p.points
                .windows(2)
                .map(|w| {
                    let v: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| b - a).collect();
                    speed_profile(d, &w[0], &w[1])
                        .into_iter()
                        .map(|(s0, s1, l)| {
                            let piece: Vec<f64> = v.iter().map(|c| c * (s1 - s0)).collect();
                            j.rate(&piece, l * d.g().norm(&piece))
                        })
                        .sum::<f64>()
                })
                .sum()
        })
        .collect();
    Ok(terms.iter().sum())
}

/// The same lower bound with the metric speed estimated numerically by
/// `metric_derivative` at `order` Gauss nodes per segment.
pub fn functional_sup_lower_bound_numeric<J: RateFunction>(
    d: &NormPlusHighways,
    j: &J,
    family: &PathFamily,
    order: usize,
) -> Result<f64> {
    family.check()?;
    let rule = crate::geometry::gauss_legendre(order);
    let mut total = 0.0;
    for p in &family.paths {
        let times = p.breakpoint_times();
        for (k, w) in times.windows(2).enumerate() {
            let vel = p.velocity(k);
            let half = 0.5 * (w[1] - w[0]);
            let mid = 0.5 * (w[0] + w[1]);
            let parts: Vec<f64> = rule
                .par_iter()
                .map(|&(x, wt)| -> Result<f64> {
                    let md = metric_derivative(d, p, mid + half * x)?;
                    Ok(wt * half * j.rate(&vel, md.value))
                })
                .collect::<Result<_>>()?;
            total += parts.iter().sum::<f64>();
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalParameters {
    pub access_resolution: usize,
    pub quadrature_order: usize,
    pub network_pieces: usize,
    pub network_converged: bool,
    /// Last sup-distance diagnostic of the network; bounds the truncated tail.
    pub network_tail: Option<f64>,
    pub rate: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalDeltas {
    pub geodesic_minus_intrinsic: f64,
    pub geodesic_minus_sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalReport {
    pub geodesic_sum: f64,
    pub intrinsic: f64,
    pub sup_lower_bound: f64,
    pub family: PathFamily,
    pub parameters: FunctionalParameters,
    pub deltas: FunctionalDeltas,
    /// `|geodesic - intrinsic|` and `sup - geodesic` within the cross-check tolerance.
    pub consistent: bool,
}

/// All three expressions. Without a family the network pieces are used.
pub fn functional_report<J: RateFunction>(
    d: &NormPlusHighways,
    net: &HighwayNetwork,
    j: &J,
    family: Option<PathFamily>,
    order: usize,
) -> Result<FunctionalReport> {
    let geodesic_sum = functional_geodesic_sum(d, net, j)?;
    let intrinsic = functional_intrinsic(d, net, j, order)?;
    let family = family.unwrap_or_else(|| PathFamily::from_network(net));
    let sup_lower_bound = functional_sup_lower_bound(d, j, &family)?;
    let tol = CROSS_CHECK_TOL * geodesic_sum.abs().max(1.0);
    let deltas = FunctionalDeltas {
        geodesic_minus_intrinsic: geodesic_sum - intrinsic,
        geodesic_minus_sup: geodesic_sum - sup_lower_bound,
    };
    Ok(FunctionalReport {
        geodesic_sum,
        intrinsic,
        sup_lower_bound,
        consistent: deltas.geodesic_minus_intrinsic.abs() <= tol && deltas.geodesic_minus_sup >= -tol,
        deltas,
        family,
        parameters: FunctionalParameters {
            access_resolution: d.access_resolution(),
            quadrature_order: order,
            network_pieces: net.paths.len(),
            network_converged: net.converged,
            network_tail: net.diagnostics.last().copied(),
            rate: j.label(),
        },
    })
}
