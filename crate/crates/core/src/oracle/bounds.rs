use num_rational::BigRational;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use super::enumerate::ExactProbability;
use crate::error::{FppError, Result};
use crate::model::{l1, EdgeDistribution};

/// `nu([a, t])^{|u-v|_1}`, a lower bound on `P(T_box(u, v) <= t |u-v|_1)`.
///
/// `t = a` is accepted when `nu` has an atom at `a`.
pub fn crude_lower_bound(dist: &EdgeDistribution, u: &[i64], v: &[i64], t: f64) -> Result<ExactProbability> {
    let a = dist.support_infimum();
    if t < a || (t == a && dist.atom_mass(a) == 0.0) {
        return Err(FppError::OutsideDomain(format!("t = {t} must exceed the support infimum {a}")));
    }
    if u.len() != v.len() {
        return Err(FppError::InvalidArgument("dimension mismatch".into()));
    }
    let k = l1(u, v) as u32;
    Ok(match dist.exact_cdf(t) {
        Some(p) => ExactProbability::from_exact(Pow::pow(p, k), 0),
        None => ExactProbability::from_f64(dist.cdf(t).powi(k as i32)),
    })
}

/// `-|x|_1 log nu([a, t])`: the crude upper bound on the elementary rate at speed `t|x|_1`.
pub fn crude_rate_bound(dist: &EdgeDistribution, x_l1: f64, t: f64) -> f64 {
    -x_l1 * dist.cdf(t).ln()
}

/// Lower-tail Cramér rate `sup_{l >= 0} [-l zeta - log E exp(-l tau)]`.
///
/// Returns 0 for `zeta >= E[tau]`, `-log nu({a})` at `zeta = a`, and errors
/// below the support infimum.
pub fn cramer_rate(dist: &EdgeDistribution, zeta: f64) -> Result<f64> {
    let a = dist.support_infimum();
    if !zeta.is_finite() || zeta < a {
        return Err(FppError::OutsideDomain(format!(
            "zeta = {zeta} is below the support infimum {a}"
        )));
    }
    let mean = dist.mean();
    if zeta >= mean {
        return Ok(0.0);
    }
    if zeta == a {
        let m = dist.atom_mass(a);
        return Ok(if m > 0.0 { -m.ln() } else { f64::INFINITY });
    }
    // concave in l; centre at a for stability
    let f = |l: f64| -> Result<f64> { Ok(-l * (zeta - a) - dist.centered_mgf(-l, a)?.ln()) };
    let mut hi = 1.0;
    while f(hi)? > f(hi / 2.0)? {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(FppError::NoConvergence {
                message: "Legendre maximiser escapes to infinity".into(),
                lower: hi / 2.0,
                upper: hi,
            });
        }
    }
    let (mut lo, mut up) = (0.0f64, hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = up - g * (up - lo);
    let mut d = lo + g * (up - lo);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while up - lo > 1e-10 * (1.0 + up) {
        if fc > fd {
            up = d;
            d = c;
            fd = fc;
            c = up - g * (up - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (up - lo);
            fd = f(d)?;
        }
    }
    Ok(f(0.5 * (lo + up))?.max(0.0))
}

/// Log of the Chernoff bound `exp(-l eps n) E[exp(l tau)]^hops`.
pub fn chernoff_log_bound(dist: &EdgeDistribution, lambda: f64, eps: f64, n: usize, hops: usize) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(FppError::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let m = dist.mgf(lambda)?;
    Ok(-lambda * eps * n as f64 + hops as f64 * m.ln())
}

/// `P(T >= eps n) <= exp(-l eps n) E[exp(l tau)]^hops` when a path of `hops` edges exists.
pub fn chernoff_upper_tail(dist: &EdgeDistribution, lambda: f64, eps: f64, n: usize, hops: usize) -> Result<f64> {
    Ok(chernoff_log_bound(dist, lambda, eps, n, hops)?.exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChernoffOptimum {
    pub lambda: f64,
    pub bound: f64,
}

/// Best bound over `lambda` on a geometric grid in `[lambda_min, lambda_max]`.
pub fn optimize_chernoff(
    dist: &EdgeDistribution,
    eps: f64,
    n: usize,
    hops: usize,
    lambda_min: f64,
    lambda_max: f64,
    points: usize,
) -> Result<ChernoffOptimum> {
    if !(lambda_min > 0.0 && lambda_max >= lambda_min) || points == 0 {
        return Err(FppError::InvalidArgument("bad lambda grid".into()));
    }
    let mut best = ChernoffOptimum { lambda: lambda_min, bound: f64::INFINITY };
    for i in 0..points {
        let frac = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
        let l = lambda_min * (lambda_max / lambda_min).powf(frac);
        match chernoff_log_bound(dist, l, eps, n, hops) {
            Ok(lb) => {
                let b = lb.exp().min(1.0);
                if b < best.bound {
                    best = ChernoffOptimum { lambda: l, bound: b };
                }
            }
            Err(FppError::DivergentMgf(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

/// Exact `nu([a, t])` as a rational when available.
pub fn mass_up_to(dist: &EdgeDistribution, t: f64) -> Option<BigRational> {
    dist.exact_cdf(t)
}

pub fn is_one(p: &ExactProbability) -> bool {
    p.exact.as_ref().map(|x| x.is_one()).unwrap_or(p.value == 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Prob;

    #[test]
    fn crude_examples() {
        let d = EdgeDistribution::fair_two_point(1.0, 2.0).unwrap();
        let p = crude_lower_bound(&d, &[0, 0], &[1, 0], 1.0).unwrap();
        assert!(p.equals_ratio(1, 2));
        assert!(is_one(&crude_lower_bound(&d, &[0, 0], &[3, 2], 2.0).unwrap()));
        assert!(is_one(&crude_lower_bound(&d, &[1, 1], &[1, 1], 1.5).unwrap()));
        assert!(crude_lower_bound(&d, &[0, 0], &[1, 0], 0.5).is_err());
        let u = EdgeDistribution::uniform(1.0, 2.0).unwrap();
        assert!(crude_lower_bound(&u, &[0, 0], &[1, 0], 1.0).is_err());
        assert!((crude_lower_bound(&u, &[0, 0], &[2, 0], 1.5).unwrap().value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cramer_examples() {
        let det = EdgeDistribution::deterministic(2.0).unwrap();
        assert_eq!(cramer_rate(&det, 2.5).unwrap(), 0.0);
        let d = EdgeDistribution::fair_two_point(1.0, 2.0).unwrap();
        assert!((cramer_rate(&d, 1.0).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert_eq!(cramer_rate(&d, 1.5).unwrap(), 0.0);
        assert!(cramer_rate(&d, 0.9).is_err());
        // the interior value converges to the boundary atom value
        let near = cramer_rate(&d, 1.0 + 1e-7).unwrap();
        assert!((near - 2f64.ln()).abs() < 1e-5, "{near}");
        // Bernoulli relative entropy closed form: zeta = 1 + q, q in (0, 1/2)
        let q: f64 = 0.2;
        let kl = q * (q / 0.5).ln() + (1.0 - q) * ((1.0 - q) / 0.5).ln();
        assert!((cramer_rate(&d, 1.0 + q).unwrap() - kl).abs() < 1e-9);
        let skew = EdgeDistribution::two_point(1.0, 3.0, Prob::new(1, 4).unwrap()).unwrap();
        assert!(cramer_rate(&skew, 1.4).unwrap() > cramer_rate(&skew, 1.8).unwrap());
    }

    #[test]
    fn cramer_for_exponential() {
        // Exp(1): rate at zeta is zeta - 1 - log zeta
        let e = EdgeDistribution::exponential(1.0, 0.0).unwrap();
        for z in [0.2, 0.5, 0.9] {
            let closed = z - 1.0 - f64::ln(z);
            assert!((cramer_rate(&e, z).unwrap() - closed).abs() < 1e-8);
        }
    }

    #[test]
    fn chernoff_examples() {
        let d = EdgeDistribution::fair_two_point(1.0, 2.0).unwrap();
        let l: f64 = 0.3;
        let m = (l.exp() + (2.0 * l).exp()) / 2.0;
        let expect = (-l * 0.5 * 64.0).exp() * m.powi(8);
        assert!((chernoff_upper_tail(&d, l, 0.5, 64, 8).unwrap() - expect).abs() < 1e-12 * expect);
        assert!((chernoff_upper_tail(&d, 1e-9, 0.5, 64, 8).unwrap() - 1.0).abs() < 1e-6);
        assert!(chernoff_upper_tail(&d, 0.0, 0.5, 64, 8).is_err());
        let e = EdgeDistribution::exponential(1.0, 0.0).unwrap();
        assert!(matches!(chernoff_upper_tail(&e, 1.5, 0.5, 64, 8), Err(FppError::DivergentMgf(_))));
        let opt = optimize_chernoff(&e, 0.3, 64, 8, 0.01, 5.0, 200).unwrap();
        assert!(opt.lambda < 1.0 && opt.bound < 1.0);
    }
}
