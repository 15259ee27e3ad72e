//! Segment intersection in exact rational arithmetic.
//!
//! Every `f64` is a dyadic rational, so converting breakpoints with
//! `BigRational::from_float` loses nothing.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::model::big_to_f64;

pub(crate) type Q = BigRational;

pub(crate) fn q(x: f64) -> Q {
    BigRational::from_float(x).expect("finite coordinate")
}

pub(crate) fn qvec(x: &[f64]) -> Vec<Q> {
    x.iter().map(|&c| q(c)).collect()
}

/// How two closed segments `p + s (p2 - p)` and `r + t (r2 - r)` meet.
#[derive(Clone, Debug, PartialEq)]
pub enum Contact {
    None,
    /// Single common point at parameters `(s, t)`.
    Point { s: Q, t: Q },
    /// Collinear overlap `s in [s0, s1]` of positive length.
    Overlap { s0: Q, s1: Q },
}

impl Contact {
    pub fn is_none(&self) -> bool {
        matches!(self, Contact::None)
    }
}

fn in_unit(x: &Q) -> bool {
    !x.is_negative() && *x <= Q::one()
}

/// Exact contact between two non-degenerate segments.
pub fn segment_contact(p: &[f64], p2: &[f64], r: &[f64], r2: &[f64]) -> Contact {
    let (p, p2, r, r2) = (qvec(p), qvec(p2), qvec(r), qvec(r2));
    let d = p.len();
    let u: Vec<Q> = (0..d).map(|i| &p2[i] - &p[i]).collect();
    let v: Vec<Q> = (0..d).map(|i| &r2[i] - &r[i]).collect();
    let w: Vec<Q> = (0..d).map(|i| &r[i] - &p[i]).collect();
    // p + s u = r + t v  <=>  s u - t v = w
    let mut pivot = None;
    'outer: for i in 0..d {
        for j in i + 1..d {
            let det = &u[i] * -&v[j] + &v[i] * &u[j];
            if !det.is_zero() {
                pivot = Some((i, j, det));
                break 'outer;
            }
        }
    }
    match pivot {
        Some((i, j, det)) => {
            // Cramer's rule on rows i, j of [u, -v] [s, t]^T = w.
            let s = (&w[i] * -&v[j] + &v[i] * &w[j]) / &det;
            let t = (&u[i] * &w[j] - &w[i] * &u[j]) / &det;
            if !in_unit(&s) || !in_unit(&t) {
                return Contact::None;
            }
            let ok = (0..d).all(|k| &p[k] + &s * &u[k] == &r[k] + &t * &v[k]);
            if ok {
                Contact::Point { s, t }
            } else {
                Contact::None
            }
        }
        None => {
            // parallel: collinear iff w is parallel to u
            let k = (0..d).find(|&k| !u[k].is_zero()).expect("non-degenerate segment");
            let collinear = (0..d).all(|m| &w[m] * &u[k] == &w[k] * &u[m]);
            if !collinear {
                return Contact::None;
            }
            let s_a = &w[k] / &u[k];
            let s_b = (&w[k] + &v[k]) / &u[k];
            let (lo, hi) = if s_a <= s_b { (s_a, s_b) } else { (s_b, s_a) };
            let s0 = if lo.is_negative() { Q::zero() } else { lo };
            let s1 = if hi > Q::one() { Q::one() } else { hi };
            if s0 > s1 {
                Contact::None
            } else if s0 == s1 {
                let t = (&s0 * &u[k] - &w[k]) / &v[k];
                Contact::Point { s: s0, t }
            } else {
                Contact::Overlap { s0, s1 }
            }
        }
    }
}

/// Do two polylines share a set of positive length?
pub fn polylines_overlap(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
    a.windows(2).any(|sa| {
        b.windows(2).any(|sb| matches!(segment_contact(&sa[0], &sa[1], &sb[0], &sb[1]), Contact::Overlap { .. }))
    })
}

/// Do two polylines meet at all?
pub fn polylines_meet(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
    a.windows(2).any(|sa| b.windows(2).any(|sb| !segment_contact(&sa[0], &sa[1], &sb[0], &sb[1]).is_none()))
}

/// First self-contact of a polyline between non-adjacent segments, or a
/// backtracking overlap between adjacent ones: `(i, j, s_i, s_j)`.
pub(crate) fn first_self_contact(points: &[Vec<f64>]) -> Option<(usize, usize, f64, f64)> {
    let m = points.len() - 1;
    for i in 0..m {
        for j in i + 1..m {
            let c = segment_contact(&points[i], &points[i + 1], &points[j], &points[j + 1]);
            match c {
                Contact::None => {}
                Contact::Point { s, t } => {
                    if j == i + 1 && s == Q::one() && t.is_zero() {
                        continue;
                    }
                    return Some((i, j, big_to_f64(&s), big_to_f64(&t)));
                }
                Contact::Overlap { s0, .. } => {
                    // earliest shared point along segment i
                    let p = segment_point(&points[i], &points[i + 1], &s0);
                    let t = param_on(&points[j], &points[j + 1], &p).unwrap_or_else(Q::zero);
                    return Some((i, j, big_to_f64(&s0), big_to_f64(&t)));
                }
            }
        }
    }
    None
}

fn segment_point(a: &[f64], b: &[f64], s: &Q) -> Vec<Q> {
    a.iter().zip(b).map(|(&x, &y)| q(x) + s * (q(y) - q(x))).collect()
}

/// Parameter of `p` on segment `[a, b]` if it lies there.
fn param_on(a: &[f64], b: &[f64], p: &[Q]) -> Option<Q> {
    let (a, b) = (qvec(a), qvec(b));
    let k = (0..a.len()).find(|&k| a[k] != b[k])?;
    let s = (&p[k] - &a[k]) / (&b[k] - &a[k]);
    let on = (0..a.len()).all(|m| &a[m] + &s * (&b[m] - &a[m]) == p[m]);
    (on && in_unit(&s)).then_some(s)
}
