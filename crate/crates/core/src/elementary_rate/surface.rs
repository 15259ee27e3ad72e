use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Serialize, Serializer};

use super::point::RatePoint;
use crate::error::{FppError, Result};
use crate::model::big_to_f64;

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

fn qi(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn ser_q<S: Serializer>(v: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(big_to_f64(v))
}

fn ser_opt_q<S: Serializer>(v: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_some(&big_to_f64(v)),
        None => s.serialize_none(),
    }
}

/// One `zeta` cell of a ray, stored per unit of the primitive ray vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceCell {
    #[serde(serialize_with = "ser_q")]
    pub zeta: BigRational,
    /// `None` while only a censored lower bound is known.
    #[serde(serialize_with = "ser_opt_q")]
    pub value: Option<BigRational>,
    /// Interval of the raw estimate, before any envelope step.
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub censored: bool,
    pub provenance: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RayTable {
    /// Primitive direction with nonnegative coordinates.
    pub ray: Vec<i64>,
    pub cells: Vec<SurfaceCell>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionStep {
    Symmetrize,
    Homogenize,
    MonotoneEnvelope,
    ConvexEnvelope,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Modification {
    pub step: ExtensionStep,
    pub x: Vec<i64>,
    pub zeta: f64,
    pub before: Option<f64>,
    pub after: f64,
}

/// Tabulated elementary rate after the extension rules.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateSurface {
    pub rays: Vec<RayTable>,
    pub modifications: Vec<Modification>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    pub homogeneous: bool,
    pub symmetric: bool,
    pub nonincreasing: bool,
    pub convex: bool,
}

impl InvariantReport {
    pub fn all(&self) -> bool {
        self.homogeneous && self.symmetric && self.nonincreasing && self.convex
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Primitive vector and multiplier of `|x|`.
pub fn primitive_ray(x: &[i64]) -> Result<(Vec<i64>, i64)> {
    let abs: Vec<i64> = x.iter().map(|c| c.abs()).collect();
    let g = abs.iter().fold(0i64, |acc, &c| gcd(acc, c));
    if g == 0 {
        return Err(FppError::InvalidArgument("direction must be nonzero".into()));
    }
    Ok((abs.iter().map(|c| c / g).collect(), g))
}

#[derive(Clone)]
struct Raw {
    value: Option<BigRational>,
    lower: f64,
    upper: f64,
    censored: bool,
    provenance: Vec<String>,
}

fn merge(key: &str, a: Raw, b: Raw) -> Result<Raw> {
    if a.upper < b.lower || b.upper < a.lower {
        return Err(FppError::Conflict(format!(
            "{key}: intervals [{}, {}] and [{}, {}] are disjoint",
            a.lower, a.upper, b.lower, b.upper
        )));
    }
    let value = match (a.value, b.value) {
        (Some(u), Some(v)) => Some(if u <= v { u } else { v }),
        (u, v) => u.or(v),
    };
    let mut provenance = a.provenance;
    provenance.extend(b.provenance);
    Ok(Raw {
        censored: value.is_none(),
        value,
        lower: a.lower.max(b.lower),
        upper: a.upper.min(b.upper),
        provenance,
    })
}

fn label(p: &RatePoint) -> String {
    let method = serde_json::to_value(p.method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    format!("{method} n={} x={:?} zeta={}", p.n, p.x, p.zeta)
}

/// Symmetrize, homogenize, take the componentwise-monotone envelope and then
/// the lower convex envelope along each ray. Every changed cell is recorded.
///
/// Duplicates (same key after a step) keep the smaller value; duplicates with
/// disjoint intervals are reported as a conflict.
pub fn extend_surface(raw: &[RatePoint]) -> Result<RateSurface> {
    let mut mods = Vec::new();
    // 1. reflection
    let mut sym: BTreeMap<(Vec<i64>, BigRational), Raw> = BTreeMap::new();
    for p in raw {
        if p.x.iter().all(|&c| c == 0) || p.x.is_empty() {
            return Err(FppError::InvalidArgument("direction must be nonzero".into()));
        }
        let abs: Vec<i64> = p.x.iter().map(|c| c.abs()).collect();
        let entry = Raw {
            value: (!p.censored).then(|| q(p.estimate)),
            lower: p.ci.lower,
            upper: p.ci.upper,
            censored: p.censored,
            provenance: vec![label(p)],
        };
        let key = (abs.clone(), q(p.zeta));
        let merged = match sym.remove(&key) {
            Some(prev) => merge(&format!("x={abs:?} zeta={}", p.zeta), prev, entry)?,
            None => entry,
        };
        sym.insert(key, merged);
    }
    for p in raw {
        let abs: Vec<i64> = p.x.iter().map(|c| c.abs()).collect();
        let cell = &sym[&(abs.clone(), q(p.zeta))];
        let after = cell.value.as_ref().map(big_to_f64);
        let before = (!p.censored).then_some(p.estimate);
        if (abs != p.x || after != before) && after.is_some() {
            mods.push(Modification { step: ExtensionStep::Symmetrize, x: p.x.clone(), zeta: p.zeta, before, after: after.unwrap() });
        }
    }
    // 2. homogeneity: J(s r, s z) = s J(r, z)
    let mut rays: BTreeMap<Vec<i64>, BTreeMap<BigRational, Raw>> = BTreeMap::new();
    for ((abs, zeta), cell) in sym {
        let (ray, s) = primitive_ray(&abs)?;
        let sq = qi(s);
        let scaled = Raw {
            value: cell.value.as_ref().map(|v| v / &sq),
            lower: cell.lower / s as f64,
            upper: cell.upper / s as f64,
            ..cell.clone()
        };
        if s > 1 {
            if let Some(v) = &scaled.value {
                mods.push(Modification {
                    step: ExtensionStep::Homogenize,
                    x: abs.clone(),
                    zeta: big_to_f64(&zeta),
                    before: cell.value.as_ref().map(big_to_f64),
                    after: big_to_f64(v),
                });
            }
        }
        let z = &zeta / &sq;
        let table = rays.entry(ray.clone()).or_default();
        let merged = match table.remove(&z) {
            Some(prev) => merge(&format!("ray={ray:?} zeta={}", big_to_f64(&z)), prev, scaled)?,
            None => scaled,
        };
        table.insert(z, merged);
    }
    let mut tables: Vec<RayTable> = rays
        .into_iter()
        .map(|(ray, cells)| RayTable {
            ray,
            cells: cells
                .into_iter()
                .map(|(zeta, c)| SurfaceCell {
                    zeta,
                    value: c.value,
                    ci_lower: c.lower,
                    ci_upper: c.upper,
                    censored: c.censored,
                    provenance: c.provenance,
                })
                .collect(),
        })
        .collect();
    // 3. componentwise-monotone envelope: inf over x' >= x, zeta' <= zeta
    let snapshot = tables.clone();
    for table in &mut tables {
        for cell in &mut table.cells {
            let mut best = cell.value.clone();
            for other in &snapshot {
                let Some(s) = domination_scale(&table.ray, &other.ray) else { continue };
                for oc in &other.cells {
                    let Some(v) = &oc.value else { continue };
                    if &s * &oc.zeta <= cell.zeta {
                        let cand = &s * v;
                        if best.as_ref().is_none_or(|b| cand < *b) {
                            best = Some(cand);
                        }
                    }
                }
            }
            if best != cell.value {
                mods.push(Modification {
                    step: ExtensionStep::MonotoneEnvelope,
                    x: table.ray.clone(),
                    zeta: big_to_f64(&cell.zeta),
                    before: cell.value.as_ref().map(big_to_f64),
                    after: big_to_f64(best.as_ref().unwrap()),
                });
                cell.value = best;
            }
        }
    }
    // 4. lower convex envelope in zeta
    for table in &mut tables {
        let known: Vec<(BigRational, BigRational)> = table
            .cells
            .iter()
            .filter_map(|c| c.value.clone().map(|v| (c.zeta.clone(), v)))
            .collect();
        let hull = lower_hull(&known);
        for cell in &mut table.cells {
            let Some(v) = cell.value.clone() else { continue };
            let h = hull_value(&hull, &cell.zeta);
            if h < v {
                mods.push(Modification {
                    step: ExtensionStep::ConvexEnvelope,
                    x: table.ray.clone(),
                    zeta: big_to_f64(&cell.zeta),
                    before: Some(big_to_f64(&v)),
                    after: big_to_f64(&h),
                });
                cell.value = Some(h);
            }
        }
    }
    Ok(RateSurface { rays: tables, modifications: mods })
}

/// Smallest `s` with `s r' >= r` componentwise, if any.
fn domination_scale(r: &[i64], other: &[i64]) -> Option<BigRational> {
    let mut s: Option<BigRational> = None;
    for (&a, &b) in r.iter().zip(other) {
        if a == 0 {
            continue;
        }
        if b == 0 {
            return None;
        }
        let need = BigRational::new(BigInt::from(a), BigInt::from(b));
        if s.as_ref().is_none_or(|cur| need > *cur) {
            s = Some(need);
        }
    }
    s
}

fn cross(o: &(BigRational, BigRational), a: &(BigRational, BigRational), b: &(BigRational, BigRational)) -> BigRational {
    (&a.0 - &o.0) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&b.0 - &o.0)
}

fn lower_hull(points: &[(BigRational, BigRational)]) -> Vec<(BigRational, BigRational)> {
    let mut hull: Vec<(BigRational, BigRational)> = Vec::new();
    for p in points {
        while hull.len() >= 2 && !cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p).is_positive() {
            hull.pop();
        }
        hull.push(p.clone());
    }
    hull
}

fn hull_value(hull: &[(BigRational, BigRational)], z: &BigRational) -> BigRational {
    for w in hull.windows(2) {
        if *z >= w[0].0 && *z <= w[1].0 {
            return &w[0].1 + (&w[1].1 - &w[0].1) * (z - &w[0].0) / (&w[1].0 - &w[0].0);
        }
    }
    hull.iter().find(|p| p.0 == *z).map(|p| p.1.clone()).unwrap_or_else(|| hull[0].1.clone())
}

impl RateSurface {
    pub fn ray(&self, ray: &[i64]) -> Option<&RayTable> {
        self.rays.iter().find(|t| t.ray == ray)
    }

    /// `J(x, zeta)` by symmetry and homogeneity when `zeta / s` is a tabulated cell.
    pub fn value_exact(&self, x: &[i64], zeta: f64) -> Option<BigRational> {
        let (ray, s) = primitive_ray(x).ok()?;
        let z = q(zeta) / qi(s);
        let cell = self.ray(&ray)?.cells.iter().find(|c| c.zeta == z)?;
        cell.value.as_ref().map(|v| v * qi(s))
    }

    pub fn value(&self, x: &[i64], zeta: f64) -> Option<f64> {
        self.value_exact(x, zeta).map(|v| big_to_f64(&v))
    }

    /// Value at the smallest tabulated `zeta` of the ray of `x`. No
    /// extrapolation towards `a |x|_1` is attempted; the flag says so.
    pub fn boundary(&self, x: &[i64]) -> Option<(f64, f64, bool)> {
        let (ray, s) = primitive_ray(x).ok()?;
        let cell = self.ray(&ray)?.cells.iter().find(|c| c.value.is_some())?;
        let v = cell.value.as_ref().unwrap() * qi(s);
        Some((big_to_f64(&(&cell.zeta * qi(s))), big_to_f64(&v), true))
    }

    /// Exact checks of the extension invariants on the stored table.
    pub fn check_invariants(&self) -> InvariantReport {
        let mut rep = InvariantReport { homogeneous: true, symmetric: true, nonincreasing: true, convex: true };
        for t in &self.rays {
            let known: Vec<(&BigRational, &BigRational)> =
                t.cells.iter().filter_map(|c| c.value.as_ref().map(|v| (&c.zeta, v))).collect();
            let first_known = t.cells.iter().position(|c| c.value.is_some()).unwrap_or(t.cells.len());
            if t.cells[first_known..].iter().any(|c| c.value.is_none()) {
                rep.nonincreasing = false;
            }
            for w in known.windows(2) {
                if w[1].1 > w[0].1 {
                    rep.nonincreasing = false;
                }
            }
            for w in known.windows(3) {
                let left = (w[1].1 - w[0].1) * (w[2].0 - w[1].0);
                let right = (w[2].1 - w[1].1) * (w[1].0 - w[0].0);
                if left > right {
                    rep.convex = false;
                }
            }
            for c in &t.cells {
                let Some(v) = &c.value else { continue };
                let z = big_to_f64(&c.zeta);
                for s in 2..=3i64 {
                    let x: Vec<i64> = t.ray.iter().map(|r| r * s).collect();
                    let zs = q(z) * qi(s);
                    let got = self.value_exact(&x, big_to_f64(&zs));
                    // exact when s z is representable; otherwise skip
                    if q(big_to_f64(&zs)) == zs && got != Some(v * qi(s)) {
                        rep.homogeneous = false;
                    }
                }
                let mut flipped = t.ray.clone();
                for i in 0..flipped.len() {
                    flipped[i] = -flipped[i];
                    if self.value_exact(&flipped, z).as_ref() != Some(v) {
                        rep.symmetric = false;
                    }
                }
            }
        }
        rep
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ray", "zeta", "value", "ci_lower", "ci_upper", "censored", "provenance"])?;
        for t in &self.rays {
            let ray = t.ray.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
            for c in &t.cells {
                w.write_record([
                    ray.clone(),
                    big_to_f64(&c.zeta).to_string(),
                    c.value.as_ref().map(|v| big_to_f64(v).to_string()).unwrap_or_default(),
                    c.ci_lower.to_string(),
                    c.ci_upper.to_string(),
                    c.censored.to_string(),
                    c.provenance.join("; "),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elementary_rate::RateMethod;
    use crate::stats::Interval;

    fn pt(x: Vec<i64>, zeta: f64, v: f64, half: f64) -> RatePoint {
        RatePoint {
            x,
            zeta,
            n: 4,
            estimate: v,
            ci: Interval { lower: v - half, upper: v + half },
            method: RateMethod::MonteCarlo,
            censored: false,
            hits: None,
            samples: None,
        }
    }

    #[test]
    fn homogeneity_lookup() {
        let s = extend_surface(&[pt(vec![1, 0], 1.25, 0.4, 0.01)]).unwrap();
        assert_eq!(s.value(&[2, 0], 2.5), Some(0.8));
        assert_eq!(s.value(&[0, -1], 1.25), None);
        assert_eq!(s.value(&[-1, 0], 1.25), Some(0.4));
        assert!(s.check_invariants().all());
    }

    #[test]
    fn reflections_are_merged() {
        let s = extend_surface(&[pt(vec![1, 0], 1.25, 0.4, 0.05), pt(vec![-1, 0], 1.25, 0.42, 0.05)]).unwrap();
        assert_eq!(s.value(&[1, 0], 1.25), s.value(&[-1, 0], 1.25));
        assert!(s.modifications.iter().any(|m| m.step == ExtensionStep::Symmetrize));
        let clash = extend_surface(&[pt(vec![1, 0], 1.25, 0.4, 0.01), pt(vec![-1, 0], 1.25, 0.6, 0.01)]);
        assert!(matches!(clash, Err(FppError::Conflict(_))));
    }

    #[test]
    fn envelopes_never_increase() {
        let raw = vec![
            pt(vec![1, 0], 1.1, 0.5, 0.1),
            pt(vec![1, 0], 1.2, 0.6, 0.6),
            pt(vec![1, 0], 1.3, 0.1, 0.1),
            pt(vec![1, 0], 1.4, 0.09, 0.1),
            pt(vec![2, 0], 2.4, 0.1, 0.1),
            pt(vec![1, 1], 2.5, 0.3, 0.1),
        ];
        let s = extend_surface(&raw).unwrap();
        for p in &raw {
            assert!(s.value(&p.x, p.zeta).unwrap() <= p.estimate);
        }
        assert!(s.check_invariants().all(), "{:?}", s.check_invariants());
        // (2,0) at 2.4 is (1,0) at 1.2 with value 0.05
        assert_eq!(s.value(&[1, 0], 1.2), Some(0.05));
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("ray,zeta,value"));
    }

    #[test]
    fn censored_cells_filled_by_envelope() {
        let mut c = pt(vec![1, 0], 1.3, 0.2, 0.0);
        c.censored = true;
        c.ci.upper = f64::INFINITY;
        let s = extend_surface(&[pt(vec![1, 0], 1.2, 0.3, 0.05), c]).unwrap();
        assert_eq!(s.value(&[1, 0], 1.3), Some(0.3));
    }
}
