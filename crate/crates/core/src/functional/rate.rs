use serde::{Deserialize, Serialize};

use crate::elementary_rate::RateSurface;
use crate::error::{FppError, Result};
use crate::geometry::WeightedL1;
use crate::model::big_to_f64;

/// An elementary rate `J(u, zeta)` on real directions.
pub trait RateFunction: Sync {
    fn rate(&self, u: &[f64], zeta: f64) -> f64;
    fn label(&self) -> String;
}

/// Closed-form convex, absolutely homogeneous surrogates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AnalyticRate {
    /// `c (g(u) - zeta)^+`.
    PositivePart { g: WeightedL1, scale: f64 },
    /// `c ((g(u) - zeta)^+)^p / g(u)^(p-1)`, `p >= 1`.
    Power { g: WeightedL1, scale: f64, power: f64 },
}

impl AnalyticRate {
    pub fn positive_part(g: WeightedL1) -> Self {
        AnalyticRate::PositivePart { g, scale: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let (g, scale) = match self {
            AnalyticRate::PositivePart { g, scale } => (g, *scale),
            AnalyticRate::Power { g, scale, power } => {
                if !(*power >= 1.0) || !power.is_finite() {
                    return Err(FppError::InvalidArgument(format!("power must be >= 1, got {power}")));
                }
                (g, *scale)
            }
        };
        WeightedL1::new(g.weights.clone())?;
        if !(scale >= 0.0) || !scale.is_finite() {
            return Err(FppError::InvalidArgument(format!("scale must be finite and >= 0, got {scale}")));
        }
        Ok(())
    }

    /// The same rate multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            AnalyticRate::PositivePart { scale, .. } | AnalyticRate::Power { scale, .. } => *scale *= c,
        }
        out
    }
}

impl RateFunction for AnalyticRate {
    fn rate(&self, u: &[f64], zeta: f64) -> f64 {
        match self {
            AnalyticRate::PositivePart { g, scale } => scale * (g.norm(u) - zeta).max(0.0),
            AnalyticRate::Power { g, scale, power } => {
                let gu = g.norm(u);
                let gap = (gu - zeta).max(0.0);
                if gap == 0.0 {
                    0.0
                } else {
                    scale * gap.powf(*power) / gu.powf(power - 1.0)
                }
            }
        }
    }

    fn label(&self) -> String {
        match self {
            AnalyticRate::PositivePart { scale, .. } => format!("{scale} (g(u) - zeta)^+"),
            AnalyticRate::Power { scale, power, .. } => format!("{scale} ((g(u) - zeta)^+)^{power} / g(u)^{}", power - 1.0),
        }
    }
}

/// A tabulated surface read at real directions.
///
/// `|u|` is snapped to the two angularly nearest rays and the two per-ray
/// values are blended by angle; along each ray the value is linear between
/// cells and held constant beyond the first and last filled cell. This is an
/// approximation whose error is bounded by the modulus of the surface.
pub struct SurfaceRate<'a> {
    surface: &'a RateSurface,
    rays: Vec<Ray>,
    pub scale: f64,
}

struct Ray {
    unit: Vec<f64>,
    l1: f64,
    /// `(zeta, value)` per unit ray vector, increasing in `zeta`.
    cells: Vec<(f64, f64)>,
}

impl<'a> SurfaceRate<'a> {
    pub fn new(surface: &'a RateSurface) -> Result<Self> {
        let mut rays = Vec::new();
        for t in &surface.rays {
            let mut cells: Vec<(f64, f64)> = t
                .cells
                .iter()
                .filter_map(|c| c.value.as_ref().map(|v| (big_to_f64(&c.zeta), big_to_f64(v))))
                .collect();
            cells.sort_by(|a, b| a.0.total_cmp(&b.0));
            if cells.is_empty() {
                continue;
            }
            let e: f64 = t.ray.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt();
            rays.push(Ray {
                unit: t.ray.iter().map(|&c| c as f64 / e).collect(),
                l1: t.ray.iter().map(|c| c.abs() as f64).sum(),
                cells,
            });
        }
        if rays.is_empty() {
            return Err(FppError::Precondition("the surface has no filled cell".into()));
        }
        Ok(SurfaceRate { surface, rays, scale: 1.0 })
    }

    pub fn surface(&self) -> &RateSurface {
        self.surface
    }

    fn ray_value(ray: &Ray, u_l1: f64, zeta: f64) -> f64 {
        // J(u, zeta) = s J(r, zeta / s) with u ~ s r
        let s = u_l1 / ray.l1;
        let z = zeta / s;
        let c = &ray.cells;
        let v = if z <= c[0].0 {
            c[0].1
        } else if z >= c[c.len() - 1].0 {
            c[c.len() - 1].1
        } else {
            let k = c.partition_point(|p| p.0 <= z) - 1;
            let (z0, v0) = c[k];
            let (z1, v1) = c[k + 1];
            v0 + (v1 - v0) * (z - z0) / (z1 - z0)
        };
        s * v
    }
}

impl RateFunction for SurfaceRate<'_> {
    fn rate(&self, u: &[f64], zeta: f64) -> f64 {
        let abs: Vec<f64> = u.iter().map(|c| c.abs()).collect();
        let l1: f64 = abs.iter().sum();
        if l1 == 0.0 {
            return 0.0;
        }
        let e: f64 = abs.iter().map(|c| c * c).sum::<f64>().sqrt();
        let mut near: Vec<(f64, usize)> = self
            .rays
            .iter()
            .enumerate()
            .filter(|(_, r)| r.unit.len() == u.len())
            .map(|(i, r)| {
                let cos: f64 = r.unit.iter().zip(&abs).map(|(a, b)| a * b).sum::<f64>() / e;
                (cos.clamp(-1.0, 1.0).acos(), i)
            })
            .collect();
        if near.is_empty() {
            return f64::NAN;
        }
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let (a0, i0) = near[0];
        let v0 = Self::ray_value(&self.rays[i0], l1, zeta);
        let v = match near.get(1) {
            Some(&(a1, i1)) if a0 > 0.0 => {
                let v1 = Self::ray_value(&self.rays[i1], l1, zeta);
                (a1 * v0 + a0 * v1) / (a0 + a1)
            }
            _ => v0,
        };
        self.scale * v
    }

    fn label(&self) -> String {
        format!("rate surface ({} rays, scale {})", self.rays.len(), self.scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_part_values() {
        let j = AnalyticRate::positive_part(WeightedL1::scaled_l1(2, 1.0).unwrap());
        assert_eq!(j.rate(&[1.0, 1.0], 1.0), 1.0);
        assert_eq!(j.rate(&[1.0, 1.0], 3.0), 0.0);
        assert_eq!(j.scaled(3.0).rate(&[1.0, 1.0], 1.0), 3.0);
        // homogeneity
        assert_eq!(j.rate(&[2.0, 2.0], 2.0), 2.0 * j.rate(&[1.0, 1.0], 1.0));
    }

    #[test]
    fn power_rate_is_homogeneous() {
        let j = AnalyticRate::Power { g: WeightedL1::scaled_l1(2, 1.0).unwrap(), scale: 1.0, power: 2.0 };
        j.validate().unwrap();
        let a = j.rate(&[0.3, 0.1], 0.2);
        let b = j.rate(&[0.6, 0.2], 0.4);
        assert!((b - 2.0 * a).abs() < 1e-15);
        assert!(AnalyticRate::Power { g: WeightedL1::scaled_l1(2, 1.0).unwrap(), scale: 1.0, power: 0.5 }
            .validate()
            .is_err());
    }

    #[test]
    fn analytic_rate_json() {
        let j: AnalyticRate =
            serde_json::from_str(r#"{"kind":"positive-part","g":{"weights":[1.0,1.0]},"scale":2.0}"#).unwrap();
        assert_eq!(j.rate(&[1.0, 0.0], 0.5), 1.0);
        assert!(serde_json::from_str::<AnalyticRate>(r#"{"kind":"positive-part","g":{"weights":[1.0]},"scale":1.0,"x":1}"#)
            .is_err());
    }
}
