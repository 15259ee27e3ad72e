use serde::{Deserialize, Serialize};

use super::norm::WeightedL1;
use crate::error::{FppError, Result};

pub(crate) fn l1_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub(crate) fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub(crate) fn lerp(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
}

/// Piecewise-linear path in `[0,1]^d`.
///
/// The canonical parameter is `l1` arclength scaled to `[0, duration]`;
/// with the default duration (the `l1` length) the path has unit `l1` speed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LipschitzPath {
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub duration: Option<f64>,
}

impl LipschitzPath {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let p = LipschitzPath { points, duration: None };
        p.validate()?;
        Ok(p)
    }

    pub fn segment(a: &[f64], b: &[f64]) -> Result<Self> {
        LipschitzPath::new(vec![a.to_vec(), b.to_vec()])
    }

    /// Same trace traversed in time `duration`.
    pub fn with_duration(mut self, duration: f64) -> Result<Self> {
        if !(duration > 0.0) {
            return Err(FppError::Geometry("duration must be positive".into()));
        }
        self.duration = Some(duration);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(FppError::Geometry("a path needs at least two breakpoints".into()));
        }
        let d = self.points[0].len();
        for p in &self.points {
            if p.len() != d {
                return Err(FppError::Geometry("breakpoint dimension mismatch".into()));
            }
            if p.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return Err(FppError::Geometry(format!("breakpoint {p:?} outside [0,1]^d")));
            }
        }
        for w in self.points.windows(2) {
            if w[0] == w[1] {
                return Err(FppError::Geometry(format!("repeated breakpoint {:?}", w[0])));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn start(&self) -> &[f64] {
        &self.points[0]
    }

    pub fn end(&self) -> &[f64] {
        self.points.last().unwrap()
    }

    pub fn l1_length(&self) -> f64 {
        self.points.windows(2).map(|w| l1_dist(&w[0], &w[1])).sum()
    }

    pub fn euclidean_length(&self) -> f64 {
        self.points.windows(2).map(|w| l2_dist(&w[0], &w[1])).sum()
    }

    pub fn g_length(&self, g: &WeightedL1) -> f64 {
        self.points.windows(2).map(|w| g.dist(&w[0], &w[1])).sum()
    }

    pub fn duration(&self) -> f64 {
        self.duration.unwrap_or_else(|| self.l1_length())
    }

    /// Canonical parameters of the breakpoints.
    pub fn breakpoint_times(&self) -> Vec<f64> {
        let scale = self.duration() / self.l1_length();
        let mut acc = 0.0;
        let mut out = vec![0.0];
        for w in self.points.windows(2) {
            acc += l1_dist(&w[0], &w[1]);
            out.push(acc * scale);
        }
        *out.last_mut().unwrap() = self.duration();
        out
    }

    /// Segment index and local fraction at time `t` (clamped to the domain).
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let times = self.breakpoint_times();
        let t = t.clamp(0.0, self.duration());
        let k = match times.iter().position(|&s| s > t) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => self.segments() - 1,
        }
        .min(self.segments() - 1);
        let span = times[k + 1] - times[k];
        (k, ((t - times[k]) / span).clamp(0.0, 1.0))
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        let (k, f) = self.locate(t);
        lerp(&self.points[k], &self.points[k + 1], f)
    }

    /// Velocity on segment `k`.
    pub fn velocity(&self, k: usize) -> Vec<f64> {
        let scale = self.l1_length() / self.duration();
        let a = &self.points[k];
        let b = &self.points[k + 1];
        let len = l1_dist(a, b);
        a.iter().zip(b).map(|(x, y)| (y - x) / len * scale).collect()
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        LipschitzPath { points, duration: self.duration }
    }
}

/// A path with a piecewise-constant cost multiplier `lambda` in `(0, 1]` per segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Highway {
    pub path: LipschitzPath,
    pub speeds: Vec<f64>,
}

impl Highway {
    pub fn new(path: LipschitzPath, speeds: Vec<f64>) -> Result<Self> {
        let h = Highway { path, speeds };
        h.validate()?;
        Ok(h)
    }

    pub fn uniform(path: LipschitzPath, lambda: f64) -> Result<Self> {
        let n = path.segments();
        Highway::new(path, vec![lambda; n])
    }

    pub fn straight(a: &[f64], b: &[f64], lambda: f64) -> Result<Self> {
        Highway::uniform(LipschitzPath::segment(a, b)?, lambda)
    }

    pub fn validate(&self) -> Result<()> {
        self.path.validate()?;
        if self.speeds.len() != self.path.segments() {
            return Err(FppError::Geometry(format!(
                "{} speeds for {} segments",
                self.speeds.len(),
                self.path.segments()
            )));
        }
        if self.speeds.iter().any(|&l| !(l > 0.0 && l <= 1.0)) {
            return Err(FppError::Geometry(format!("speeds must lie in (0, 1], got {:?}", self.speeds)));
        }
        Ok(())
    }

    /// Discounted length `sum lambda_k g(segment_k)`.
    pub fn cost(&self, g: &WeightedL1) -> f64 {
        self.path
            .points
            .windows(2)
            .zip(&self.speeds)
            .map(|(w, l)| l * g.dist(&w[0], &w[1]))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parametrization() {
        let p = LipschitzPath::new(vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.5, 0.5]]).unwrap();
        assert_eq!(p.l1_length(), 1.0);
        assert_eq!(p.at(0.75), vec![0.5, 0.25]);
        assert_eq!(p.velocity(1), vec![0.0, 1.0]);
        let slow = p.clone().with_duration(2.0).unwrap();
        assert_eq!(slow.at(1.5), vec![0.5, 0.25]);
        assert_eq!(slow.velocity(0), vec![0.5, 0.0]);
        assert!(LipschitzPath::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(LipschitzPath::new(vec![vec![0.0, 0.0], vec![1.5, 0.0]]).is_err());
    }

    #[test]
    fn highway_cost() {
        let g = WeightedL1::scaled_l1(2, 1.0).unwrap();
        let h = Highway::straight(&[0.0, 0.0], &[1.0, 1.0], 0.5).unwrap();
        assert_eq!(h.cost(&g), 1.0);
        assert!(Highway::straight(&[0.0, 0.0], &[1.0, 1.0], 1.5).is_err());
    }
}
