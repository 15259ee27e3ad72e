use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::exact::{first_self_contact, polylines_meet};
use super::norm::{Pseudometric, WeightedL1};
use super::path::{lerp, Highway, LipschitzPath};
use crate::error::{FppError, Result};

pub const DEFAULT_ACCESS_RESOLUTION: usize = 64;
const CLOSURE_ROUNDS: usize = 2;
const CANDIDATE_CAP: usize = 4096;

fn default_access() -> usize {
    DEFAULT_ACCESS_RESOLUTION
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Repr {
    g: WeightedL1,
    #[serde(default)]
    highways: Vec<Highway>,
    #[serde(default = "default_access")]
    access_resolution: usize,
    /// Output of the HW recursion: highways may overlap.
    #[serde(default)]
    chain: bool,
}

/// Base norm `g` plus discounted highways.
///
/// `D(x, y)` is the cheapest route that alternates straight `g`-connectors
/// with travel along highways at cost `lambda g`. Entry and exit points are
/// restricted to an access set per highway: breakpoints, a `P`-point
/// arclength grid, and the crossings of each highway with the coordinate
/// hyperplanes through the query points and through other access points.
/// For straight single-highway routes the cost is piecewise linear between
/// hyperplane crossings, so the access set contains an optimum.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "Repr", into = "Repr")]
pub struct NormPlusHighways {
    g: WeightedL1,
    highways: Vec<Highway>,
    access_resolution: usize,
    chain: bool,
    prepared: OnceLock<Vec<Prepared>>,
}

/// The HW recursion produces metrics of the same shape.
pub type HighwayMetric = NormPlusHighways;

impl TryFrom<Repr> for NormPlusHighways {
    type Error = FppError;

    fn try_from(r: Repr) -> Result<Self> {
        let m = NormPlusHighways {
            g: r.g,
            highways: r.highways,
            access_resolution: r.access_resolution,
            chain: r.chain,
            prepared: OnceLock::new(),
        };
        m.validate()?;
        Ok(m)
    }
}

impl From<NormPlusHighways> for Repr {
    fn from(m: NormPlusHighways) -> Repr {
        Repr { g: m.g, highways: m.highways, access_resolution: m.access_resolution, chain: m.chain }
    }
}

impl PartialEq for NormPlusHighways {
    fn eq(&self, other: &Self) -> bool {
        self.g == other.g
            && self.highways == other.highways
            && self.access_resolution == other.access_resolution
            && self.chain == other.chain
    }
}

#[derive(Clone, Debug)]
struct Prepared {
    /// Highways with every speed equal to 1 never beat a straight connector.
    active: bool,
    /// Arclength parameter of each breakpoint.
    starts: Vec<f64>,
    /// Cumulative discounted cost at each breakpoint.
    cum: Vec<f64>,
    base: Vec<f64>,
}

impl NormPlusHighways {
    pub fn new(g: WeightedL1, highways: Vec<Highway>) -> Result<Self> {
        Repr { g, highways, access_resolution: DEFAULT_ACCESS_RESOLUTION, chain: false }.try_into()
    }

    pub fn norm(g: WeightedL1) -> Self {
        NormPlusHighways::raw(g, Vec::new(), DEFAULT_ACCESS_RESOLUTION, false)
    }

    pub(crate) fn raw(g: WeightedL1, highways: Vec<Highway>, access_resolution: usize, chain: bool) -> Self {
        NormPlusHighways { g, highways, access_resolution, chain, prepared: OnceLock::new() }
    }

    pub fn with_access_resolution(&self, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(FppError::Geometry("access resolution must be positive".into()));
        }
        Ok(NormPlusHighways::raw(self.g.clone(), self.highways.clone(), p, self.chain))
    }

    pub fn g(&self) -> &WeightedL1 {
        &self.g
    }

    pub fn highways(&self) -> &[Highway] {
        &self.highways
    }

    pub fn access_resolution(&self) -> usize {
        self.access_resolution
    }

    pub fn is_chain(&self) -> bool {
        self.chain
    }

    pub fn dim(&self) -> usize {
        self.g.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.access_resolution == 0 {
            return Err(FppError::Geometry("access resolution must be positive".into()));
        }
        for (k, h) in self.highways.iter().enumerate() {
            h.validate()?;
            if h.path.dim() != self.dim() {
                return Err(FppError::Geometry(format!("highway {k} has the wrong dimension")));
            }
            if first_self_contact(&h.path.points).is_some() {
                return Err(FppError::Geometry(format!("highway {k} is not injective")));
            }
            let chord = self.g.dist(h.path.start(), h.path.end());
            if h.cost(&self.g) > chord * (1.0 + 1e-12) {
                return Err(FppError::Geometry(format!(
                    "highway {k} costs {} but its endpoints are {chord} apart in g",
                    h.cost(&self.g)
                )));
            }
        }
        if !self.chain {
            for a in 0..self.highways.len() {
                for b in a + 1..self.highways.len() {
                    if polylines_meet(&self.highways[a].path.points, &self.highways[b].path.points) {
                        return Err(FppError::Overlap(format!("highways {a} and {b} intersect")));
                    }
                }
            }
        }
        Ok(())
    }

    fn prepared(&self) -> &[Prepared] {
        self.prepared.get_or_init(|| self.prepare())
    }

    fn prepare(&self) -> Vec<Prepared> {
        let mut out: Vec<Prepared> = self
            .highways
            .iter()
            .map(|h| {
                let mut starts = vec![0.0];
                let mut cum = vec![0.0];
                for (w, l) in h.path.points.windows(2).zip(&h.speeds) {
                    starts.push(starts.last().unwrap() + super::path::l1_dist(&w[0], &w[1]));
                    cum.push(cum.last().unwrap() + l * self.g.dist(&w[0], &w[1]));
                }
                let len = *starts.last().unwrap();
                let p = self.access_resolution;
                let mut base = starts.clone();
                base.extend((0..=p).map(|k| len * k as f64 / p as f64));
                Prepared { active: h.speeds.iter().any(|&l| l < 1.0), starts, cum, base }
            })
            .collect();
        let mut frontier: Vec<Vec<f64>> = self
            .highways
            .iter()
            .zip(&out)
            .filter(|(_, p)| p.active)
            .flat_map(|(h, _)| h.path.points.clone())
            .collect();
        for _ in 0..CLOSURE_ROUNDS {
            let mut next = Vec::new();
            for (h, prep) in self.highways.iter().zip(out.iter_mut()) {
                if !prep.active {
                    continue;
                }
                for c in &frontier {
                    for s in crossings(h, &prep.starts, c) {
                        if prep.base.len() >= CANDIDATE_CAP {
                            break;
                        }
                        prep.base.push(s);
                        next.push(point_on(h, &prep.starts, s));
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        for prep in &mut out {
            sort_dedup(&mut prep.base);
        }
        out
    }

    /// `D(x, y)` at the configured access resolution.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        if x == y {
            return 0.0;
        }
        if !self.prepared().iter().any(|p| p.active) {
            return self.g.dist(x, y);
        }
        self.solve(x, y).0
    }

    /// Doubles the access resolution until successive values agree within `tol`.
    pub fn eval_refined(&self, x: &[f64], y: &[f64], tol: f64, max_resolution: usize) -> (f64, usize) {
        let mut p = self.access_resolution;
        let mut prev = self.eval(x, y);
        while p * 2 <= max_resolution {
            p *= 2;
            let next = NormPlusHighways::raw(self.g.clone(), self.highways.clone(), p, self.chain).eval(x, y);
            let done = (prev - next).abs() <= tol * next.abs().max(1e-300);
            prev = next;
            if done {
                break;
            }
        }
        (prev, p)
    }

    /// A `D`-geodesic from the access graph, as a polyline carrying per-piece speeds
    /// (1 on connectors).
    pub fn geodesic(&self, x: &[f64], y: &[f64]) -> Result<(f64, Highway)> {
        if x.len() != self.dim() || y.len() != self.dim() {
            return Err(FppError::Geometry("point dimension mismatch".into()));
        }
        if x == y {
            return Err(FppError::Geometry("geodesic between equal points".into()));
        }
        let (value, graph, route) = self.solve(x, y);
        let mut points: Vec<Vec<f64>> = vec![x.to_vec()];
        let mut speeds = Vec::new();
        for w in route.windows(2) {
            let (a, b) = (&graph.nodes[w[0]], &graph.nodes[w[1]]);
            match (a.on, b.on, graph.same_block(w[0], w[1])) {
                (Some((h, s)), Some((_, t)), true) => {
                    // adjacent access points always share a segment
                    let k = seg_index(&self.prepared()[h].starts, 0.5 * (s + t));
                    push_piece(&mut points, &mut speeds, b.pt.clone(), self.highways[h].speeds[k]);
                }
                _ => push_piece(&mut points, &mut speeds, b.pt.clone(), 1.0),
            }
        }
        let last = points.last().unwrap().clone();
        if last != y {
            push_piece(&mut points, &mut speeds, y.to_vec(), 1.0);
        }
        let (points, speeds) = merge_collinear(points, speeds);
        let path = LipschitzPath { points, duration: None };
        Ok((value, Highway { path, speeds }))
    }

    fn solve(&self, x: &[f64], y: &[f64]) -> (f64, Graph, Vec<usize>) {
        let graph = Graph::build(self, x, y);
        let (dist, pred) = graph.dijkstra(&self.g);
        let mut route = vec![1usize];
        while let Some(p) = pred[*route.last().unwrap()] {
            route.push(p);
        }
        route.reverse();
        (dist[1], graph, route)
    }
}

impl Pseudometric for NormPlusHighways {
    fn dim(&self) -> usize {
        self.g.weights.len()
    }

    fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        self.eval(x, y)
    }
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(f64::total_cmp);
    v.dedup();
}

fn seg_index(starts: &[f64], s: f64) -> usize {
    let segs = starts.len() - 1;
    starts.partition_point(|&a| a <= s).saturating_sub(1).min(segs - 1)
}

fn point_on(h: &Highway, starts: &[f64], s: f64) -> Vec<f64> {
    let k = seg_index(starts, s);
    let f = ((s - starts[k]) / (starts[k + 1] - starts[k])).clamp(0.0, 1.0);
    if f == 0.0 {
        return h.path.points[k].clone();
    }
    if f == 1.0 {
        return h.path.points[k + 1].clone();
    }
    lerp(&h.path.points[k], &h.path.points[k + 1], f)
}

fn cost_at(prep: &Prepared, s: f64) -> f64 {
    let k = seg_index(&prep.starts, s);
    let f = ((s - prep.starts[k]) / (prep.starts[k + 1] - prep.starts[k])).clamp(0.0, 1.0);
    prep.cum[k] + f * (prep.cum[k + 1] - prep.cum[k])
}

/// Parameters where the highway meets a coordinate hyperplane through `c`.
fn crossings(h: &Highway, starts: &[f64], c: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for (k, w) in h.path.points.windows(2).enumerate() {
        for i in 0..c.len() {
            let (a, b) = (w[0][i], w[1][i]);
            if a != b && (a - c[i]) * (b - c[i]) <= 0.0 {
                let f = (c[i] - a) / (b - a);
                out.push(starts[k] + f * (starts[k + 1] - starts[k]));
            }
        }
    }
    out
}

fn push_piece(points: &mut Vec<Vec<f64>>, speeds: &mut Vec<f64>, p: Vec<f64>, speed: f64) {
    if *points.last().unwrap() != p {
        points.push(p);
        speeds.push(speed);
    }
}

fn merge_collinear(points: Vec<Vec<f64>>, speeds: Vec<f64>) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut out_p = vec![points[0].clone()];
    let mut out_s: Vec<f64> = Vec::new();
    for (k, p) in points.iter().enumerate().skip(1) {
        let sp = speeds[k - 1];
        if out_p.len() >= 2 && *out_s.last().unwrap() == sp {
            let a = &out_p[out_p.len() - 2];
            let b = &out_p[out_p.len() - 1];
            if same_direction(a, b, p) {
                *out_p.last_mut().unwrap() = p.clone();
                continue;
            }
        }
        out_p.push(p.clone());
        out_s.push(sp);
    }
    (out_p, out_s)
}

fn same_direction(a: &[f64], b: &[f64], c: &[f64]) -> bool {
    let u: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let v: Vec<f64> = b.iter().zip(c).map(|(x, y)| y - x).collect();
    let dot: f64 = u.iter().zip(&v).map(|(p, q)| p * q).sum();
    let nu: f64 = u.iter().map(|p| p * p).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|p| p * p).sum::<f64>().sqrt();
    dot > 0.0 && (dot - nu * nv).abs() <= 1e-12 * nu * nv
}

struct GraphNode {
    pt: Vec<f64>,
    on: Option<(usize, f64)>,
}

/// Node 0 is `x`, node 1 is `y`; highway access points follow in blocks.
struct Graph {
    nodes: Vec<GraphNode>,
    /// Highway block of each node.
    block: Vec<Option<usize>>,
    /// Travel cost from node `i` to node `i + 1` inside a block.
    step: Vec<f64>,
}

impl Graph {
    fn build(m: &NormPlusHighways, x: &[f64], y: &[f64]) -> Graph {
        let prepared = m.prepared();
        let mut nodes = vec![GraphNode { pt: x.to_vec(), on: None }, GraphNode { pt: y.to_vec(), on: None }];
        let mut block = vec![None, None];
        let mut step = vec![f64::INFINITY; 2];
        for (h, prep) in prepared.iter().enumerate() {
            if !prep.active {
                continue;
            }
            let hw = &m.highways[h];
            let mut cand = prep.base.clone();
            cand.extend(crossings(hw, &prep.starts, x));
            cand.extend(crossings(hw, &prep.starts, y));
            sort_dedup(&mut cand);
            let costs: Vec<f64> = cand.iter().map(|&s| cost_at(prep, s)).collect();
            for (i, &s) in cand.iter().enumerate() {
                nodes.push(GraphNode { pt: point_on(hw, &prep.starts, s), on: Some((h, s)) });
                block.push(Some(h));
                step.push(if i + 1 < cand.len() { costs[i + 1] - costs[i] } else { f64::INFINITY });
            }
        }
        Graph { nodes, block, step }
    }

    fn same_block(&self, a: usize, b: usize) -> bool {
        a.abs_diff(b) == 1 && self.block[a].is_some() && self.block[a] == self.block[b]
    }

    fn dijkstra(&self, g: &WeightedL1) -> (Vec<f64>, Vec<Option<usize>>) {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![None; n];
        let mut done = vec![false; n];
        dist[0] = 0.0;
        for _ in 0..n {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (i, &d) in dist.iter().enumerate() {
                if !done[i] && d < best {
                    best = d;
                    u = i;
                }
            }
            if u == usize::MAX || u == 1 {
                break;
            }
            done[u] = true;
            let pu = &self.nodes[u].pt;
            for v in 0..n {
                if done[v] {
                    continue;
                }
                let mut w = g.dist(pu, &self.nodes[v].pt);
                if self.same_block(u, v) {
                    w = w.min(self.step[u.min(v)]);
                }
                let nd = best + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = Some(u);
                }
            }
        }
        (dist, pred)
    }
}

/// One step of the HW recursion: `D_K` with `sigma` added as a highway.
///
/// `sigma` must be a geodesic of `target`, and its speed data must match the
/// `target`-cost of each piece. The result is a chain metric: highways may
/// overlap.
pub fn hw_insert(dk: &NormPlusHighways, sigma: &Highway, target: &NormPlusHighways) -> Result<NormPlusHighways> {
    sigma.validate()?;
    if dk.g != target.g {
        return Err(FppError::Geometry("D_K and the target must share the base norm".into()));
    }
    validate_geodesic(target, sigma, 1e-9)?;
    let mut highways = dk.highways.clone();
    highways.push(sigma.clone());
    Ok(NormPlusHighways::raw(dk.g.clone(), highways, dk.access_resolution, true))
}

/// Checks that `sigma` is a geodesic of `target` and that each piece costs
/// `lambda_k g(piece)` in `target`.
pub fn validate_geodesic(target: &NormPlusHighways, sigma: &Highway, tol: f64) -> Result<()> {
    let max_p = target.access_resolution * 16;
    let ends = target.eval_refined(sigma.path.start(), sigma.path.end(), tol, max_p).0;
    let along = sigma.cost(&target.g);
    if (along - ends).abs() > tol * ends.max(1e-300) + 1e-15 {
        return Err(FppError::NotGeodesic { length: along, distance: ends });
    }
    for (w, l) in sigma.path.points.windows(2).zip(&sigma.speeds) {
        let d = target.eval_refined(&w[0], &w[1], tol, max_p).0;
        let claimed = l * target.g.dist(&w[0], &w[1]);
        if (d - claimed).abs() > tol * d.max(1e-300) + 1e-15 {
            return Err(FppError::NotGeodesic { length: claimed, distance: d });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1() -> WeightedL1 {
        WeightedL1::scaled_l1(2, 1.0).unwrap()
    }

    fn diagonal() -> NormPlusHighways {
        NormPlusHighways::new(l1(), vec![Highway::straight(&[0.0, 0.0], &[1.0, 1.0], 0.5).unwrap()]).unwrap()
    }

    #[test]
    fn diagonal_highway_distances() {
        let d = diagonal();
        assert_eq!(d.eval(&[0.0, 0.0], &[1.0, 1.0]), 1.0);
        // enter at (0.5,0.5) from (0.5,0): 0.5, ride to (1,1): 0.5
        assert!((d.eval(&[0.5, 0.0], &[1.0, 1.0]) - 1.0).abs() < 1e-12);
        assert_eq!(d.eval(&[0.0, 1.0], &[0.0, 0.75]), 0.25);
        assert!(d.eval(&[0.2, 0.7], &[0.9, 0.1]) <= 1.3);
    }

    #[test]
    fn geodesic_is_the_highway() {
        let d = diagonal();
        let (v, geo) = d.geodesic(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(geo.path.points, vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(geo.speeds, vec![0.5]);
    }

    #[test]
    fn geodesic_enters_and_leaves() {
        let d = diagonal();
        let (v, geo) = d.geodesic(&[0.5, 0.0], &[1.0, 0.9]).unwrap();
        assert!((geo.cost(d.g()) - v).abs() < 1e-12);
        assert!(geo.speeds.contains(&0.5));
    }

    #[test]
    fn validation() {
        let crossing = vec![
            Highway::straight(&[0.0, 0.0], &[1.0, 1.0], 0.5).unwrap(),
            Highway::straight(&[0.0, 1.0], &[1.0, 0.0], 0.5).unwrap(),
        ];
        assert!(NormPlusHighways::new(l1(), crossing).is_err());
        let wrong_dim = vec![Highway::straight(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], 0.5).unwrap()];
        assert!(NormPlusHighways::new(l1(), wrong_dim).is_err());
    }

    #[test]
    fn insert_from_the_norm() {
        let g = NormPlusHighways::norm(l1());
        let target = diagonal();
        let d1 = hw_insert(&g, &target.highways()[0], &target).unwrap();
        assert_eq!(d1.eval(&[0.0, 0.0], &[1.0, 1.0]), 1.0);
        let bogus = Highway::straight(&[0.0, 1.0], &[1.0, 0.0], 0.5).unwrap();
        assert!(matches!(hw_insert(&g, &bogus, &target), Err(FppError::NotGeodesic { .. })));
    }

    #[test]
    fn json_round_trip() {
        let d = diagonal();
        let s = serde_json::to_string(&d).unwrap();
        let back: NormPlusHighways = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<NormPlusHighways>(r#"{"g":{"weights":[1,1]},"bogus":1}"#).is_err());
    }
}
