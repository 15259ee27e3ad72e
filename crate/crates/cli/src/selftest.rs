//! Invariant suite behind `fpp selftest`. Every check either holds for any
//! admissible law or is skipped with a reason.

use fpp_core::elementary_rate::{estimate_rate_point, extend_surface, RateMethod, RatePoint};
use fpp_core::fixtures::{diagonal_highway, random_segment_highways};
use fpp_core::functional::{
    empirical_ld_trend, functional_report, strict_monotonicity_probe, AnalyticRate, LdTrendOptions,
};
use fpp_core::geometry::{build_highway_network, NetworkOptions, NormPlusHighways, WeightedL1};
use fpp_core::model::{derive_seed, l1, sample_weights, EdgeDistribution, LatticeBox};
use fpp_core::oracle::{
    configuration_count, crude_lower_bound, exact_event_probability, fkg_grid, EventSpec, DEFAULT_CAP,
};
use fpp_core::passage_time::{
    disjoint_paths, rescaled_metric, shortest_path_tree, truncation_excess, uniform_gap, validate_disjoint_paths,
    GapOptions, QueueKind,
};
use fpp_core::stats::Interval;
use fpp_core::Result;

use crate::commands::Outcome;
use crate::config::SelftestConfig;
use crate::error::CliResult;
use crate::output::Artifacts;

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((pass, detail)) => Check { name, pass, detail },
        Err(e) => Check { name, pass: false, detail: format!("error: {e}") },
    }
}

fn l1_unit() -> WeightedL1 {
    WeightedL1::scaled_l1(2, 1.0).unwrap()
}

/// Enumerable on `lattice` under the default cap.
fn enumerable(dist: &EdgeDistribution, lattice: LatticeBox) -> bool {
    dist.atoms().is_some_and(|a| configuration_count(a.len(), lattice.edge_count(), DEFAULT_CAP).is_ok())
}

pub fn checks(c: &SelftestConfig) -> Vec<Check> {
    let dist = &c.distribution;
    let lat = LatticeBox::new(2, c.side).unwrap();
    let mut out = Vec::new();

    out.push(check("field-determinism", || {
        let a = sample_weights(dist, lat, c.seed)?;
        let b = sample_weights(dist, lat, c.seed)?;
        let big = sample_weights(dist, LatticeBox::new(2, c.side + 2)?, c.seed)?;
        let shared = lat.edges().all(|e| {
            let (lo, hi, _) = lat.edge_endpoints(e);
            let i = big.lattice.index(&lat.coords(lo)).unwrap();
            let j = big.lattice.index(&lat.coords(hi)).unwrap();
            big.weight_between(i, j) == Some(a.weight(e))
        });
        Ok((a == b && shared, format!("{} edges, shared with a larger box: {shared}", lat.edge_count())))
    }));

    out.push(check("passage-time-metric", || {
        let w = sample_weights(dist, lat, c.seed)?;
        let m = rescaled_metric(&w)?;
        let k = m.len();
        let a = dist.support_infimum();
        let mut worst = 0.0f64;
        for i in 0..k {
            worst = worst.max(m.value(i, i).abs());
            for j in 0..k {
                let dij = m.value(i, j);
                worst = worst.max((dij - m.value(j, i)).abs());
                let hops = l1(&lat.coords(m.points[i]), &lat.coords(m.points[j])) as f64;
                worst = worst.max(a * hops / c.side as f64 - dij);
                for z in 0..k {
                    worst = worst.max(dij - m.value(i, z) - m.value(z, j));
                }
            }
        }
        Ok((worst <= 1e-12, format!("{k} vertices, worst axiom violation {worst:e}")))
    }));

    out.push(check("deterministic-exactness", || {
        let EdgeDistribution::Deterministic { value } = dist else {
            return Ok((true, "skipped: law is not deterministic".into()));
        };
        let w = sample_weights(dist, lat, c.seed)?;
        let m = rescaled_metric(&w)?;
        let mut worst = 0.0f64;
        for i in 0..m.len() {
            for j in 0..m.len() {
                let hops = l1(&lat.coords(m.points[i]), &lat.coords(m.points[j])) as f64;
                worst = worst.max((m.value(i, j) - value * hops / c.side as f64).abs());
            }
        }
        Ok((worst <= 1e-12, format!("max |T/n - c l1/n| = {worst:e}")))
    }));

    out.push(check("oracle-brute-force-values", || {
        let fair = EdgeDistribution::fair_two_point(1.0, 2.0)?;
        let unit = LatticeBox::new(2, 1)?;
        let p1 = exact_event_probability(&EventSpec::passage_time_at_most(&[0, 0], &[1, 0], 1.0), &fair, unit)?;
        let p2 = exact_event_probability(&EventSpec::passage_time_at_most(&[0, 0], &[1, 1], 2.0), &fair, unit)?;
        Ok((p1.equals_ratio(1, 2) && p2.equals_ratio(7, 16), format!("{} and {}", p1.value, p2.value)))
    }));

    out.push(check("oracle-crude-bound", || {
        let unit = LatticeBox::new(2, 1)?;
        if !enumerable(dist, unit) {
            return Ok((true, "skipped: law is not enumerable".into()));
        }
        let atoms = dist.atoms().unwrap();
        let mut last = 0.0;
        let mut ok = true;
        for (v, _) in &atoms {
            let t = 2.0 * v;
            let p = exact_event_probability(&EventSpec::passage_time_at_most(&[0, 0], &[1, 1], t), dist, unit)?;
            let b = crude_lower_bound(dist, &[0, 0], &[1, 1], *v)?;
            ok &= p.value >= last && b.value <= p.value * (1.0 + 1e-12);
            last = p.value;
        }
        Ok((ok, format!("{} thresholds, exact values nondecreasing and above the crude bound", atoms.len())))
    }));

    out.push(check("fkg-slack", || {
        let two = LatticeBox::new(2, 2)?;
        if !enumerable(dist, two) {
            return Ok((true, "skipped: law is not enumerable on the side-2 box".into()));
        }
        let ts = [dist.support_infimum(), dist.mean(), dist.support_supremum()];
        let reps = fkg_grid(dist, two, &[1, 0], &[1, 0], &ts, &ts, DEFAULT_CAP)?;
        let bad = reps.iter().filter(|r| !r.holds()).count();
        Ok((bad == 0, format!("{} threshold pairs, {bad} negative slacks", reps.len())))
    }));

    out.push(check("disjoint-paths", || {
        let b = LatticeBox::new(2, c.side.max(2))?;
        let v = b.vertex_count();
        let mut count = 0;
        for i in 0..v {
            for j in 0..v {
                if i == j {
                    continue;
                }
                let (x, y) = (b.coords(i), b.coords(j));
                let paths = disjoint_paths(&x, &y, &b)?;
                if let Err(e) = validate_disjoint_paths(&x, &y, &b, &paths) {
                    return Ok((false, format!("{x:?} -> {y:?}: {e}")));
                }
                count += 1;
            }
        }
        Ok((true, format!("{count} ordered pairs")))
    }));

    out.push(check("truncation", || {
        let w = sample_weights(dist, lat, c.seed)?;
        let b = dist.mean().min(dist.support_supremum());
        let target = lat.vertex_count() - 1;
        let tree = shortest_path_tree(&w, None, &[(0, 0.0)], QueueKind::Auto)?;
        let path = tree.geodesic(&w, target).expect("box is connected");
        let ex = truncation_excess(&w, b, &path)?;
        let gap = uniform_gap(&w, b, &GapOptions { seed: c.seed, ..GapOptions::default() })?;
        Ok((
            ex.holds() && gap.gap <= gap.bound * (1.0 + 1e-12),
            format!("excess {} <= {}, gap {} <= {}", ex.excess, ex.animal_bound, gap.gap, gap.bound),
        ))
    }));

    out.push(check("rate-determinism", || {
        let law = if dist.support_infimum() < dist.mean() { dist.clone() } else { EdgeDistribution::fair_two_point(1.0, 2.0)? };
        let zeta = 0.5 * (law.support_infimum() + law.mean());
        let seed = derive_seed(c.seed, 7);
        let a = estimate_rate_point(&law, &[1, 0], zeta, 2, 200, seed)?;
        let b = estimate_rate_point(&law, &[1, 0], zeta, 2, 200, seed)?;
        Ok((a == b, format!("rate {} at zeta {zeta}", a.estimate)))
    }));

    out.push(check("surface-laws", || {
        let xs: [&[i64]; 5] = [&[1, 0], &[0, 1], &[1, 1], &[2, 0], &[1, 2]];
        let mut raw = Vec::new();
        for (k, x) in xs.iter().enumerate() {
            let norm: i64 = x.iter().map(|c| c.abs()).sum();
            for (m, zeta) in [1.2, 1.5, 1.8].iter().enumerate() {
                let v = ((k * 7 + m * 3) % 5) as f64 * 0.3;
                raw.push(RatePoint {
                    x: x.to_vec(),
                    zeta: zeta * norm as f64,
                    n: 4,
                    estimate: v,
                    ci: Interval { lower: 0.0, upper: 100.0 },
                    method: RateMethod::MonteCarlo,
                    censored: false,
                    hits: None,
                    samples: None,
                });
            }
        }
        let s = extend_surface(&raw)?;
        let inv = s.check_invariants();
        let below = raw.iter().all(|p| s.value(&p.x, p.zeta).is_none_or(|v| v <= p.estimate + 1e-12));
        Ok((inv.all() && below, format!("{inv:?}, {} modifications", s.modifications.len())))
    }));

    out.push(check("functional-diagonal", || {
        let d = diagonal_highway(0.5)?;
        let net = build_highway_network(&d, &NetworkOptions::seeded_by(&d))?;
        let j = AnalyticRate::positive_part(l1_unit());
        let r = functional_report(&d, &net, &j, None, 2)?;
        let close = [r.geodesic_sum, r.intrinsic, r.sup_lower_bound].iter().all(|v| (v - 1.0).abs() <= 1e-12);
        Ok((close && r.consistent, format!("{} / {} / {}", r.geodesic_sum, r.intrinsic, r.sup_lower_bound)))
    }));

    out.push(check("functional-random-suite", || {
        let mut worst = 0.0f64;
        for k in 0..4 {
            let d = random_segment_highways(derive_seed(c.seed, 100 + k), 2)?;
            let j = AnalyticRate::positive_part(d.g().clone());
            let net = build_highway_network(&d, &NetworkOptions::seeded_by(&d))?;
            let r = functional_report(&d, &net, &j, None, 2)?;
            if !r.consistent {
                return Ok((false, format!("configuration {k}: deltas {:?}", r.deltas)));
            }
            worst = worst.max(r.deltas.geodesic_minus_intrinsic.abs());
        }
        Ok((true, format!("4 configurations, worst |geodesic - intrinsic| {worst:e}")))
    }));

    out.push(check("functional-monotonicity", || {
        let j = AnalyticRate::positive_part(l1_unit());
        let p = strict_monotonicity_probe(&diagonal_highway(0.5)?, &diagonal_highway(0.75)?, &j, 32)?;
        Ok((p.strict, format!("{} > {}", p.value_smaller_metric, p.value_larger_metric)))
    }));

    out.push(check("ld-event-oracle", || {
        let d = NormPlusHighways::norm(WeightedL1::scaled_l1(2, 0.9)?);
        let fair = EdgeDistribution::fair_two_point(1.0, 2.0)?;
        let opts = LdTrendOptions { epsilon: 0.2, ns: vec![1], ..LdTrendOptions::default() };
        let t = empirical_ld_trend(&d, &fair, &opts, None)?;
        let exact = t.rows[0].exact.as_ref().is_some_and(|p| p.equals_ratio(1, 16));
        Ok((exact, format!("p = {}", t.rows[0].p)))
    }));

    out
}

pub fn run(c: &SelftestConfig) -> CliResult<Outcome> {
    let results = checks(c);
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|k| vec![k.name.to_string(), k.pass.to_string(), c.seed.to_string(), k.detail.clone()])
        .collect();
    let mut a = Artifacts::default();
    a.csv("selftest.csv", &["check", "pass", "seed", "detail"], &rows)?;
    let mut summary = String::new();
    for k in &results {
        summary.push_str(&format!("{} {}: {}\n", if k.pass { "PASS" } else { "FAIL" }, k.name, k.detail));
    }
    let failures = results.iter().filter(|k| !k.pass).map(|k| format!("{}: {}", k.name, k.detail)).collect();
    Ok(Outcome { artifacts: a, summary, failures })
}
