use std::fmt::Write as _;

use serde::Serialize;

use fpp_core::elementary_rate::{
    estimate_rate_point_with_budget, estimate_time_constant_with_budget, exact_rate_point, extend_surface,
    fekete_envelope, zero_set_check, zeta_grid, RatePoint, TimeConstantEstimate, ZeroSetReport,
};
use fpp_core::functional::{
    empirical_ld_trend, functional_report, functional_value, strict_monotonicity_probe, validate_network,
    LdTrendOptions, MonotonicityReport,
};
use fpp_core::geometry::{build_highway_network, sup_distance, NetworkOptions, NormPlusHighways};
use fpp_core::model::{derive_seed, sample_weights, LatticeBox};
use fpp_core::oracle::{
    crude_lower_bound, exact_event_probability_with_cap, fekete_strip_check, fkg_grid, monte_carlo_probability,
    EventSpec, ExactProbability, McEstimate,
};
use fpp_core::passage_time::{geodesic_length_stats, rescaled_metric_on, Region};
use fpp_core::stats::{mean_se, Z95};
use fpp_core::FppError;

use crate::config::{
    Experiment, FunctionalConfig, HighwaysConfig, LdTrendConfig, OracleConfig, RateConfig, SimulateConfig,
};
use crate::error::CliResult;
use crate::output::{coords, num, opt_num, Artifacts};
use crate::selftest;

/// Artifacts of a finished run. `failures` lists invariants that did not
/// hold; the artifacts are still written so the failure can be inspected.
pub struct Outcome {
    pub artifacts: Artifacts,
    pub summary: String,
    pub failures: Vec<String>,
}

pub fn run(exp: &Experiment) -> CliResult<Outcome> {
    match exp {
        Experiment::Simulate(c) => simulate(c),
        Experiment::Oracle(c) => oracle(c),
        Experiment::Rate(c) => rate(c),
        Experiment::Highways(c) => highways(c),
        Experiment::Functional(c) => functional(c),
        Experiment::LdTrend(c) => ld_trend(c),
        Experiment::Selftest(c) => selftest::run(c),
    }
}

fn check_budget(work: u64, budget: u64, what: &str) -> CliResult<()> {
    if work > budget {
        return Err(FppError::BudgetExceeded(format!("{what}: {work} edge visits exceed the budget {budget}")).into());
    }
    Ok(())
}

/// Box corners plus `extra` evenly spaced vertices, sorted and deduplicated.
fn table_points(lat: LatticeBox, extra: usize) -> Vec<usize> {
    let v = lat.vertex_count();
    let mut pts: Vec<usize> = (0..1usize << lat.dim)
        .map(|m| {
            let c: Vec<i64> = (0..lat.dim).map(|i| if (m >> i) & 1 == 1 { lat.side as i64 } else { 0 }).collect();
            lat.index(&c).unwrap()
        })
        .collect();
    pts.extend((0..extra).map(|i| i * v / extra));
    pts.sort_unstable();
    pts.dedup();
    pts
}

fn simulate(c: &SimulateConfig) -> CliResult<Outcome> {
    let lat = c.lattice;
    let pts = table_points(lat, c.points);
    let mut work = c.fields.saturating_mul(pts.len() as u64).saturating_mul(lat.edge_count() as u64);
    if c.truncation.is_some() {
        work = work.saturating_add(
            c.fields.saturating_mul(c.random_pairs as u64 + 2).saturating_mul(lat.edge_count() as u64),
        );
    }
    check_budget(work, c.budget, "simulate")?;

    let npairs = pts.len() * (pts.len() - 1) / 2;
    let mut per_pair: Vec<Vec<f64>> = vec![Vec::new(); npairs];
    let mut metric_rows = Vec::new();
    let mut geo_rows = Vec::new();
    let mut geo_tables = Vec::new();
    for k in 0..c.fields {
        let seed = derive_seed(c.seed, k);
        let w = sample_weights(&c.distribution, lat, seed)?;
        let m = rescaled_metric_on(&w, &pts)?;
        let mut p = 0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let v = m.value(i, j);
                per_pair[p].push(v);
                p += 1;
                metric_rows.push(vec![
                    k.to_string(),
                    seed.to_string(),
                    "dijkstra".into(),
                    coords(&lat.coords(pts[i])),
                    coords(&lat.coords(pts[j])),
                    num(v),
                ]);
            }
        }
        if let Some(b) = c.truncation {
            let t = geodesic_length_stats(&w, b, &c.length_ladder, c.random_pairs, seed)?;
            for &(l, frac) in &t.ladder {
                geo_rows.push(vec![
                    k.to_string(),
                    seed.to_string(),
                    "canonical-min-hop".into(),
                    num(b),
                    num(l),
                    num(frac),
                    t.pairs.len().to_string(),
                    t.max_length.to_string(),
                ]);
            }
            geo_tables.push(t);
        }
    }

    let mut summary_rows = Vec::new();
    let mut p = 0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let xs = &per_pair[p];
            p += 1;
            let (mean, se) = if xs.len() > 1 { mean_se(xs) } else { (xs[0], f64::NAN) };
            let (lo, hi) = if se.is_nan() { (String::new(), String::new()) } else { (num(mean - Z95 * se), num(mean + Z95 * se)) };
            summary_rows.push(vec![
                coords(&lat.coords(pts[i])),
                coords(&lat.coords(pts[j])),
                "monte-carlo-mean".into(),
                c.seed.to_string(),
                c.fields.to_string(),
                num(mean),
                lo,
                hi,
            ]);
        }
    }

    let mut a = Artifacts::default();
    a.csv("metric.csv", &["field", "seed", "method", "source", "target", "t_over_n"], &metric_rows)?;
    a.csv(
        "metric_summary.csv",
        &["source", "target", "method", "seed", "fields", "mean", "ci_lower", "ci_upper"],
        &summary_rows,
    )?;
    if c.truncation.is_some() {
        a.csv(
            "geodesic_lengths.csv",
            &["field", "seed", "method", "truncation", "ladder", "fraction_at_least", "pairs", "max_length"],
            &geo_rows,
        )?;
        a.json("geodesic_lengths.json", &geo_tables)?;
    }
    let summary = format!(
        "simulate: {} field(s) on [0,{}]^{}, {} tabulated vertices, {} pairs each\n",
        c.fields,
        lat.side,
        lat.dim,
        pts.len(),
        npairs
    );
    Ok(Outcome { artifacts: a, summary, failures: Vec::new() })
}

#[derive(Serialize)]
struct EventRecord {
    event: String,
    exact: Option<ExactProbability>,
    monte_carlo: Option<McEstimate>,
    crude_lower_bound: Option<ExactProbability>,
}

fn crude_for(c: &OracleConfig, e: &EventSpec) -> CliResult<Option<ExactProbability>> {
    let EventSpec::PassageTimeAtMost { x, y, t, region: Region::Full } = e else {
        return Ok(None);
    };
    let k: i64 = x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum();
    if k == 0 {
        return Ok(None);
    }
    match crude_lower_bound(&c.distribution, x, y, t / k as f64) {
        Ok(p) => Ok(Some(p)),
        Err(FppError::OutsideDomain(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn oracle(c: &OracleConfig) -> CliResult<Outcome> {
    let lat = c.lattice;
    let cap = c.cap as u128;
    if c.mc_samples > 0 {
        let work = c.mc_samples.saturating_mul(c.events.len() as u64).saturating_mul(lat.edge_count() as u64);
        check_budget(work, c.budget, "oracle Monte Carlo")?;
    }
    let mut failures = Vec::new();
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for (i, e) in c.events.iter().enumerate() {
        let exact = if c.exact { Some(exact_event_probability_with_cap(e, &c.distribution, lat, cap)?) } else { None };
        let seed = derive_seed(c.seed, i as u64);
        let mc = if c.mc_samples > 0 {
            Some(monte_carlo_probability(e, &c.distribution, lat, c.mc_samples, seed)?)
        } else {
            None
        };
        let crude = crude_for(c, e)?;
        if let (Some(p), Some(b)) = (&exact, &crude) {
            let below = match (&p.exact, &b.exact) {
                (Some(p), Some(b)) => b <= p,
                _ => b.value <= p.value * (1.0 + 1e-12),
            };
            if !below {
                failures.push(format!("crude bound {} exceeds the exact value {} for {}", b.value, p.value, e.label()));
            }
        }
        let method = match (&exact, &mc) {
            (Some(_), Some(_)) => "exact-oracle+monte-carlo",
            (Some(_), None) => "exact-oracle",
            (None, Some(_)) => "monte-carlo",
            (None, None) => "none",
        };
        rows.push(vec![
            i.to_string(),
            e.label(),
            method.into(),
            exact.as_ref().map(|p| num(p.value)).unwrap_or_default(),
            exact.as_ref().and_then(|p| p.numer()).map(|v| v.to_string()).unwrap_or_default(),
            exact.as_ref().and_then(|p| p.denom()).map(|v| v.to_string()).unwrap_or_default(),
            exact.as_ref().map(|p| p.configurations.to_string()).unwrap_or_default(),
            opt_num(mc.as_ref().map(|m| m.p)),
            opt_num(mc.as_ref().map(|m| m.ci.lower)),
            opt_num(mc.as_ref().map(|m| m.ci.upper)),
            mc.as_ref().map(|m| m.samples.to_string()).unwrap_or_default(),
            if mc.is_some() { seed.to_string() } else { String::new() },
            opt_num(crude.as_ref().map(|b| b.value)),
        ]);
        records.push(EventRecord { event: e.label(), exact, monte_carlo: mc, crude_lower_bound: crude });
    }

    let mut fkg_rows = Vec::new();
    let mut fkg_reports = Vec::new();
    for f in &c.fkg {
        let reps = fkg_grid(&c.distribution, lat, &f.x1, &f.x2, &f.t1, &f.t2, cap)?;
        for r in &reps {
            if !r.holds() {
                failures.push(format!("negative FKG slack at t1 = {}, t2 = {}", r.t1, r.t2));
            }
            fkg_rows.push(vec![
                coords(&f.x1),
                coords(&f.x2),
                num(r.t1),
                num(r.t2),
                "exact-oracle".into(),
                num(r.lhs.value),
                num(r.first.value),
                num(r.second.value),
                r.slack.to_string(),
                r.holds().to_string(),
            ]);
        }
        fkg_reports.push(reps);
    }

    let fekete = match &c.fekete {
        Some(f) => {
            let r = fekete_strip_check(&c.distribution, f.zeta, f.n_max, cap)?;
            if !r.holds {
                failures.push(format!("strip probabilities are not supermultiplicative at zeta = {}", f.zeta));
            }
            Some(r)
        }
        None => None,
    };

    let mut a = Artifacts::default();
    a.csv(
        "oracle.csv",
        &[
            "index",
            "event",
            "method",
            "p_exact",
            "numerator",
            "denominator",
            "configurations",
            "p_mc",
            "ci_lower",
            "ci_upper",
            "samples",
            "seed",
            "crude_lower_bound",
        ],
        &rows,
    )?;
    if !c.fkg.is_empty() {
        a.csv(
            "fkg.csv",
            &["x1", "x2", "t1", "t2", "method", "lhs", "first", "second", "slack", "holds"],
            &fkg_rows,
        )?;
    }
    if let Some(r) = &fekete {
        let rows: Vec<Vec<String>> = r
            .slacks
            .iter()
            .map(|(n, m, s)| vec![num(r.zeta), n.to_string(), m.to_string(), "exact-oracle".into(), num(*s)])
            .collect();
        a.csv("fekete.csv", &["zeta", "n", "m", "method", "slack"], &rows)?;
    }
    a.json(
        "oracle.json",
        &serde_json::json!({ "events": records, "fkg": fkg_reports, "fekete": fekete }),
    )?;
    let mut summary = String::new();
    for r in &records {
        let _ = writeln!(
            summary,
            "{:<40} exact {:<24} mc {}",
            r.event,
            r.exact.as_ref().map(|p| p.exact.as_ref().map(|q| q.to_string()).unwrap_or(num(p.value))).unwrap_or("-".into()),
            r.monte_carlo.as_ref().map(|m| format!("{} [{}, {}]", m.p, m.ci.lower, m.ci.upper)).unwrap_or("-".into()),
        );
    }
    Ok(Outcome { artifacts: a, summary, failures })
}

fn rate_row(p: &RatePoint, seed: Option<u64>, role: &str) -> Vec<String> {
    vec![
        coords(&p.x),
        num(p.zeta),
        p.n.to_string(),
        role.into(),
        serde_json::to_value(p.method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        num(p.estimate),
        num(p.ci.lower),
        num(p.ci.upper),
        p.censored.to_string(),
        p.hits.map(|h| h.to_string()).unwrap_or_default(),
        p.samples.map(|h| h.to_string()).unwrap_or_default(),
        seed.map(|s| s.to_string()).unwrap_or_default(),
    ]
}

#[derive(Serialize)]
struct RateRecord<'a> {
    raw: &'a [RatePoint],
    invariants: fpp_core::elementary_rate::InvariantReport,
    surface: &'a fpp_core::elementary_rate::RateSurface,
    time_constants: &'a [TimeConstantEstimate],
    zero_sets: &'a [ZeroSetReport],
}

fn rate(c: &RateConfig) -> CliResult<Outcome> {
    let dist = &c.distribution;
    let cap = c.cap as u128;
    let mut rows = Vec::new();
    let mut raw = Vec::new();
    for (i, x) in c.directions.iter().enumerate() {
        let grid = zeta_grid(dist, x, c.zeta_points, c.delta)?;
        for (j, &zeta) in grid.iter().enumerate() {
            let mut rungs: Vec<(RatePoint, Option<u64>)> = Vec::new();
            for &n in &c.exact_ns {
                rungs.push((exact_rate_point(dist, x, zeta, n, cap)?, None));
            }
            for (r, &n) in c.ns.iter().enumerate() {
                if c.exact_ns.contains(&n) {
                    continue;
                }
                let seed = derive_seed(c.seed, ((i * c.zeta_points + j) * 64 + r) as u64);
                let p = estimate_rate_point_with_budget(dist, x, zeta, n, c.samples, seed, c.budget)?;
                rungs.push((p, Some(seed)));
            }
            rungs.sort_by_key(|(p, _)| p.n);
            for (p, s) in &rungs {
                rows.push(rate_row(p, *s, "rung"));
            }
            let pts: Vec<RatePoint> = rungs.into_iter().map(|(p, _)| p).collect();
            let env = fekete_envelope(&pts)?;
            rows.push(rate_row(&env, None, "envelope"));
            raw.push(env);
        }
    }
    let surface = extend_surface(&raw)?;
    let inv = surface.check_invariants();
    let mut failures = Vec::new();
    if !inv.all() {
        failures.push(format!("extended surface breaks a law: {inv:?}"));
    }

    let mut tcs = Vec::new();
    let mut zs = Vec::new();
    let mut zrows = Vec::new();
    let mut trows = Vec::new();
    if let Some(t) = &c.time_constant {
        for (i, x) in c.directions.iter().enumerate() {
            let seed = derive_seed(c.seed, (1u64 << 40) + i as u64);
            let tc = estimate_time_constant_with_budget(dist, x, &t.ns, t.samples, seed, c.budget)?;
            for r in &tc.rungs {
                trows.push(vec![
                    coords(x),
                    r.n.to_string(),
                    "monte-carlo-mean".into(),
                    seed.to_string(),
                    t.samples.to_string(),
                    num(r.mean),
                    num(r.se),
                    num(r.ci.lower),
                    num(r.ci.upper),
                ]);
            }
            let z = zero_set_check(&surface, &tc, Some(dist), t.zero_tol, t.margin)?;
            for cell in &z.cells {
                zrows.push(vec![
                    coords(x),
                    num(cell.zeta),
                    opt_num(cell.value),
                    num(cell.ci_lower),
                    num(z.mu_hat),
                    cell.expected_zero.map(|b| b.to_string()).unwrap_or_default(),
                    cell.ok.to_string(),
                    opt_num(cell.crude_bound),
                    cell.below_crude.to_string(),
                    seed.to_string(),
                ]);
            }
            tcs.push(tc);
            zs.push(z);
        }
    }

    let mut a = Artifacts::default();
    a.csv(
        "rate_points.csv",
        &["x", "zeta", "n", "role", "method", "estimate", "ci_lower", "ci_upper", "censored", "hits", "samples", "seed"],
        &rows,
    )?;
    let mut buf = Vec::new();
    surface.write_csv(&mut buf)?;
    a.raw("surface.csv", buf);
    if c.time_constant.is_some() {
        a.csv(
            "time_constant.csv",
            &["x", "n", "method", "seed", "samples", "mean", "se", "ci_lower", "ci_upper"],
            &trows,
        )?;
        a.csv(
            "zero_set.csv",
            &["x", "zeta", "value", "ci_lower", "mu_hat", "expected_zero", "ok", "crude_bound", "below_crude", "seed"],
            &zrows,
        )?;
    }
    a.json(
        "rate.json",
        &RateRecord { raw: &raw, invariants: inv.clone(), surface: &surface, time_constants: &tcs, zero_sets: &zs },
    )?;
    let mut summary = format!(
        "rate: {} raw points on {} ray(s); laws after extension: homogeneous {} symmetric {} nonincreasing {} convex {}\n",
        raw.len(),
        surface.rays.len(),
        inv.homogeneous,
        inv.symmetric,
        inv.nonincreasing,
        inv.convex
    );
    for z in &zs {
        let _ = writeln!(summary, "zero set on {:?}: mu_hat {} passes {}", z.x, z.mu_hat, z.passes);
    }
    Ok(Outcome { artifacts: a, summary, failures })
}

fn network_options(d: &NormPlusHighways, given: &Option<NetworkOptions>) -> NetworkOptions {
    given.clone().unwrap_or_else(|| NetworkOptions::seeded_by(d))
}

fn highways(c: &HighwaysConfig) -> CliResult<Outcome> {
    let opts = network_options(&c.metric, &c.network);
    let net = build_highway_network(&c.metric, &opts)?;
    let mut failures = Vec::new();
    if let Err(e) = validate_network(&c.metric, &net) {
        failures.push(format!("network fails validation: {e}"));
    }
    let sup = sup_distance(&net.chain_metric(), &c.metric, c.sup_pairs);
    let rows: Vec<Vec<String>> = net
        .diagnostics
        .iter()
        .enumerate()
        .map(|(k, g)| vec![k.to_string(), "halton-and-corner-pairs".into(), opts.diagnostic_pairs.to_string(), num(*g)])
        .collect();
    let mut a = Artifacts::default();
    a.csv("diagnostics.csv", &["k", "method", "pairs", "sup_gap"], &rows)?;
    a.json(
        "network.json",
        &serde_json::json!({ "network": net, "options": opts, "sup_distance": sup, "sup_pairs": c.sup_pairs }),
    )?;
    let summary = format!(
        "highways: {} disjoint pieces, converged {}, last diagnostic {}, sup distance {} over {} pairs\n",
        net.paths.len(),
        net.converged,
        net.diagnostics.last().copied().unwrap_or(0.0),
        sup,
        c.sup_pairs
    );
    Ok(Outcome { artifacts: a, summary, failures })
}

fn functional(c: &FunctionalConfig) -> CliResult<Outcome> {
    let opts = network_options(&c.metric, &c.network);
    let net = build_highway_network(&c.metric, &opts)?;
    let report = functional_report(&c.metric, &net, &c.rate, c.family.clone(), c.quadrature_order)?;
    let probe: Option<MonotonicityReport> = match &c.probe {
        Some(p) => Some(strict_monotonicity_probe(&c.metric, &p.larger, &c.rate, p.pairs)?),
        None => None,
    };
    let mut failures = Vec::new();
    if !report.consistent {
        failures.push(format!(
            "expressions disagree: geodesic - intrinsic = {}, geodesic - sup = {}",
            report.deltas.geodesic_minus_intrinsic, report.deltas.geodesic_minus_sup
        ));
    }
    if let Some(p) = &probe {
        if !p.strict {
            failures.push(format!(
                "functional not strictly larger on the smaller metric: {} vs {}",
                p.value_smaller_metric, p.value_larger_metric
            ));
        }
    }

    let mut rows = vec![
        vec!["geodesic_sum".to_string(), "network-geodesic-sum".into(), num(report.geodesic_sum)],
        vec!["intrinsic".into(), format!("gauss-legendre-{}", c.quadrature_order), num(report.intrinsic)],
        vec!["sup_lower_bound".into(), "certified-family".into(), num(report.sup_lower_bound)],
        vec!["geodesic_minus_intrinsic".into(), "difference".into(), num(report.deltas.geodesic_minus_intrinsic)],
        vec!["geodesic_minus_sup".into(), "difference".into(), num(report.deltas.geodesic_minus_sup)],
    ];
    if let Some(p) = &probe {
        rows.push(vec!["probe_smaller_metric".into(), "network-geodesic-sum".into(), num(p.value_smaller_metric)]);
        rows.push(vec!["probe_larger_metric".into(), "network-geodesic-sum".into(), num(p.value_larger_metric)]);
        rows.push(vec!["probe_witness_gap".into(), "sampled-pairs".into(), num(p.witness_gap)]);
    }
    let mut a = Artifacts::default();
    a.csv("functional.csv", &["quantity", "method", "value"], &rows)?;
    a.json("functional.json", &serde_json::json!({ "report": report, "probe": probe }))?;

    let mut t = String::new();
    let _ = writeln!(t, "{:<26} {:>22}", "expression", "value");
    let _ = writeln!(t, "{:<26} {:>22}", "geodesic sum", num(report.geodesic_sum));
    let _ = writeln!(t, "{:<26} {:>22}", "intrinsic", num(report.intrinsic));
    let _ = writeln!(t, "{:<26} {:>22}", "sup (certified family)", num(report.sup_lower_bound));
    let _ = writeln!(t, "{:<26} {:>22}", "geodesic - intrinsic", num(report.deltas.geodesic_minus_intrinsic));
    let _ = writeln!(t, "{:<26} {:>22}", "geodesic - sup", num(report.deltas.geodesic_minus_sup));
    let _ = writeln!(t, "{:<26} {:>22}", "consistent", report.consistent);
    if let Some(p) = &probe {
        let _ = writeln!(t, "{:<26} {:>22}", "probe: smaller metric", num(p.value_smaller_metric));
        let _ = writeln!(t, "{:<26} {:>22}", "probe: larger metric", num(p.value_larger_metric));
        let _ = writeln!(t, "{:<26} {:>22}", "probe: strict", p.strict);
    }
    Ok(Outcome { artifacts: a, summary: t, failures })
}

fn ld_trend(c: &LdTrendConfig) -> CliResult<Outcome> {
    let opts = LdTrendOptions {
        epsilon: c.epsilon,
        ns: c.ns.clone(),
        samples: c.samples,
        seed: c.seed,
        cap: c.cap as u128,
        budget: c.budget,
    };
    let value = c.rate.as_ref().map(|j| functional_value(&c.metric, j)).transpose()?;
    let trend = empirical_ld_trend(&c.metric, &c.distribution, &opts, value)?;
    let rows: Vec<Vec<String>> = trend
        .rows
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let mc = row.exact.is_none();
            vec![
                row.n.to_string(),
                serde_json::to_value(row.method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                num(c.epsilon),
                num(row.p),
                row.exact.as_ref().and_then(|p| p.exact.as_ref()).map(|q| q.to_string()).unwrap_or_default(),
                num(row.p_ci.lower),
                num(row.p_ci.upper),
                num(row.rate),
                num(row.rate_ci.lower),
                num(row.rate_ci.upper),
                row.censored.to_string(),
                if mc { c.samples.to_string() } else { String::new() },
                if mc { derive_seed(c.seed, r as u64).to_string() } else { String::new() },
                opt_num(value),
            ]
        })
        .collect();
    let mut a = Artifacts::default();
    a.csv(
        "ld_trend.csv",
        &[
            "n",
            "method",
            "epsilon",
            "p",
            "p_exact",
            "p_ci_lower",
            "p_ci_upper",
            "rate",
            "rate_ci_lower",
            "rate_ci_upper",
            "censored",
            "samples",
            "seed",
            "functional",
        ],
        &rows,
    )?;
    a.json("ld_trend.json", &trend)?;
    let mut summary = String::new();
    for row in &trend.rows {
        let _ = writeln!(summary, "n = {:<4} p = {:<22} rate = {}", row.n, num(row.p), num(row.rate));
    }
    if let Some(v) = value {
        let _ = writeln!(summary, "functional = {}", num(v));
    }
    Ok(Outcome { artifacts: a, summary, failures: Vec::new() })
}
