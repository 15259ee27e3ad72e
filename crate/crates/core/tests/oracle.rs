use fpp_core::elementary_rate::exact_rate_point_default;
use fpp_core::model::{EdgeDistribution, LatticeBox};
use fpp_core::oracle::{
    chernoff_upper_tail, crude_lower_bound, exact_event_probability, fekete_strip_check, fkg_supermultiplicativity_check,
    is_one, EventSpec,
};

fn fair() -> EdgeDistribution {
    EdgeDistribution::fair_two_point(1.0, 2.0).unwrap()
}

#[test]
fn crude_bound_meets_the_oracle_on_the_unit_edge() {
    let lat = LatticeBox::new(2, 1).unwrap();
    let exact = exact_event_probability(&EventSpec::passage_time_at_most(&[0, 0], &[1, 0], 1.0), &fair(), lat).unwrap();
    let crude = crude_lower_bound(&fair(), &[0, 0], &[1, 0], 1.0).unwrap();
    assert_eq!(exact.exact, crude.exact);
    assert!(is_one(&crude_lower_bound(&fair(), &[0, 0], &[0, 0], 1.0).unwrap()));
}

#[test]
fn sure_events_have_probability_one() {
    let lat = LatticeBox::new(2, 2).unwrap();
    let t = 2.0 * 2.0 * 2.0 * 2.0;
    let p = exact_event_probability(&EventSpec::passage_time_at_most(&[0, 0], &[2, 2], t), &fair(), lat).unwrap();
    assert!(p.equals_ratio(1, 1));
}

#[test]
fn fekete_ladder_is_consistent_with_fkg() {
    let f = fekete_strip_check(&fair(), 1.25, 4, 1 << 24).unwrap();
    assert!(f.holds);
    let rate = |n: usize| -f.probabilities[n - 1].1.value.ln() / n as f64;
    // P_2n >= P_n^2, so the rate cannot increase along doublings
    assert!(rate(2) <= rate(1) + 1e-15);
    assert!(rate(4) <= rate(2) + 1e-15);
    let r = fkg_supermultiplicativity_check(&fair(), LatticeBox::new(2, 2).unwrap(), &[1, 0], &[1, 0], 1.25, 1.25, 1 << 24)
        .unwrap();
    assert!(r.holds());
    let one = exact_rate_point_default(&fair(), &[1, 0], 1.0, 1).unwrap();
    assert!((one.estimate - std::f64::consts::LN_2).abs() < 1e-15);
}

#[test]
fn chernoff_bound_tends_to_one() {
    let b = chernoff_upper_tail(&fair(), 1e-9, 2.0, 4, 4).unwrap();
    assert!((b - 1.0).abs() < 1e-6);
    let mgf = (1f64.exp() + 2f64.exp()) / 2.0;
    let want = (-1.0 * 2.0 * 4.0 + 4.0 * mgf.ln()).exp();
    assert!((chernoff_upper_tail(&fair(), 1.0, 2.0, 4, 4).unwrap() - want).abs() < 1e-12);
}
