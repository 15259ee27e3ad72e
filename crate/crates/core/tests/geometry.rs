use fpp_core::fixtures::{diagonal_highway, random_segment_highways};
use fpp_core::geometry::{
    build_highway_network, check_disjoint, d_length, gradient_by_paths, hausdorff_integrate, hw_insert,
    metric_derivative, GradientKind, Highway, LengthOptions, LipschitzPath, NetworkOptions, NormPlusHighways,
    WeightedL1,
};

#[test]
fn length_of_the_highway_is_its_discounted_cost() {
    let d = diagonal_highway(0.5).unwrap();
    let path = d.highways()[0].path.clone();
    let est = d_length(&d, &path, LengthOptions::default()).unwrap();
    assert!((est.length - 1.0).abs() < 1e-9);
    let g = NormPlusHighways::norm(WeightedL1::scaled_l1(2, 1.0).unwrap());
    assert!((d_length(&g, &path, LengthOptions::default()).unwrap().length - 2.0).abs() < 1e-12);
}

#[test]
fn derivative_and_gradient_agree_on_the_highway() {
    let d = diagonal_highway(0.5).unwrap();
    let path = LipschitzPath::segment(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let md = metric_derivative(&d, &path, 0.7).unwrap();
    // unit l1 speed parametrization: velocity (1/2, 1/2)
    let gr = gradient_by_paths(&d, &path.at(0.7), &[0.5, 0.5]).unwrap();
    assert!(matches!(gr.kind, GradientKind::AlongHighway { .. }));
    assert!((md.value - gr.value).abs() < 1e-6);
    let back = gradient_by_paths(&d, &path.at(0.7), &[-0.5, -0.5]).unwrap();
    assert_eq!(back.value, gr.value);
}

#[test]
fn hausdorff_integral_of_one_is_length() {
    let a = LipschitzPath::segment(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
    let b = LipschitzPath::segment(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
    assert!((hausdorff_integrate(&[a.clone(), b], |_, _| 1.0, 2).unwrap() - 2.0).abs() < 1e-14);
    // the area formula in the t-parametrization
    let c = LipschitzPath::new(vec![vec![0.0, 0.0], vec![0.6, 0.2], vec![0.7, 0.9]]).unwrap();
    let phi = |z: &[f64], _: &[f64]| z[0] * z[0] + z[1];
    let h = hausdorff_integrate(std::slice::from_ref(&c), phi, 4).unwrap();
    let mut t_int = 0.0;
    for w in c.points.windows(2) {
        let len = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
        let steps = 20000;
        for k in 0..steps {
            let s = (k as f64 + 0.5) / steps as f64;
            let z = [w[0][0] + s * (w[1][0] - w[0][0]), w[0][1] + s * (w[1][1] - w[0][1])];
            t_int += phi(&z, &[]) * len / steps as f64;
        }
    }
    assert!((h - t_int).abs() < 1e-8 * h);
}

#[test]
fn redundant_insertion_changes_nothing() {
    let d = diagonal_highway(0.5).unwrap();
    let h = d.highways()[0].clone();
    let twice = hw_insert(&d, &h, &d).unwrap();
    for i in 0..20 {
        let x = [i as f64 / 20.0, 0.3];
        let y = [0.9, 1.0 - i as f64 / 40.0];
        assert_eq!(twice.eval(&x, &y), d.eval(&x, &y));
    }
}

#[test]
fn networks_of_random_metrics_are_disjoint_and_converge() {
    for seed in 0..5 {
        let d = random_segment_highways(seed, 2).unwrap();
        let net = build_highway_network(&d, &NetworkOptions::seeded_by(&d)).unwrap();
        check_disjoint(&net.paths).unwrap();
        assert!(net.converged, "seed {seed}: {:?}", net.diagnostics);
    }
    let h = Highway::straight(&[0.1, 0.1], &[0.9, 0.2], 0.3).unwrap();
    let d = NormPlusHighways::new(WeightedL1::new(vec![1.0, 2.0]).unwrap(), vec![h]).unwrap();
    let json = serde_json::to_string(&d).unwrap();
    let back: NormPlusHighways = serde_json::from_str(&json).unwrap();
    assert_eq!(back, d);
}
