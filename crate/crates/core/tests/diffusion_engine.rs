use gradwalk::{estimate_value_ct, DiffusionConfig, Point, TestFunction};

#[test]
fn brownian_exit_time_from_center() {
    let f = TestFunction::<f64>::from_id("linear", 2, 2.0).unwrap();
    let h = 1e-4;
    let cfg = DiffusionConfig::new(2.0, h, 1).unwrap();
    let r = estimate_value_ct(&f, &cfg, &Point::zeros(2), 10_000, None).unwrap();
    let steps_expected = 0.5 / h;
    assert!(
        (r.mean_steps - steps_expected).abs() <= 0.1 * steps_expected,
        "{}",
        r.mean_steps
    );
}

#[test]
fn linear_value_any_exponent() {
    let f = TestFunction::<f64>::from_id("linear", 2, 4.0).unwrap();
    let h = 1e-4;
    let cfg = DiffusionConfig::new(4.0, h, 2).unwrap();
    let x0 = Point::from([0.2, -0.3]);
    let r = estimate_value_ct(&f, &cfg, &x0, 2_000, None).unwrap();
    assert!((r.mean - 0.2).abs() <= 3.0 * r.stderr + 2.0 * h.sqrt(), "{r:?}");
}

#[test]
fn radial_bias_does_not_grow_under_refinement() {
    let f = TestFunction::<f64>::from_id("radial", 2, 3.0).unwrap();
    let x0 = Point::zeros(2);
    let exact = f.eval(&x0).unwrap();
    let coarse = DiffusionConfig::new(3.0, 1e-3, 3).unwrap();
    let fine = DiffusionConfig::new(3.0, 2.5e-4, 4).unwrap();
    let rc = estimate_value_ct(&f, &coarse, &x0, 4_000, None).unwrap();
    let rf = estimate_value_ct(&f, &fine, &x0, 4_000, None).unwrap();
    let band = 2.0 * (rc.stderr.powi(2) + rf.stderr.powi(2)).sqrt();
    assert!(
        (rf.mean - exact).abs() < (rc.mean - exact).abs() + band,
        "{rc:?} {rf:?}"
    );
}

#[test]
fn paths_are_reproducible_and_scheduling_free() {
    let f = TestFunction::<f64>::saddle();
    let cfg = DiffusionConfig::new(2.0, 1e-3, 5).unwrap();
    let x0 = Point::from([0.0, 0.0]);
    let a = estimate_value_ct(&f, &cfg, &x0, 300, Some(1)).unwrap();
    let b = estimate_value_ct(&f, &cfg, &x0, 300, Some(2)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn rejects_exponent_mismatch_and_large_steps() {
    let f = TestFunction::<f64>::saddle();
    let cfg = DiffusionConfig::new(3.0, 1e-3, 0).unwrap();
    assert!(estimate_value_ct(&f, &cfg, &Point::zeros(2), 100, None).is_err());
    assert!(DiffusionConfig::new(2.0, 0.05, 0).is_err());
    assert!(DiffusionConfig::new(1.0, 1e-3, 0).is_err());
}
