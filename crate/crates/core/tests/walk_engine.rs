use gradwalk::montecarlo::path_rng;
use gradwalk::{
    estimate_value, lattice_grid, run_walk, sup_error, Point, RegimeConfig, Sampling, StepMeasure, TestFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn radial_estimate_matches_larger_run() {
    let f = TestFunction::<f64>::from_id("radial", 2, 3.0).unwrap();
    let cfg = RegimeConfig::eta_cut(0.01, 0.05, 3.0, 2).unwrap();
    let x0 = Point::zeros(2);
    let small = estimate_value(&f, &cfg, &x0, &Sampling::new(1_000, 1)).unwrap();
    let large = estimate_value(&f, &cfg, &x0, &Sampling::new(10_000, 2)).unwrap();
    let band = 4.0 * (small.stderr.powi(2) + large.stderr.powi(2)).sqrt();
    assert!((small.mean - large.mean).abs() <= band, "{small:?} vs {large:?}");
}

#[test]
fn affine_estimates_are_unbiased_across_seeds() {
    let f = TestFunction::<f64>::from_id("linear", 2, 3.0).unwrap();
    let cfg = RegimeConfig::eta_cut(0.1, 0.1, 3.0, 2).unwrap();
    let x0 = Point::from([0.2, 0.1]);
    let misses = (0..100)
        .filter(|&seed| {
            let r = estimate_value(&f, &cfg, &x0, &Sampling::new(400, seed)).unwrap();
            (r.mean - 0.2).abs() > 3.0 * r.stderr
        })
        .count();
    assert!(misses <= 1, "{misses} of 100 trials outside 3 stderr");
}

#[test]
fn linear_sup_error_within_noise() {
    let f = TestFunction::<f64>::from_id("linear", 2, 3.0).unwrap();
    let cfg = RegimeConfig::rate_cut(0.2, 0.1, 3.0, 2).unwrap();
    let s = sup_error(&f, &cfg, &lattice_grid(2), &Sampling::new(2_000, 3)).unwrap();
    assert_eq!(s.points.len(), 9);
    assert!(s.sup_error <= 3.0 * s.max_stderr, "{} vs {}", s.sup_error, s.max_stderr);
}

#[test]
fn singleton_grid_is_pointwise_error() {
    let f = TestFunction::<f64>::from_id("radial", 2, 3.0).unwrap();
    let cfg = RegimeConfig::eta_cut(0.1, 0.1, 3.0, 2).unwrap();
    let x = Point::from([0.1, -0.2]);
    let sampling = Sampling::new(500, 4);
    let s = sup_error(&f, &cfg, std::slice::from_ref(&x), &sampling).unwrap();
    let direct = s.points[0].estimate.mean;
    assert_eq!(s.sup_error, (direct - f.eval(&x).unwrap()).abs());
    assert_eq!(s.max_stderr, s.points[0].estimate.stderr);
}

#[test]
fn worker_count_does_not_change_the_estimate() {
    let f = TestFunction::<f64>::from_id("radial", 2, 3.0).unwrap();
    let cfg = RegimeConfig::eta_cut(0.1, 0.1, 3.0, 2).unwrap();
    let x0 = Point::from([0.3, 0.0]);
    let base = Sampling::new(1_000, 5);
    let one = estimate_value(&f, &cfg, &x0, &base.with_workers(1)).unwrap();
    let three = estimate_value(&f, &cfg, &x0, &base.with_workers(3)).unwrap();
    assert_eq!(one, three);
}

#[test]
fn replayed_walks_are_identical() {
    let f = TestFunction::<f64>::saddle();
    let cfg = RegimeConfig::zero_set_uniform(0.1, 2.0, 2).unwrap();
    let x0 = Point::from([0.0, 0.0]);
    let a = run_walk(&f, &cfg, &x0, &mut path_rng(9, 3)).unwrap();
    let b = run_walk(&f, &cfg, &x0, &mut path_rng(9, 3)).unwrap();
    assert_eq!(a, b);
    let c = run_walk(&f, &cfg, &x0, &mut path_rng(9, 4)).unwrap();
    assert_ne!(a.trajectory_hash, c.trajectory_hash);
}

#[test]
fn gradient_steps_push_away_from_fixed_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (eps, beta) = (0.2, 0.8);
    for z in [
        Point::from([0.0, 0.0]),
        Point::from([0.5, -0.3]),
        Point::from([-0.9, 0.2]),
    ] {
        let mut total = 0.0;
        for _ in 0..100_000 {
            let x = z.offset(&gradwalk::measures::sample_unit_ball(2, &mut rng), 0.3);
            let angle = rng.random::<f64>() * std::f64::consts::TAU;
            let q = Point::from([angle.cos(), angle.sin()]);
            let mu = StepMeasure::gradient_mix(x.clone(), q, eps, beta).unwrap();
            total += mu.sample(&mut rng).distance(&z) - x.distance(&z);
        }
        assert!(total >= 0.0, "mean drift {} at {z}", total / 1e5);
    }
}
