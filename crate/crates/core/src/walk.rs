//! The discrete gradient walk and Monte Carlo estimates of its value
//! `u_eps(x) = E^x[u(x_tau)]`.

use rand::Rng;

use crate::catalog::TestFunction;
use crate::error::{Error, Result};
use crate::measures::RegimeConfig;
use crate::montecarlo::{self, EstimateResult, Sampling};
use crate::point::Point;
use crate::scalar::Real;

/// Iterates within this distance of the unit sphere count as having left
/// the open unit ball. Absorbs the rounding of repeated `x + eps d` updates
/// (e.g. `0.5 + 5 * 0.1` evaluates to `0.9999999999999999`).
pub const EXIT_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn has_exited<T: Real>(x: &Point<T>) -> bool {
    x.norm() >= T::one() - T::lit(EXIT_TOL)
}

/// Exit point and length of one path.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkResult<T> {
    pub exit_point: Point<T>,
    pub steps: u64,
    /// FNV-1a hash over the bit patterns of every iterate, for replay checks.
    pub trajectory_hash: u64,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[inline]
pub(crate) fn hash_point<T: Real>(mut h: u64, x: &Point<T>) -> u64 {
    for c in x.coords() {
        for b in c.as_f64().to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

pub(crate) fn check_start<T: Real>(func: &TestFunction<T>, x0: &Point<T>) -> Result<()> {
    func.check_domain(x0)?;
    if has_exited(x0) {
        return Err(Error::Domain {
            point: x0.to_string(),
            radius: 1.0,
        });
    }
    Ok(())
}

/// Runs one walk from `x0` until the first iterate outside the open unit ball.
pub fn run_walk<T: Real, R: Rng + ?Sized>(
    func: &TestFunction<T>,
    cfg: &RegimeConfig<T>,
    x0: &Point<T>,
    rng: &mut R,
) -> Result<WalkResult<T>> {
    check_start(func, x0)?;
    let mut x = x0.clone();
    let mut steps = 0u64;
    let mut hash = hash_point(FNV_OFFSET, &x);
    while !has_exited(&x) {
        if steps == cfg.step_cap() {
            return Err(Error::Nontermination {
                failed: 1,
                total: 1,
                cap: cfg.step_cap(),
            });
        }
        x = cfg.select(func, &x).sample(rng);
        steps += 1;
        hash = hash_point(hash, &x);
    }
    Ok(WalkResult {
        exit_point: x,
        steps,
        trajectory_hash: hash,
    })
}

/// Estimates `u_eps(x0)` from `sampling.n_samples` independent walks.
pub fn estimate_value<T: Real>(
    func: &TestFunction<T>,
    cfg: &RegimeConfig<T>,
    x0: &Point<T>,
    sampling: &Sampling,
) -> Result<EstimateResult<T>> {
    check_start(func, x0)?;
    montecarlo::estimate(sampling, |rng| {
        let w = run_walk(func, cfg, x0, rng)?;
        Ok((func.value_at(&w.exit_point), w.steps))
    })
}

/// Estimate at one grid point together with its error against `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointEstimate<T> {
    pub x: Point<T>,
    pub exact: T,
    pub estimate: EstimateResult<T>,
    pub abs_error: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupError<T> {
    /// `max_x |u_eps(x) - u(x)|` over the grid.
    pub sup_error: T,
    pub max_stderr: T,
    pub points: Vec<PointEstimate<T>>,
}

/// Grid point `i` uses the seed `sampling.derive(i)`.
pub fn sup_error<T: Real>(
    func: &TestFunction<T>,
    cfg: &RegimeConfig<T>,
    grid: &[Point<T>],
    sampling: &Sampling,
) -> Result<SupError<T>> {
    if grid.is_empty() {
        return Err(Error::Parameter("empty grid".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    for (i, x) in grid.iter().enumerate() {
        let estimate = estimate_value(func, cfg, x, &sampling.derive(i as u64))?;
        let exact = func.value_at(x);
        points.push(PointEstimate {
            x: x.clone(),
            exact,
            abs_error: (estimate.mean - exact).abs(),
            estimate,
        });
    }
    Ok(SupError {
        sup_error: points.iter().fold(T::zero(), |m, p| m.max(p.abs_error)),
        max_stderr: points.iter().fold(T::zero(), |m, p| m.max(p.estimate.stderr)),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Regime;
    use crate::montecarlo::path_rng;

    fn linear() -> TestFunction<f64> {
        TestFunction::from_id("linear", 2, 3.0).unwrap()
    }

    #[test]
    fn exit_within_one_step_overshoot() {
        let f = linear();
        for regime in [
            Regime::EtaCut { eta: 0.1 },
            Regime::RateCut { a_prime: 0.2 },
            Regime::ZeroSetUniform { grad_zero_tol: 1e-12 },
        ] {
            let cfg = RegimeConfig::new(regime, 0.1, 3.0, 2).unwrap();
            for i in 0..200 {
                let w = run_walk(&f, &cfg, &Point::zeros(2), &mut path_rng(5, i)).unwrap();
                let r = w.exit_point.norm();
                assert!((1.0 - EXIT_TOL..1.1).contains(&r), "{r}");
                assert!(w.steps >= 1);
            }
        }
    }

    #[test]
    fn walks_replay() {
        let f = linear();
        let cfg = RegimeConfig::eta_cut(0.1, 0.1, 3.0, 2).unwrap();
        let x0 = Point::from([0.2, -0.3]);
        let a = run_walk(&f, &cfg, &x0, &mut path_rng(11, 3)).unwrap();
        let b = run_walk(&f, &cfg, &x0, &mut path_rng(11, 3)).unwrap();
        assert_eq!(a, b);
        let c = run_walk(&f, &cfg, &x0, &mut path_rng(11, 4)).unwrap();
        assert_ne!(a.trajectory_hash, c.trajectory_hash);
    }

    #[test]
    fn forced_radial_push_moves_in_straight_line() {
        // max |∇u| of the saddle on B(0, 1.5) is 3; eta = 10 forces the push everywhere.
        let f = TestFunction::<f64>::saddle();
        let cfg = RegimeConfig::eta_cut(10.0, 0.1, 2.0, 2).unwrap();
        let w = run_walk(&f, &cfg, &[0.5, 0.0].into(), &mut path_rng(0, 0)).unwrap();
        assert_eq!(w.steps, 5);
        assert!((w.exit_point[0] - 1.0).abs() < 1e-12 && w.exit_point[1] == 0.0);
    }

    #[test]
    fn step_cap_breach_is_an_error() {
        let f = linear();
        let cfg = RegimeConfig::eta_cut(0.1, 0.01, 3.0, 2).unwrap().with_step_cap(3);
        assert!(matches!(
            run_walk(&f, &cfg, &Point::zeros(2), &mut path_rng(0, 0)),
            Err(Error::Nontermination { cap: 3, .. })
        ));
        match estimate_value(&f, &cfg, &Point::zeros(2), &Sampling::new(100, 0)) {
            Err(Error::Nontermination { failed, total, .. }) => assert_eq!((failed, total), (100, 100)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn start_outside_unit_ball_rejected() {
        let f = linear();
        let cfg = RegimeConfig::eta_cut(0.1, 0.1, 3.0, 2).unwrap();
        assert!(run_walk(&f, &cfg, &[1.0, 0.0].into(), &mut path_rng(0, 0)).is_err());
        assert!(estimate_value(&f, &cfg, &[0.0, 1.2].into(), &Sampling::new(100, 0)).is_err());
    }

    #[test]
    fn linear_function_is_a_martingale() {
        let f = linear();
        let cfg = RegimeConfig::eta_cut(0.1, 0.1, 3.0, 2).unwrap();
        let x0 = Point::from([0.2, 0.1]);
        let r = estimate_value(&f, &cfg, &x0, &Sampling::new(20_000, 17)).unwrap();
        assert!((r.mean - 0.2).abs() <= 3.0 * r.stderr, "{r:?}");
        assert_eq!(r.n_samples, 20_000);
        assert!(r.mean_steps > 1.0);
    }

    #[test]
    fn singleton_grid_matches_point_estimate() {
        let f = linear();
        let cfg = RegimeConfig::eta_cut(0.1, 0.1, 3.0, 2).unwrap();
        let x0 = Point::from([-0.3, 0.4]);
        let s = Sampling::new(2_000, 3);
        let sup = sup_error(&f, &cfg, std::slice::from_ref(&x0), &s).unwrap();
        let direct = estimate_value(&f, &cfg, &x0, &s.derive(0)).unwrap();
        assert_eq!(sup.sup_error, (direct.mean - (-0.3)).abs());
        assert_eq!(sup.max_stderr, direct.stderr);
        assert!(sup_error(&f, &cfg, &[], &s).is_err());
    }
}
