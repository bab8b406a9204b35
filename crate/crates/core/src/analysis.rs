//! Deterministic checks: the drift inequality for the distance to a fixed
//! point, the order of the one-step averaging residual, and log-log rate
//! fits over step-size sweeps.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::TestFunction;
use crate::error::{Error, Result};
use crate::measures::{beta_weight, sample_unit_ball, sample_unit_sphere, StepMeasure, GRAD_ZERO_TOL};
use crate::point::Point;
use crate::quadrature::{gauss_legendre_interval, MAX_QUADRATURE_DIM};
use crate::scalar::Real;

/// Margin below which a drift report counts as a violation.
pub const DRIFT_TOLERANCE: f64 = 1e-8;

/// `C(n) = max_{0<c<1} ((n-1)/n) (1 - c^n) c^2`, by golden-section search.
pub fn drift_constant(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Parameter(format!("dimension must be at least 2, got {n}")));
    }
    let nf = n as f64;
    let g = |c: f64| (nf - 1.0) / nf * (1.0 - c.powi(n as i32)) * c * c;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > 1e-12 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    Ok(g(0.5 * (a + b)))
}

/// Fraction of the unit sphere `S^{n-1}` within angle `theta` of a pole.
fn cap_fraction(n: usize, cos_theta: f64) -> f64 {
    let c = cos_theta.clamp(-1.0, 1.0);
    let theta = c.acos();
    match n {
        2 => theta / PI,
        3 => 0.5 * (1.0 - c),
        4 => (theta - theta.sin() * c) / PI,
        _ => unreachable!("cap fractions exist for n = 2, 3, 4"),
    }
}

/// Average of `|y|` over `B(x, eps)` in R^n (n <= 4) with `m` Gauss nodes.
///
/// Integrates over spheres centered at the origin, weighting each radius by
/// the fraction of its sphere inside the ball, so the kink of `|y|` at the
/// origin costs nothing. The substitution `r = a + (b - a)(1 - cos φ)/2`
/// removes the square-root behaviour of the fraction at both ends.
fn ball_mean_norm_with(n: usize, dist: f64, eps: f64, m: usize) -> f64 {
    let nf = n as f64;
    if dist == 0.0 {
        return nf * eps / (nf + 1.0);
    }
    let full = if dist < eps {
        (eps - dist).powi(n as i32 + 1) / (nf + 1.0)
    } else {
        0.0
    };
    let (a, b) = ((dist - eps).abs(), dist + eps);
    let shell: f64 = gauss_legendre_interval(m, 0.0, PI)
        .into_iter()
        .map(|(phi, w)| {
            let r = a + 0.5 * (b - a) * (1.0 - phi.cos());
            let jac = 0.5 * (b - a) * phi.sin();
            if r <= 0.0 {
                return 0.0;
            }
            let cos_theta = (r * r + dist * dist - eps * eps) / (2.0 * r * dist);
            w * jac * r.powi(n as i32) * cap_fraction(n, cos_theta)
        })
        .sum();
    nf / eps.powi(n as i32) * (full + shell)
}

/// Average of `|y|` over the ball `B(x, eps)`.
pub fn ball_mean_norm<T: Real>(x: &Point<T>, eps: T) -> Result<T> {
    let n = x.dim();
    if !(2..=MAX_QUADRATURE_DIM).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let (d, e) = (x.norm().as_f64(), eps.as_f64());
    let coarse = ball_mean_norm_with(n, d, e, 64);
    let fine = ball_mean_norm_with(n, d, e, 96);
    if !fine.is_finite() || (coarse - fine).abs() > 1e-12 * fine.abs().max(e) {
        return Err(Error::Tolerance(format!(
            "ball average of |y| at |x| = {d}, eps = {e}: {coarse} vs {fine}"
        )));
    }
    Ok(T::lit(fine))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport<T> {
    pub x: Point<T>,
    pub nu: Point<T>,
    pub epsilon: T,
    pub beta: T,
    /// `(1-β)/2 (|x+εν| + |x-εν|) + β ⨍_{B(x,ε)} |y| dy`
    pub lhs: T,
    /// `|x| + C(n) β ε² / (2(|x| + ε))`
    pub rhs: T,
    pub margin: T,
}

/// Evaluates both sides of the drift inequality at one configuration.
pub fn check_drift<T: Real>(x: &Point<T>, nu: &Point<T>, epsilon: T, beta: T) -> Result<DriftReport<T>> {
    if x.dim() != nu.dim() {
        return Err(Error::Parameter("x and nu differ in dimension".into()));
    }
    if (nu.norm() - T::one()).abs() > T::lit(1e-12) {
        return Err(Error::Parameter(format!("nu = {nu} is not a unit vector")));
    }
    if !(epsilon > T::zero()) || !epsilon.is_finite() {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(beta > T::zero() && beta <= T::one()) {
        return Err(Error::Parameter(format!("beta must lie in (0, 1], got {beta}")));
    }
    let two = T::lit(2.0);
    let atoms = (x.offset(nu, epsilon).norm() + x.offset(nu, -epsilon).norm()) / two;
    let ball = ball_mean_norm(x, epsilon)?;
    let lhs = (T::one() - beta) * atoms + beta * ball;
    let r = x.norm();
    let c = T::lit(drift_constant(x.dim())?);
    let rhs = r + c * beta * epsilon * epsilon / (two * (r + epsilon));
    Ok(DriftReport {
        x: x.clone(),
        nu: nu.clone(),
        epsilon,
        beta,
        lhs,
        rhs,
        margin: lhs - rhs,
    })
}

#[derive(Clone, Debug)]
pub struct DriftSuite {
    pub reports: Vec<DriftReport<f64>>,
    pub worst_margin: f64,
    /// Reports with `margin < -DRIFT_TOLERANCE`.
    pub violations: usize,
}

impl DriftSuite {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Randomized drift check: `cases` draws per dimension with `ε ∈ [0.01, 0.2]`,
/// `β ∈ (0, 1]`, `ν` uniform on the sphere and `x` uniform in `B(0, 1)`
/// (every other draw from `B(0, 0.2)`, where the ball can contain the origin).
pub fn drift_suite(dims: &[usize], cases: usize, seed: u64) -> Result<DriftSuite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = Vec::with_capacity(dims.len() * cases);
    for &n in dims {
        for i in 0..cases {
            let scale = if i % 2 == 0 { 1.0 } else { 0.2 };
            let x = sample_unit_ball::<f64, _>(n, &mut rng).scaled(scale);
            let nu = sample_unit_sphere(n, &mut rng);
            let eps = 0.01 + 0.19 * rng.random::<f64>();
            let beta = 1.0 - rng.random::<f64>();
            reports.push(check_drift(&x, &nu, eps, beta)?);
        }
    }
    let worst_margin = reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let violations = reports.iter().filter(|r| r.margin < -DRIFT_TOLERANCE).count();
    Ok(DriftSuite {
        reports,
        worst_margin,
        violations,
    })
}

/// `|∫ u dμ_{x,1} - u(x)|` with the gradient-mix measure at step `epsilon`.
pub fn dpp_residual<T: Real>(func: &TestFunction<T>, x: &Point<T>, epsilon: T, p: T) -> Result<T> {
    func.check_domain(x)?;
    if x.norm() + epsilon >= func.domain_radius() {
        return Err(Error::Domain {
            point: x.to_string(),
            radius: func.domain_radius().as_f64(),
        });
    }
    let g = func.gradient_at(x);
    let g_norm = g.norm();
    if g_norm <= T::lit(GRAD_ZERO_TOL) {
        return Err(Error::ZeroGradient { point: x.to_string() });
    }
    let beta = beta_weight(p, x.dim())?;
    let mu = StepMeasure::gradient_mix(x.clone(), g.scaled(g_norm.recip()), epsilon, beta)?;
    Ok((mu.expectation(|y| func.value_at(y))? - func.value_at(x)).abs())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualPoint<T> {
    pub epsilon: T,
    pub residual: T,
    /// `residual(previous eps) / residual(eps)`; absent for the first entry.
    pub ratio: Option<T>,
}

/// Residuals over a decreasing step-size list, with successive ratios.
pub fn residual_sweep<T: Real>(
    func: &TestFunction<T>,
    x: &Point<T>,
    p: T,
    eps_list: &[T],
) -> Result<Vec<ResidualPoint<T>>> {
    check_decreasing(eps_list)?;
    let mut out: Vec<ResidualPoint<T>> = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let residual = dpp_residual(func, x, eps, p)?;
        let ratio = out.last().map(|prev| prev.residual / residual);
        out.push(ResidualPoint {
            epsilon: eps,
            residual,
            ratio,
        });
    }
    Ok(out)
}

pub(crate) fn check_decreasing<T: Real>(eps: &[T]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::Config("empty epsilon list".into()));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Config("epsilon values must be strictly decreasing".into()));
    }
    Ok(())
}

/// Least-squares slope of `log(err)` against `log(eps)`.
pub fn fit_rate<T: Real>(eps: &[T], err: &[T]) -> Result<T> {
    if eps.len() != err.len() {
        return Err(Error::Parameter(format!(
            "{} step sizes but {} errors",
            eps.len(),
            err.len()
        )));
    }
    if eps.len() < 3 {
        return Err(Error::Parameter(format!(
            "rate fit needs at least 3 points, got {}",
            eps.len()
        )));
    }
    if eps
        .iter()
        .chain(err.iter())
        .any(|&v| !(v > T::zero()) || !v.is_finite())
    {
        return Err(Error::Parameter("rate fit needs positive finite entries".into()));
    }
    let xs: Vec<T> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<T> = err.iter().map(|e| e.ln()).collect();
    let m = T::from_usize(xs.len()).unwrap();
    let xbar = xs.iter().copied().sum::<T>() / m;
    let ybar = ys.iter().copied().sum::<T>() / m;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys.iter()) {
        sxy = sxy + (x - xbar) * (y - ybar);
        sxx = sxx + (x - xbar) * (x - xbar);
    }
    if sxx == T::zero() {
        return Err(Error::Parameter("rate fit needs distinct step sizes".into()));
    }
    Ok(sxy / sxx)
}

/// Rate fit over the entries whose error exceeds `noise_factor` standard
/// errors; `None` when fewer than three survive.
pub fn fit_rate_above_noise<T: Real>(eps: &[T], err: &[T], stderr: &[T], noise_factor: T) -> Result<Option<T>> {
    let kept: Vec<(T, T)> = eps
        .iter()
        .zip(err.iter())
        .zip(stderr.iter())
        .filter(|((_, &e), &s)| e > noise_factor * s && e > T::zero())
        .map(|((&h, &e), _)| (h, e))
        .collect();
    if kept.len() < 3 {
        return Ok(None);
    }
    let (h, e): (Vec<T>, Vec<T>) = kept.into_iter().unzip();
    fit_rate(&h, &e).map(Some)
}

/// The lattice `{-0.5, 0, 0.5}^n` intersected with the open unit ball.
pub fn lattice_grid<T: Real>(n: usize) -> Vec<Point<T>> {
    let levels = [-0.5, 0.0, 0.5];
    let total = 3usize.pow(n as u32);
    (0..total)
        .map(|mut code| {
            let coords: Vec<f64> = (0..n)
                .map(|_| {
                    let l = levels[code % 3];
                    code /= 3;
                    l
                })
                .collect();
            Point::from_f64(&coords)
        })
        .filter(|p: &Point<T>| p.norm() < T::one())
        .collect()
}
