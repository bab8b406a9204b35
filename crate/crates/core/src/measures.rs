//! One-step transition measures of the gradient walk and the rule that
//! picks one of them at each point.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::catalog::TestFunction;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::quadrature::BallRule;
use crate::scalar::Real;

/// Gradient norms at or below this are treated as zero.
pub const GRAD_ZERO_TOL: f64 = 1e-12;
/// Step sizes must stay below this so the one-step overshoot of the unit
/// ball remains inside every catalog domain.
pub const MAX_EPSILON: f64 = 0.25;

/// Mixing weight `(2 + n) / (p + n)` between the uniform ball step and the
/// gradient atoms. Defined for `p >= 2`.
pub fn beta_weight<T: Real>(p: T, n: usize) -> Result<T> {
    if !(p >= T::lit(2.0)) || !p.is_finite() {
        return Err(Error::Parameter(format!(
            "the gradient walk needs 2 <= p < inf, got p = {p}"
        )));
    }
    if n < 2 {
        return Err(Error::Parameter(format!("dimension must be at least 2, got {n}")));
    }
    let n = T::from_usize(n).unwrap();
    Ok((T::lit(2.0) + n) / (p + n))
}

/// A probability measure for a single step of the walk.
#[derive(Clone, Debug, PartialEq)]
pub enum StepMeasure<T> {
    /// `beta * Uniform(B(center, eps)) + (1 - beta)/2 * (δ_{center + eps d} + δ_{center - eps d})`
    GradientMix {
        center: Point<T>,
        direction: Point<T>,
        epsilon: T,
        beta: T,
    },
    /// Dirac mass at `center + eps d`.
    RadialPush {
        center: Point<T>,
        direction: Point<T>,
        epsilon: T,
    },
    /// Uniform distribution on `B(center, eps)`.
    UniformBall { center: Point<T>, epsilon: T },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureKind {
    GradientMix,
    RadialPush,
    UniformBall,
}

impl<T: Real> StepMeasure<T> {
    pub fn gradient_mix(center: Point<T>, direction: Point<T>, epsilon: T, beta: T) -> Result<Self> {
        check_step(epsilon)?;
        check_unit(&direction)?;
        if !(beta > T::zero() && beta <= T::one()) {
            return Err(Error::Parameter(format!("beta must lie in (0, 1], got {beta}")));
        }
        Ok(StepMeasure::GradientMix {
            center,
            direction,
            epsilon,
            beta,
        })
    }

    pub fn radial_push(center: Point<T>, direction: Point<T>, epsilon: T) -> Result<Self> {
        check_step(epsilon)?;
        check_unit(&direction)?;
        Ok(StepMeasure::RadialPush {
            center,
            direction,
            epsilon,
        })
    }

    pub fn uniform_ball(center: Point<T>, epsilon: T) -> Result<Self> {
        check_step(epsilon)?;
        Ok(StepMeasure::UniformBall { center, epsilon })
    }

    pub fn kind(&self) -> MeasureKind {
        match self {
            StepMeasure::GradientMix { .. } => MeasureKind::GradientMix,
            StepMeasure::RadialPush { .. } => MeasureKind::RadialPush,
            StepMeasure::UniformBall { .. } => MeasureKind::UniformBall,
        }
    }

    pub fn center(&self) -> &Point<T> {
        match self {
            StepMeasure::GradientMix { center, .. }
            | StepMeasure::RadialPush { center, .. }
            | StepMeasure::UniformBall { center, .. } => center,
        }
    }

    pub fn epsilon(&self) -> T {
        match *self {
            StepMeasure::GradientMix { epsilon, .. }
            | StepMeasure::RadialPush { epsilon, .. }
            | StepMeasure::UniformBall { epsilon, .. } => epsilon,
        }
    }

    /// Draws one point. Every draw lies within distance `epsilon` of the center.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point<T> {
        match self {
            StepMeasure::GradientMix {
                center,
                direction,
                epsilon,
                beta,
            } => {
                let u: f64 = rng.random();
                let b = beta.as_f64();
                if u < b {
                    center.offset(&sample_unit_ball(center.dim(), rng), *epsilon)
                } else if u < b + 0.5 * (1.0 - b) {
                    center.offset(direction, *epsilon)
                } else {
                    center.offset(direction, -*epsilon)
                }
            }
            StepMeasure::RadialPush {
                center,
                direction,
                epsilon,
            } => center.offset(direction, *epsilon),
            StepMeasure::UniformBall { center, epsilon } => {
                center.offset(&sample_unit_ball(center.dim(), rng), *epsilon)
            }
        }
    }

    /// `∫ f dμ` by deterministic quadrature (n <= 4).
    pub fn expectation<F: Fn(&Point<T>) -> T>(&self, f: F) -> Result<T> {
        match self {
            StepMeasure::GradientMix {
                center,
                direction,
                epsilon,
                beta,
            } => {
                let rule = BallRule::for_dim(center.dim())?;
                let ball = rule.average(center, *epsilon, &f);
                let atoms = f(&center.offset(direction, *epsilon)) + f(&center.offset(direction, -*epsilon));
                Ok(*beta * ball + (T::one() - *beta) / T::lit(2.0) * atoms)
            }
            StepMeasure::RadialPush {
                center,
                direction,
                epsilon,
            } => Ok(f(&center.offset(direction, *epsilon))),
            StepMeasure::UniformBall { center, epsilon } => {
                Ok(BallRule::for_dim(center.dim())?.average(center, *epsilon, &f))
            }
        }
    }
}

/// Free-function form of [`StepMeasure::expectation`].
pub fn expectation_quadrature<T: Real, F: Fn(&Point<T>) -> T>(measure: &StepMeasure<T>, f: F) -> Result<T> {
    measure.expectation(f)
}

fn check_step<T: Real>(epsilon: T) -> Result<()> {
    if epsilon > T::zero() && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("step size must be positive, got {epsilon}")))
    }
}

fn check_unit<T: Real>(d: &Point<T>) -> Result<()> {
    if (d.norm() - T::one()).abs() <= T::lit(1e-12).max(T::epsilon() * T::lit(8.0)) {
        Ok(())
    } else {
        Err(Error::Parameter(format!("direction {d} is not a unit vector")))
    }
}

/// Uniform point of the unit ball in R^n: rejection from the cube for
/// n <= 3, Gaussian direction with radius `U^(1/n)` above that.
pub fn sample_unit_ball<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Point<T> {
    let mut p = Point::zeros(n);
    if n <= 3 {
        loop {
            let mut r2 = 0.0;
            for c in p.coords_mut() {
                let v: f64 = 2.0 * rng.random::<f64>() - 1.0;
                r2 += v * v;
                *c = T::lit(v);
            }
            if r2 < 1.0 {
                return p;
            }
        }
    }
    let mut r2 = 0.0;
    while r2 == 0.0 {
        r2 = 0.0;
        for c in p.coords_mut() {
            let v: f64 = StandardNormal.sample(rng);
            r2 += v * v;
            *c = T::lit(v);
        }
    }
    let radius = rng.random::<f64>().powf(1.0 / n as f64) / r2.sqrt();
    for c in p.coords_mut() {
        *c = *c * T::lit(radius);
    }
    p
}

/// Uniform point of the unit sphere in R^n.
pub fn sample_unit_sphere<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Point<T> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let r = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > 0.0 {
            return Point::from_f64(&g.iter().map(|v| v / r).collect::<Vec<_>>());
        }
    }
}

/// How the walk chooses its step measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regime<T> {
    /// Gradient step where `|∇u| >= eta`, radial push elsewhere.
    EtaCut { eta: T },
    /// Gradient step where `|∇u| >= eps^a'`, radial push elsewhere.
    RateCut { a_prime: T },
    /// Gradient step where `∇u != 0`, uniform ball step on the zero set.
    ZeroSetUniform { grad_zero_tol: T },
}

impl<T: Real> Regime<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::EtaCut { .. } => "eta",
            Regime::RateCut { .. } => "rate",
            Regime::ZeroSetUniform { .. } => "zeroset",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegimeConfig<T> {
    regime: Regime<T>,
    epsilon: T,
    beta: T,
    threshold: T,
    step_cap: u64,
}

pub const DEFAULT_STEP_CAP: u64 = 10_000_000;

impl<T: Real> RegimeConfig<T> {
    /// Validates the regime parameters; `beta` comes from `(p, n)`.
    pub fn new(regime: Regime<T>, epsilon: T, p: T, n: usize) -> Result<Self> {
        if !(epsilon > T::zero() && epsilon < T::lit(MAX_EPSILON)) {
            return Err(Error::Parameter(format!(
                "epsilon must lie in (0, {MAX_EPSILON}), got {epsilon}"
            )));
        }
        let beta = beta_weight(p, n)?;
        let threshold = match regime {
            Regime::EtaCut { eta } => {
                if !(eta > T::zero()) || !eta.is_finite() {
                    return Err(Error::Parameter(format!("eta must be positive, got {eta}")));
                }
                eta
            }
            Regime::RateCut { a_prime } => {
                if !(a_prime > T::zero() && a_prime < T::one()) {
                    return Err(Error::Parameter(format!("a' must lie in (0, 1), got {a_prime}")));
                }
                epsilon.powf(a_prime)
            }
            Regime::ZeroSetUniform { grad_zero_tol } => {
                if !(grad_zero_tol >= T::zero()) {
                    return Err(Error::Parameter(format!(
                        "gradient tolerance must be >= 0, got {grad_zero_tol}"
                    )));
                }
                grad_zero_tol
            }
        };
        Ok(Self {
            regime,
            epsilon,
            beta,
            threshold,
            step_cap: DEFAULT_STEP_CAP,
        })
    }

    pub fn eta_cut(eta: T, epsilon: T, p: T, n: usize) -> Result<Self> {
        Self::new(Regime::EtaCut { eta }, epsilon, p, n)
    }

    pub fn rate_cut(a_prime: T, epsilon: T, p: T, n: usize) -> Result<Self> {
        Self::new(Regime::RateCut { a_prime }, epsilon, p, n)
    }

    pub fn zero_set_uniform(epsilon: T, p: T, n: usize) -> Result<Self> {
        Self::new(
            Regime::ZeroSetUniform {
                grad_zero_tol: T::lit(GRAD_ZERO_TOL),
            },
            epsilon,
            p,
            n,
        )
    }

    pub fn with_step_cap(mut self, cap: u64) -> Self {
        self.step_cap = cap.max(1);
        self
    }

    pub fn regime(&self) -> Regime<T> {
        self.regime
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn step_cap(&self) -> u64 {
        self.step_cap
    }

    /// Gradient norm at which the gradient step kicks in.
    pub fn threshold(&self) -> T {
        self.threshold
    }

    pub fn select(&self, func: &TestFunction<T>, x: &Point<T>) -> StepMeasure<T> {
        let g = func.gradient_at(x);
        let g_norm = g.norm();
        let gradient_step = match self.regime {
            Regime::EtaCut { .. } | Regime::RateCut { .. } => g_norm >= self.threshold,
            Regime::ZeroSetUniform { .. } => g_norm > self.threshold,
        };
        if gradient_step && g_norm > T::zero() {
            return StepMeasure::GradientMix {
                center: x.clone(),
                direction: g.scaled(g_norm.recip()),
                epsilon: self.epsilon,
                beta: self.beta,
            };
        }
        match self.regime {
            Regime::ZeroSetUniform { .. } => StepMeasure::UniformBall {
                center: x.clone(),
                epsilon: self.epsilon,
            },
            _ => StepMeasure::RadialPush {
                center: x.clone(),
                direction: x.normalized().unwrap_or_else(|| Point::unit(x.dim(), 0)),
                epsilon: self.epsilon,
            },
        }
    }
}

/// Free-function form of [`RegimeConfig::select`].
pub fn select_measure<T: Real>(cfg: &RegimeConfig<T>, func: &TestFunction<T>, x: &Point<T>) -> StepMeasure<T> {
    cfg.select(func, x)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn beta_examples() {
        assert_eq!(beta_weight(2.0, 5).unwrap(), 1.0);
        assert!((beta_weight(4.0f64, 2).unwrap() - 0.6666667).abs() < 1e-7);
        assert!((beta_weight(12.0f64, 2).unwrap() - 0.2857143).abs() < 1e-7);
        assert!(beta_weight(1.5, 2).is_err());
        for n in 2..=10 {
            assert_eq!(beta_weight(2.0, n).unwrap(), 1.0);
        }
    }

    #[test]
    fn radial_push_is_deterministic() {
        let m = StepMeasure::radial_push([0.5, 0.0].into(), Point::unit(2, 0), 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let y: Point<f64> = m.sample(&mut rng);
            assert!((y[0] - 0.6).abs() < 1e-15 && y[1] == 0.0);
        }
    }

    #[test]
    fn pure_ball_mix_stays_strictly_inside() {
        let c = Point::from([0.1, 0.2]);
        let m = StepMeasure::gradient_mix(c.clone(), Point::unit(2, 1), 0.1, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            assert!(m.sample(&mut rng).distance(&c) < 0.1);
        }
    }

    #[test]
    fn atom_frequency_matches_binomial_band() {
        let c = Point::from([0.0, 0.3]);
        let eps = 0.1f64;
        let m = StepMeasure::gradient_mix(c.clone(), Point::unit(2, 0), eps, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 100_000;
        let atoms = (0..draws)
            .filter(|_| (m.sample(&mut rng).distance(&c) - eps).abs() < 1e-12)
            .count();
        let frac = atoms as f64 / draws as f64;
        assert!((frac - 0.5).abs() <= 3.0 * (0.25 / draws as f64).sqrt(), "{frac}");
    }

    #[test]
    fn select_examples() {
        let lin = TestFunction::<f64>::from_id("linear", 2, 3.0).unwrap();
        let cfg = RegimeConfig::eta_cut(0.1, 0.05, 3.0, 2).unwrap();
        match cfg.select(&lin, &[0.2, 0.1].into()) {
            StepMeasure::GradientMix { direction, .. } => assert_eq!(direction, Point::unit(2, 0)),
            other => panic!("{other:?}"),
        }

        let saddle = TestFunction::<f64>::saddle();
        let z = RegimeConfig::zero_set_uniform(0.05, 2.0, 2).unwrap();
        assert_eq!(z.select(&saddle, &[0.0, 0.0].into()).kind(), MeasureKind::UniformBall);
        assert_eq!(z.select(&saddle, &[0.1, 0.0].into()).kind(), MeasureKind::GradientMix);

        // |∇u(0.01, 0)| = 0.02 < 0.1
        let cfg = RegimeConfig::eta_cut(0.1, 0.05, 2.0, 2).unwrap();
        match cfg.select(&saddle, &[0.01, 0.0].into()) {
            StepMeasure::RadialPush { direction, .. } => assert_eq!(direction, Point::unit(2, 0)),
            other => panic!("{other:?}"),
        }
        // origin pushes along e1
        match cfg.select(&saddle, &[0.0, 0.0].into()) {
            StepMeasure::RadialPush { direction, .. } => assert_eq!(direction, Point::unit(2, 0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn threshold_tie_takes_gradient_step() {
        // |∇u| = 1 for u = x1; eta = 1 exactly
        let lin = TestFunction::<f64>::from_id("linear", 2, 3.0).unwrap();
        let cfg = RegimeConfig::eta_cut(1.0, 0.05, 3.0, 2).unwrap();
        assert_eq!(cfg.select(&lin, &[0.3, 0.0].into()).kind(), MeasureKind::GradientMix);
        let cfg = RegimeConfig::eta_cut(1.0 + 1e-12, 0.05, 3.0, 2).unwrap();
        assert_eq!(cfg.select(&lin, &[0.3, 0.0].into()).kind(), MeasureKind::RadialPush);
    }

    #[test]
    fn rate_cut_threshold() {
        let cfg = RegimeConfig::rate_cut(0.2, 0.1, 3.0, 2).unwrap();
        assert!((cfg.threshold() - 0.1f64.powf(0.2)).abs() < 1e-15);
        assert!(RegimeConfig::rate_cut(1.2, 0.1, 3.0, 2).is_err());
        assert!(RegimeConfig::eta_cut(0.0, 0.1, 3.0, 2).is_err());
        assert!(RegimeConfig::eta_cut(0.1, 0.3, 3.0, 2).is_err());
    }

    #[test]
    fn quadrature_examples() {
        let c = Point::<f64>::from([0.3, -0.2]);
        let measures = [
            StepMeasure::gradient_mix(c.clone(), Point::from([0.6, 0.8]), 0.1, 0.4).unwrap(),
            StepMeasure::radial_push(c.clone(), Point::unit(2, 1), 0.1).unwrap(),
            StepMeasure::uniform_ball(c.clone(), 0.1).unwrap(),
        ];
        for m in &measures {
            assert!((m.expectation(|_| 1.0).unwrap() - 1.0).abs() < 1e-12);
        }
        let affine = |y: &Point<f64>| 2.0 * y[0] - 3.0 * y[1] + 0.5;
        let mu1 = &measures[0];
        assert!((mu1.expectation(affine).unwrap() - affine(&c)).abs() < 1e-10);

        // average of |y| over B(0, eps) is n eps / (n + 1)
        let m = StepMeasure::<f64>::gradient_mix(Point::zeros(2), Point::unit(2, 0), 0.1, 1.0).unwrap();
        let v = m.expectation(|y| y.norm()).unwrap();
        assert!((v - 0.2 / 3.0).abs() < 1e-12, "{v}");

        let m5 = StepMeasure::uniform_ball(Point::<f64>::zeros(5), 0.1).unwrap();
        assert!(matches!(m5.expectation(|_| 1.0), Err(Error::UnsupportedDimension(5))));
    }

    #[test]
    fn constructors_validate() {
        assert!(StepMeasure::gradient_mix(Point::<f64>::zeros(2), Point::from([1.0, 1.0]), 0.1, 0.5).is_err());
        assert!(StepMeasure::gradient_mix(Point::<f64>::zeros(2), Point::unit(2, 0), 0.1, 0.0).is_err());
        assert!(StepMeasure::uniform_ball(Point::<f64>::zeros(2), -0.1).is_err());
    }

    #[test]
    fn high_dimensional_ball_samples_in_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [2, 3, 5, 8] {
            for _ in 0..2000 {
                let y: Point<f64> = sample_unit_ball(n, &mut rng);
                assert!(y.norm() <= 1.0);
            }
            let s: Point<f64> = sample_unit_sphere(n, &mut rng);
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }
}
