//! Euler-Maruyama simulation of the diffusion generated by
//! `Σ a_ij(x) ∂_ij`, `a_ij = (δ_ij + (p - 2) u_i u_j / |∇u|^2) / 2`,
//! stopped at the first exit from the unit ball.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::catalog::TestFunction;
use crate::error::{Error, Result};
use crate::measures::GRAD_ZERO_TOL;
use crate::montecarlo::{self, EstimateResult, Sampling};
use crate::point::{Matrix, Point};
use crate::scalar::Real;
use crate::walk::{check_start, has_exited, hash_point, WalkResult};

pub const MAX_TIME_STEP: f64 = 1e-2;
pub const DEFAULT_PATH_CAP: u64 = 100_000_000;

/// Generator coefficients `A(x)` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionMatrix<T> {
    entries: Matrix<T>,
    /// `∇u / |∇u|`, absent on the zero set of the gradient.
    grad_dir: Option<Point<T>>,
}

impl<T: Real> DiffusionMatrix<T> {
    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn grad_dir(&self) -> Option<&Point<T>> {
        self.grad_dir.as_ref()
    }
}

pub fn diffusion_matrix<T: Real>(func: &TestFunction<T>, x: &Point<T>, p: T) -> Result<DiffusionMatrix<T>> {
    let g = func.gradient(x)?;
    let half = T::lit(0.5);
    let g_norm = g.norm();
    if g_norm <= T::lit(GRAD_ZERO_TOL) {
        return Ok(DiffusionMatrix {
            entries: Matrix::scaled_identity(x.dim(), half),
            grad_dir: None,
        });
    }
    let q = g.scaled(g_norm.recip());
    let entries = Matrix::identity_plus_rank_one(&q, half, half * (p - T::lit(2.0)));
    Ok(DiffusionMatrix {
        entries,
        grad_dir: Some(q),
    })
}

/// `σ = I + (sqrt(p - 1) - 1) q q^T`, so that `σ σ^T = 2A`.
pub fn sigma_factor<T: Real>(a: &DiffusionMatrix<T>, grad_dir: Option<&Point<T>>, p: T) -> Result<Matrix<T>> {
    if !(p > T::one()) {
        return Err(Error::Parameter(format!("diffusion needs p > 1, got {p}")));
    }
    let n = a.entries.dim();
    Ok(match grad_dir {
        Some(q) => Matrix::identity_plus_rank_one(q, T::one(), (p - T::one()).sqrt() - T::one()),
        None => Matrix::identity(n),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionConfig<T> {
    pub p: T,
    /// Time step.
    pub h: T,
    pub path_cap: u64,
    pub seed: u64,
    pub grad_zero_tol: T,
}

impl<T: Real> DiffusionConfig<T> {
    pub fn new(p: T, h: T, seed: u64) -> Result<Self> {
        let cfg = Self {
            p,
            h,
            path_cap: DEFAULT_PATH_CAP,
            seed,
            grad_zero_tol: T::lit(GRAD_ZERO_TOL),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_path_cap(mut self, cap: u64) -> Self {
        self.path_cap = cap.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > T::one()) || !self.p.is_finite() {
            return Err(Error::Parameter(format!("diffusion needs 1 < p < inf, got {}", self.p)));
        }
        if !(self.h > T::zero() && self.h <= T::lit(MAX_TIME_STEP)) {
            return Err(Error::Parameter(format!(
                "time step must lie in (0, {MAX_TIME_STEP}], got {}",
                self.h
            )));
        }
        Ok(())
    }
}

/// One Euler-Maruyama path `X_{k+1} = X_k + σ(X_k) sqrt(h) ξ_k` from `x0`
/// until the first iterate outside the open unit ball.
pub fn run_diffusion<T: Real, R: Rng + ?Sized>(
    func: &TestFunction<T>,
    cfg: &DiffusionConfig<T>,
    x0: &Point<T>,
    rng: &mut R,
) -> Result<WalkResult<T>> {
    cfg.validate()?;
    check_start(func, x0)?;
    let n = x0.dim();
    let sqrt_h = cfg.h.sqrt();
    let stretch = (cfg.p - T::one()).sqrt() - T::one();
    let mut x = x0.clone();
    let mut xi = Point::zeros(n);
    let mut steps = 0u64;
    let mut hash = hash_point(0xcbf2_9ce4_8422_2325, &x);
    while !has_exited(&x) {
        if steps == cfg.path_cap {
            return Err(Error::Nontermination {
                failed: 1,
                total: 1,
                cap: cfg.path_cap,
            });
        }
        for c in xi.coords_mut() {
            *c = T::lit(StandardNormal.sample(rng));
        }
        let g = func.gradient_at(&x);
        let g_norm = g.norm();
        x.add_scaled(&xi, sqrt_h);
        if g_norm > cfg.grad_zero_tol {
            let q = g.scaled(g_norm.recip());
            x.add_scaled(&q, sqrt_h * stretch * q.dot(&xi));
        }
        steps += 1;
        hash = hash_point(hash, &x);
        if x.norm() >= func.domain_radius() {
            return Err(Error::DomainEscape {
                failed: 1,
                total: 1,
                radius: func.domain_radius().as_f64(),
            });
        }
    }
    Ok(WalkResult {
        exit_point: x,
        steps,
        trajectory_hash: hash,
    })
}

/// Estimates `v(x0) = E[u(X_tau)]` over `n_paths` paths seeded by `cfg.seed`.
pub fn estimate_value_ct<T: Real>(
    func: &TestFunction<T>,
    cfg: &DiffusionConfig<T>,
    x0: &Point<T>,
    n_paths: usize,
    workers: Option<usize>,
) -> Result<EstimateResult<T>> {
    cfg.validate()?;
    func.check_exponent(cfg.p)?;
    check_start(func, x0)?;
    let sampling = Sampling {
        n_samples: n_paths,
        seed: cfg.seed,
        workers,
    };
    montecarlo::estimate(&sampling, |rng| {
        let w = run_diffusion(func, cfg, x0, rng)?;
        Ok((func.value_at(&w.exit_point), w.steps))
    })
}
