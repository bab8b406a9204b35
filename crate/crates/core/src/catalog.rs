//! Analytic p-harmonic test functions with exact derivatives.
//!
//! Every entry is defined on the ball `B(0, domain_radius)` with
//! `domain_radius > 1`, so that the overshoot of a walk or a discretized
//! diffusion leaving the unit ball can still be evaluated exactly.

use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::point::{Matrix, Point};
use crate::scalar::Real;

/// Smallest admissible `domain_radius`.
pub const MIN_DOMAIN_RADIUS: f64 = 1.25;
pub const DEFAULT_DOMAIN_RADIUS: f64 = 1.5;
/// Minimum distance of the radial singularity from the origin.
pub const MIN_RADIAL_OFFSET: f64 = 3.0;

/// Exponents `p` for which a catalog entry is p-harmonic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Admissible<T> {
    /// Every `1 < p < inf`.
    Any,
    Exactly(T),
}

impl<T: Real> Admissible<T> {
    pub fn contains(&self, p: T) -> bool {
        match *self {
            Admissible::Any => p > T::one() && p.is_finite(),
            Admissible::Exactly(q) => (p - q).abs() <= T::lit(1e-12) * q.abs().max(T::one()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionKind<T> {
    /// `u(x) = a . x + b`
    Linear { slope: Point<T>, offset: T },
    /// `u(x) = |x - z0|^kappa`, `kappa = (p - n) / (p - 1)`
    ShiftedRadial { center: Point<T>, exponent: T },
    /// `u(x) = x1^2 - x2^2` in the plane.
    Saddle,
    /// `u(x) = Re((x1 + i x2)^k)` in the plane.
    HarmonicPower { k: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction<T> {
    kind: FunctionKind<T>,
    dim: usize,
    admissible: Admissible<T>,
    domain_radius: T,
    zero_set: Vec<Point<T>>,
}

impl<T: Real> TestFunction<T> {
    pub fn linear(slope: Point<T>, offset: T) -> Result<Self> {
        let dim = slope.dim();
        if dim < 2 {
            return Err(Error::Parameter(format!("dimension must be at least 2, got {dim}")));
        }
        if slope.norm() == T::zero() || !slope.is_finite() {
            return Err(Error::Parameter("linear slope must be finite and nonzero".into()));
        }
        Ok(Self {
            kind: FunctionKind::Linear { slope, offset },
            dim,
            admissible: Admissible::Any,
            domain_radius: T::lit(DEFAULT_DOMAIN_RADIUS),
            zero_set: Vec::new(),
        })
    }

    /// `|x - center|^kappa`, p-harmonic in R^n away from `center` for the given `p`.
    pub fn shifted_radial(p: T, center: Point<T>) -> Result<Self> {
        let dim = center.dim();
        if dim < 2 {
            return Err(Error::Parameter(format!("dimension must be at least 2, got {dim}")));
        }
        let n = T::from_usize(dim).unwrap();
        if !(p > T::one()) || !p.is_finite() {
            return Err(Error::Parameter(format!("radial function needs 1 < p < inf, got {p}")));
        }
        if (p - n).abs() < T::lit(1e-9) {
            return Err(Error::Parameter(format!(
                "p = n = {dim} gives the logarithmic fundamental solution, not in the catalog"
            )));
        }
        if center.norm() < T::lit(MIN_RADIAL_OFFSET) {
            return Err(Error::Parameter(format!(
                "radial center must satisfy |z0| >= {MIN_RADIAL_OFFSET}, got {}",
                center.norm()
            )));
        }
        Ok(Self {
            kind: FunctionKind::ShiftedRadial {
                center,
                exponent: (p - n) / (p - T::one()),
            },
            dim,
            admissible: Admissible::Exactly(p),
            domain_radius: T::lit(DEFAULT_DOMAIN_RADIUS),
            zero_set: Vec::new(),
        })
    }

    pub fn saddle() -> Self {
        Self {
            kind: FunctionKind::Saddle,
            dim: 2,
            admissible: Admissible::Exactly(T::lit(2.0)),
            domain_radius: T::lit(DEFAULT_DOMAIN_RADIUS),
            zero_set: vec![Point::zeros(2)],
        }
    }

    pub fn harmonic_power(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::Parameter(format!("harmonic power needs k >= 2, got {k}")));
        }
        Ok(Self {
            kind: FunctionKind::HarmonicPower { k },
            dim: 2,
            admissible: Admissible::Exactly(T::lit(2.0)),
            domain_radius: T::lit(DEFAULT_DOMAIN_RADIUS),
            zero_set: vec![Point::zeros(2)],
        })
    }

    /// Looks up a catalog entry by id: `linear`, `radial`, `saddle`, `hpow:k`.
    ///
    /// `linear` is `u = x1`, `radial` is centered at `3 e1` and built for
    /// the requested `p`. The planar entries reject `n != 2`.
    pub fn from_id(id: &str, n: usize, p: T) -> Result<Self> {
        let planar = |f: Self| {
            if n == 2 {
                Ok(f)
            } else {
                Err(Error::Parameter(format!(
                    "`{id}` is only defined for n = 2, got n = {n}"
                )))
            }
        };
        match id {
            "linear" => Self::linear(Point::unit(n.max(1), 0), T::zero()),
            "radial" => {
                if n < 2 {
                    return Err(Error::Parameter(format!("dimension must be at least 2, got {n}")));
                }
                Self::shifted_radial(p, Point::unit(n, 0).scaled(T::lit(MIN_RADIAL_OFFSET)))
            }
            "saddle" => planar(Self::saddle()),
            _ => match id.strip_prefix("hpow:") {
                Some(k) => {
                    let k: u32 = k
                        .parse()
                        .map_err(|_| Error::Parameter(format!("bad harmonic power in `{id}`")))?;
                    planar(Self::harmonic_power(k)?)
                }
                None => Err(Error::Parameter(format!("unknown function id `{id}`"))),
            },
        }
    }

    pub fn with_domain_radius(mut self, radius: T) -> Result<Self> {
        if radius < T::lit(MIN_DOMAIN_RADIUS) {
            return Err(Error::Parameter(format!(
                "domain radius must be at least {MIN_DOMAIN_RADIUS}, got {radius}"
            )));
        }
        if let FunctionKind::ShiftedRadial { center, .. } = &self.kind {
            if center.norm() <= radius {
                return Err(Error::Parameter(
                    "radial singularity would lie inside the domain".into(),
                ));
            }
        }
        self.domain_radius = radius;
        Ok(self)
    }

    pub fn id(&self) -> String {
        match &self.kind {
            FunctionKind::Linear { .. } => "linear".into(),
            FunctionKind::ShiftedRadial { .. } => "radial".into(),
            FunctionKind::Saddle => "saddle".into(),
            FunctionKind::HarmonicPower { k } => format!("hpow:{k}"),
        }
    }

    pub fn kind(&self) -> &FunctionKind<T> {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn admissible(&self) -> Admissible<T> {
        self.admissible
    }

    pub fn domain_radius(&self) -> T {
        self.domain_radius
    }

    /// The finite set where the gradient vanishes (empty when it never does).
    pub fn zero_set(&self) -> &[Point<T>] {
        &self.zero_set
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.kind, FunctionKind::Linear { .. })
    }

    /// Rejects `p` for which this function is not p-harmonic.
    pub fn check_exponent(&self, p: T) -> Result<()> {
        if self.admissible.contains(p) {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "`{}` is not p-harmonic for p = {p}",
                self.id()
            )))
        }
    }

    pub fn check_domain(&self, x: &Point<T>) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::Parameter(format!(
                "point has dimension {}, function `{}` has dimension {}",
                x.dim(),
                self.id(),
                self.dim
            )));
        }
        if x.is_finite() && x.norm() < self.domain_radius {
            Ok(())
        } else {
            Err(Error::Domain {
                point: x.to_string(),
                radius: self.domain_radius.as_f64(),
            })
        }
    }

    pub fn eval(&self, x: &Point<T>) -> Result<T> {
        self.check_domain(x)?;
        Ok(self.value_at(x))
    }

    pub fn gradient(&self, x: &Point<T>) -> Result<Point<T>> {
        self.check_domain(x)?;
        Ok(self.gradient_at(x))
    }

    pub fn hessian(&self, x: &Point<T>) -> Result<Matrix<T>> {
        self.check_domain(x)?;
        Ok(self.hessian_at(x))
    }

    /// Normalized p-Laplacian `Δu + (p - 2) |∇u|^-2 Σ u_ij u_i u_j` at `x`.
    pub fn p_laplacian_residual(&self, x: &Point<T>, p: T) -> Result<T> {
        self.check_domain(x)?;
        let g = self.gradient_at(x);
        let g2 = g.norm_sq();
        if g2.sqrt() <= T::lit(crate::measures::GRAD_ZERO_TOL) {
            return Err(Error::ZeroGradient { point: x.to_string() });
        }
        let h = self.hessian_at(x);
        Ok(h.trace() + (p - T::lit(2.0)) * h.quadratic_form(&g) / g2)
    }

    /// Value without the domain check; callers guarantee `|x| < domain_radius`.
    pub(crate) fn value_at(&self, x: &Point<T>) -> T {
        match &self.kind {
            FunctionKind::Linear { slope, offset } => slope.dot(x) + *offset,
            FunctionKind::ShiftedRadial { center, exponent } => x.distance(center).powf(*exponent),
            FunctionKind::Saddle => x[0] * x[0] - x[1] * x[1],
            FunctionKind::HarmonicPower { k } => Complex::new(x[0], x[1]).powu(*k).re,
        }
    }

    pub(crate) fn gradient_at(&self, x: &Point<T>) -> Point<T> {
        match &self.kind {
            FunctionKind::Linear { slope, .. } => slope.clone(),
            FunctionKind::ShiftedRadial { center, exponent } => {
                let d = x.sub(center);
                let r2 = d.norm_sq();
                // kappa r^(kappa-2) (x - z0)
                d.scaled(*exponent * r2.powf((*exponent - T::lit(2.0)) / T::lit(2.0)))
            }
            FunctionKind::Saddle => Point::from([T::lit(2.0) * x[0], T::lit(-2.0) * x[1]]),
            FunctionKind::HarmonicPower { k } => {
                // d/dx1 = Re(k z^(k-1)), d/dx2 = -Im(k z^(k-1))
                let w = Complex::new(x[0], x[1]).powu(k - 1) * T::from_u32(*k).unwrap();
                Point::from([w.re, -w.im])
            }
        }
    }

    pub(crate) fn hessian_at(&self, x: &Point<T>) -> Matrix<T> {
        match &self.kind {
            FunctionKind::Linear { .. } => Matrix::zeros(self.dim),
            FunctionKind::ShiftedRadial { center, exponent } => {
                let d = x.sub(center);
                let r2 = d.norm_sq();
                let two = T::lit(2.0);
                let s = *exponent * r2.powf((*exponent - two) / two);
                // s (I + (kappa - 2) d d^T / r^2)
                let mut h = Matrix::identity_plus_rank_one(&d, T::one(), (*exponent - two) / r2);
                h = h.scaled(s);
                symmetrize(&mut h);
                h
            }
            FunctionKind::Saddle => Matrix::diag(&[T::lit(2.0), T::lit(-2.0)]),
            FunctionKind::HarmonicPower { k } => {
                let mut m = Matrix::zeros(2);
                if *k >= 2 {
                    let kk = T::from_u32(k * (k - 1)).unwrap();
                    let w = Complex::new(x[0], x[1]).powu(k - 2) * kk;
                    m[(0, 0)] = w.re;
                    m[(1, 1)] = -w.re;
                    m[(0, 1)] = -w.im;
                    m[(1, 0)] = -w.im;
                }
                m
            }
        }
    }
}

fn symmetrize<T: Real>(m: &mut Matrix<T>) {
    let n = m.dim();
    for i in 0..n {
        for j in 0..i {
            let v = (m[(i, j)] + m[(j, i)]) / T::lit(2.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

impl<T: Real> fmt::Display for TestFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FunctionKind::Linear { slope, offset } => write!(f, "linear: u(x) = {slope} . x + {offset}"),
            FunctionKind::ShiftedRadial { center, exponent } => {
                write!(f, "radial: u(x) = |x - {center}|^{exponent}")
            }
            FunctionKind::Saddle => write!(f, "saddle: u(x) = x1^2 - x2^2"),
            FunctionKind::HarmonicPower { k } => write!(f, "hpow:{k}: u(x) = Re((x1 + i x2)^{k})"),
        }
    }
}

/// One-line descriptions of the catalog ids.
pub fn catalog_entries() -> &'static [(&'static str, &'static str)] {
    &[
        ("linear", "u(x) = x1, p-harmonic for every p, gradient never vanishes"),
        (
            "radial",
            "u(x) = |x - 3 e1|^((p-n)/(p-1)), p-harmonic for the given p != n",
        ),
        ("saddle", "u(x) = x1^2 - x2^2 (p = 2, n = 2), gradient vanishes at 0"),
        (
            "hpow:k",
            "u(x) = Re((x1 + i x2)^k), k >= 2 (p = 2, n = 2), gradient vanishes at 0",
        ),
    ]
}
