//! Monte Carlo laboratory for the gradient walk and its continuous-time
//! diffusion, checked against analytic p-harmonic functions.
//!
//! The numerics are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common cases. The experiment runner, the
//! CSV reports and the CLI work in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod catalog;
pub mod config;
pub mod diffusion;
pub mod error;
pub mod experiment;
pub mod measures;
pub mod montecarlo;
pub mod point;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod walk;

pub use analysis::{
    ball_mean_norm, check_drift, dpp_residual, drift_constant, drift_suite, fit_rate, fit_rate_above_noise,
    lattice_grid, residual_sweep, DriftReport, DriftSuite, ResidualPoint,
};
pub use catalog::{Admissible, FunctionKind, TestFunction};
pub use diffusion::{
    diffusion_matrix, estimate_value_ct, run_diffusion, sigma_factor, DiffusionConfig, DiffusionMatrix,
};
pub use error::{Error, Result};
pub use measures::{
    beta_weight, expectation_quadrature, select_measure, MeasureKind, Regime, RegimeConfig, StepMeasure,
};
pub use montecarlo::{EstimateResult, Sampling};
pub use point::{Matrix, Point};
pub use scalar::Real;
pub use walk::{estimate_value, run_walk, sup_error, PointEstimate, SupError, WalkResult};

pub type Point64 = Point<f64>;
pub type Point32 = Point<f32>;
pub type Matrix64 = Matrix<f64>;
pub type TestFunction64 = TestFunction<f64>;
pub type TestFunction32 = TestFunction<f32>;
pub type StepMeasure64 = StepMeasure<f64>;
pub type RegimeConfig64 = RegimeConfig<f64>;
pub type RegimeConfig32 = RegimeConfig<f32>;
pub type DiffusionConfig64 = DiffusionConfig<f64>;
pub type EstimateResult64 = EstimateResult<f64>;
pub type WalkResult64 = WalkResult<f64>;
