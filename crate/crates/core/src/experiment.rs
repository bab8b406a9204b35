//! Step-size sweeps driven by an [`ExperimentConfig`].

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::analysis::{drift_suite, fit_rate_above_noise, lattice_grid, residual_sweep};
use crate::catalog::TestFunction;
use crate::config::{load_config, ExperimentConfig};
use crate::error::{Error, Result};
use crate::montecarlo::Sampling;
use crate::point::Point;
use crate::quadrature::MAX_QUADRATURE_DIM;
use crate::report::{fmt_f64, write_records, PointRecord};
use crate::walk::sup_error;

/// Draws per dimension in the drift check attached to every sweep.
pub const SWEEP_DRIFT_CASES: usize = 200;
/// Errors within this many standard errors are excluded from rate fits.
pub const NOISE_FACTOR: f64 = 4.0;

/// Aggregate of one step size in a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub epsilon: f64,
    pub sup_error: f64,
    pub max_stderr: f64,
    pub regime: String,
    pub fn_id: String,
    pub p: f64,
    pub n: usize,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub records: Vec<PointRecord>,
    pub sweeps: Vec<SweepRecord>,
    /// Log-log slope of sup error against eps, when enough cells rise above noise.
    pub rate: Option<f64>,
    pub drift_worst_margin: Option<f64>,
    pub checks: Vec<CheckOutcome>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn worst_error(&self) -> f64 {
        self.sweeps.iter().map(|s| s.sup_error).fold(0.0, f64::max)
    }

    pub fn summary_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                format!(
                    "check {}: {} ({})",
                    c.name,
                    if c.passed { "ok" } else { "FAILED" },
                    c.detail
                )
            })
            .collect();
        lines.push(match self.rate {
            Some(r) => format!("rate {}", fmt_f64(r)),
            None => "rate not fitted".into(),
        });
        lines.push(self.status_line());
        lines
    }

    /// `PASS`/`FAIL` with the worst drift margin and sup error.
    pub fn status_line(&self) -> String {
        format!(
            "{} worst_margin={} worst_error={}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.drift_worst_margin.map_or_else(|| "n/a".into(), fmt_f64),
            fmt_f64(self.worst_error())
        )
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let func = TestFunction::<f64>::from_id(&cfg.fn_id, cfg.n, cfg.p)?;
    func.check_exponent(cfg.p)?;
    let grid: Vec<Point<f64>> = match &cfg.x0 {
        Some(x0) => vec![Point::from_f64(x0)],
        None => lattice_grid(cfg.n),
    };
    let mut sampling = Sampling::new(cfg.samples, cfg.seed);
    if let Some(w) = cfg.workers {
        sampling = sampling.with_workers(w);
    }

    let mut records = Vec::new();
    let mut sweeps = Vec::new();
    for (k, &eps) in cfg.eps.iter().enumerate() {
        let regime = cfg.regime_config(eps)?;
        let sup = sup_error(&func, &regime, &grid, &sampling.derive(k as u64))
            .map_err(|e| Error::Config(format!("cell eps = {eps}: {e}")))?;
        for pt in &sup.points {
            records.push(PointRecord {
                fn_id: cfg.fn_id.clone(),
                regime: cfg.regime.as_str().into(),
                p: cfg.p,
                n: cfg.n,
                epsilon: eps,
                x0: pt.x.to_f64_vec(),
                estimate: pt.estimate.mean,
                stderr: pt.estimate.stderr,
                abs_error: pt.abs_error,
                n_samples: pt.estimate.n_samples,
                mean_steps: pt.estimate.mean_steps,
                seed: pt.estimate.seed,
            });
        }
        sweeps.push(SweepRecord {
            epsilon: eps,
            sup_error: sup.sup_error,
            max_stderr: sup.max_stderr,
            regime: cfg.regime.as_str().into(),
            fn_id: cfg.fn_id.clone(),
            p: cfg.p,
            n: cfg.n,
            n_samples: cfg.samples,
            seed: cfg.seed,
        });
    }

    let mut checks = Vec::new();
    let last = sweeps.last().expect("validated non-empty eps list");
    if func.is_affine() {
        let worst = sweeps
            .iter()
            .map(|s| s.sup_error / s.max_stderr.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        checks.push(CheckOutcome {
            name: "martingale",
            passed: sweeps.iter().all(|s| s.sup_error <= 3.0 * s.max_stderr),
            detail: format!("max sup_error / max_stderr = {worst:.3} (limit 3)"),
        });
    } else {
        let budget = cfg.error_budget(last.epsilon);
        checks.push(CheckOutcome {
            name: "bound",
            passed: last.sup_error <= budget + 3.0 * last.max_stderr,
            detail: format!(
                "sup_error {:.3e} at eps {} vs budget {:.3e} + 3 stderr {:.3e}",
                last.sup_error, last.epsilon, budget, last.max_stderr
            ),
        });
        if sweeps.len() >= 2 {
            let first = &sweeps[0];
            let band = 4.0 * first.max_stderr.hypot(last.max_stderr) + 1e-12;
            checks.push(CheckOutcome {
                name: "trend",
                passed: last.sup_error <= first.sup_error + band,
                detail: format!(
                    "sup_error {:.3e} (eps {}) -> {:.3e} (eps {}), band {:.3e}",
                    first.sup_error, first.epsilon, last.sup_error, last.epsilon, band
                ),
            });
        }
    }

    let rate = if !func.is_affine() && sweeps.len() >= 3 {
        let eps: Vec<f64> = sweeps.iter().map(|s| s.epsilon).collect();
        let err: Vec<f64> = sweeps.iter().map(|s| s.sup_error).collect();
        let se: Vec<f64> = sweeps.iter().map(|s| s.max_stderr).collect();
        let rate = fit_rate_above_noise(&eps, &err, &se, NOISE_FACTOR)?;
        checks.push(CheckOutcome {
            name: "rate",
            passed: rate.is_none_or(|r| r > 0.0),
            detail: match rate {
                Some(r) => format!("slope {r:.4}"),
                None => "fewer than 3 cells above noise, not fitted".into(),
            },
        });
        rate
    } else {
        None
    };

    let mut drift_worst_margin = None;
    if cfg.n <= MAX_QUADRATURE_DIM {
        let suite = drift_suite(&[cfg.n], SWEEP_DRIFT_CASES, cfg.seed)?;
        drift_worst_margin = Some(suite.worst_margin);
        checks.push(CheckOutcome {
            name: "drift",
            passed: suite.passed(),
            detail: format!("{} draws, worst margin {:.3e}", suite.reports.len(), suite.worst_margin),
        });
        if let Some(outcome) = residual_check(&func, cfg, &grid)? {
            checks.push(outcome);
        }
    }

    Ok(ExperimentReport {
        records,
        sweeps,
        rate,
        drift_worst_margin,
        checks,
    })
}

/// Required decay of the averaging residual between consecutive step sizes:
/// `0.875 (eps_k / eps_{k+1})^3`, i.e. 7 for a halving.
pub fn residual_ratio_floor(eps_hi: f64, eps_lo: f64) -> f64 {
    0.875 * (eps_hi / eps_lo).powi(3)
}

fn residual_check(
    func: &TestFunction<f64>,
    cfg: &ExperimentConfig,
    grid: &[Point<f64>],
) -> Result<Option<CheckOutcome>> {
    if cfg.eps.len() < 2 {
        return Ok(None);
    }
    let Some(x) = grid.iter().find(|x| func.gradient_at(x).norm() > 1e-6) else {
        return Ok(None);
    };
    let sweep = residual_sweep(func, x, cfg.p, &cfg.eps)?;
    if sweep[0].residual <= 1e-12 {
        return Ok(Some(CheckOutcome {
            name: "residual",
            passed: sweep.iter().all(|r| r.residual <= 1e-12),
            detail: format!(
                "exact averaging at {x}, max residual {:.3e}",
                sweep.iter().map(|r| r.residual).fold(0.0, f64::max)
            ),
        }));
    }
    let mut passed = true;
    let mut worst = f64::INFINITY;
    for w in sweep.windows(2) {
        let ratio = w[1].ratio.expect("ratio after first entry");
        let floor = residual_ratio_floor(w[0].epsilon, w[1].epsilon);
        worst = worst.min(ratio / floor);
        passed &= ratio >= floor;
    }
    Ok(Some(CheckOutcome {
        name: "residual",
        passed,
        detail: format!("at {x}: min ratio / floor = {worst:.3}"),
    }))
}

/// Loads `path`, runs the sweep and writes the CSV to the configured `out`.
pub fn run_experiment_file(path: &Path) -> Result<ExperimentReport> {
    let cfg = ExperimentConfig::from_map(&load_config(path)?)?;
    let report = run_experiment(&cfg)?;
    if let Some(out) = &cfg.out {
        write_records(
            BufWriter::new(File::create(out)?),
            &report.records,
            &report.summary_lines(),
        )?;
    }
    Ok(report)
}
