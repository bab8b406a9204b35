use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gradwalk::catalog::catalog_entries;
use gradwalk::config::{load_config, ConfigMap, ExperimentConfig};
use gradwalk::experiment::{residual_ratio_floor, run_experiment};
use gradwalk::report::{fmt_f64, write_records};
use gradwalk::{
    drift_suite, estimate_value, estimate_value_ct, residual_sweep, DiffusionConfig, Point, Result, Sampling,
    TestFunction,
};

#[derive(Parser)]
#[command(
    name = "gradwalk",
    version,
    about = "Gradient walk and diffusion Monte Carlo for p-harmonic functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the catalog functions.
    Catalog,
    /// Estimate u_eps at one point with the gradient walk.
    Value(Flags),
    /// Sweep eps over a grid (or x0) and fit the convergence rate.
    Sweep(Flags),
    /// Randomized check of the drift inequality.
    DriftCheck(Flags),
    /// Decay order of the one-step averaging residual.
    ResidualCheck(Flags),
    /// Estimate v(x0) with the Euler-Maruyama diffusion.
    Diffusion(Flags),
}

/// Every flag doubles as a config-file key; flags override the file.
#[derive(Args, Clone, Debug, Default)]
struct Flags {
    /// Catalog id: linear, radial, saddle, hpow:k
    #[arg(long = "fn")]
    func: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated, strictly decreasing step sizes
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long = "a-prime")]
    a_prime: Option<f64>,
    /// eta, rate or zeroset
    #[arg(long)]
    regime: Option<String>,
    /// Walks / paths per point (draws per dimension for drift-check)
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// CSV output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated start point
    #[arg(long)]
    x0: Option<String>,
    /// Diffusion time step
    #[arg(long)]
    h: Option<f64>,
    /// Flat key = value config file
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut map = match &self.config {
            Some(path) => load_config(path)?,
            None => ConfigMap::new(),
        };
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                map.insert(k.to_string(), v);
            }
        };
        set("fn", self.func.clone());
        set("p", self.p.map(|v| v.to_string()));
        set("n", self.n.map(|v| v.to_string()));
        set("eps", self.eps.clone());
        set("eta", self.eta.map(|v| v.to_string()));
        set("a-prime", self.a_prime.map(|v| v.to_string()));
        set("regime", self.regime.clone());
        set("samples", self.samples.map(|v| v.to_string()));
        set("seed", self.seed.map(|v| v.to_string()));
        set("workers", self.workers.map(|v| v.to_string()));
        set("out", self.out.as_ref().map(|v| v.display().to_string()));
        set("x0", self.x0.clone());
        set("h", self.h.map(|v| v.to_string()));
        ExperimentConfig::from_map(&map)
    }
}

fn start_point(cfg: &ExperimentConfig) -> Point<f64> {
    cfg.x0.as_deref().map_or_else(|| Point::zeros(cfg.n), Point::from_f64)
}

fn sampling(cfg: &ExperimentConfig) -> Sampling {
    let s = Sampling::new(cfg.samples, cfg.seed);
    match cfg.workers {
        Some(w) => s.with_workers(w),
        None => s,
    }
}

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_value(cfg: &ExperimentConfig) -> Result<bool> {
    let func = TestFunction::<f64>::from_id(&cfg.fn_id, cfg.n, cfg.p)?;
    func.check_exponent(cfg.p)?;
    let eps = cfg.eps[0];
    let x0 = start_point(cfg);
    let r = estimate_value(&func, &cfg.regime_config(eps)?, &x0, &sampling(cfg))?;
    let exact = func.eval(&x0)?;
    let err = (r.mean - exact).abs();
    let budget = if func.is_affine() { 0.0 } else { cfg.error_budget(eps) };
    println!(
        "fn={} regime={} p={} eps={} x0={} estimate={} stderr={} u={} abs_error={} mean_steps={:.1} samples={}",
        cfg.fn_id,
        cfg.regime.as_str(),
        cfg.p,
        eps,
        x0,
        fmt_f64(r.mean),
        fmt_f64(r.stderr),
        fmt_f64(exact),
        fmt_f64(err),
        r.mean_steps,
        r.n_samples
    );
    let ok = err <= budget + 3.0 * r.stderr;
    println!("{} worst_error={}", status(ok), fmt_f64(err));
    Ok(ok)
}

fn cmd_sweep(cfg: &ExperimentConfig) -> Result<bool> {
    let report = run_experiment(cfg)?;
    let summary = report.summary_lines();
    match &cfg.out {
        Some(path) => write_records(BufWriter::new(File::create(path)?), &report.records, &summary)?,
        None => write_records(io::stdout().lock(), &report.records, &summary[..summary.len() - 1])?,
    }
    if cfg.out.is_some() {
        for line in &summary[..summary.len() - 1] {
            println!("{line}");
        }
    }
    println!("{}", report.status_line());
    Ok(report.passed())
}

fn cmd_drift(cfg: &ExperimentConfig, explicit_n: bool, explicit_samples: bool) -> Result<bool> {
    let dims: Vec<usize> = if explicit_n { vec![cfg.n] } else { vec![2, 3] };
    let cases = if explicit_samples { cfg.samples } else { 1000 };
    let suite = drift_suite(&dims, cases, cfg.seed)?;
    if let Some(path) = &cfg.out {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        w.write_record(["x", "nu", "epsilon", "beta", "lhs", "rhs", "margin"])?;
        let join = |p: &Point<f64>| p.coords().iter().map(|&c| fmt_f64(c)).collect::<Vec<_>>().join(";");
        for r in &suite.reports {
            w.write_record([
                join(&r.x),
                join(&r.nu),
                fmt_f64(r.epsilon),
                fmt_f64(r.beta),
                fmt_f64(r.lhs),
                fmt_f64(r.rhs),
                fmt_f64(r.margin),
            ])?;
        }
        w.flush()?;
    }
    println!(
        "dims={dims:?} draws={} violations={}",
        suite.reports.len(),
        suite.violations
    );
    println!(
        "{} worst_margin={}",
        status(suite.passed()),
        fmt_f64(suite.worst_margin)
    );
    Ok(suite.passed())
}

fn cmd_residual(cfg: &ExperimentConfig, explicit_eps: bool) -> Result<bool> {
    let func = TestFunction::<f64>::from_id(&cfg.fn_id, cfg.n, cfg.p)?;
    func.check_exponent(cfg.p)?;
    let eps = if explicit_eps {
        cfg.eps.clone()
    } else {
        vec![0.1, 0.05, 0.025, 0.0125]
    };
    let x0 = start_point(cfg);
    let sweep = residual_sweep(&func, &x0, cfg.p, &eps)?;
    let mut ok = true;
    let mut worst = f64::INFINITY;
    println!("epsilon,residual,ratio,floor");
    for (i, r) in sweep.iter().enumerate() {
        match r.ratio {
            Some(ratio) => {
                let floor = residual_ratio_floor(eps[i - 1], eps[i]);
                if sweep[0].residual > 1e-12 {
                    ok &= ratio >= floor;
                    worst = worst.min(ratio);
                }
                println!(
                    "{},{},{},{}",
                    fmt_f64(r.epsilon),
                    fmt_f64(r.residual),
                    fmt_f64(ratio),
                    fmt_f64(floor)
                );
            }
            None => println!("{},{},,", fmt_f64(r.epsilon), fmt_f64(r.residual)),
        }
    }
    println!(
        "{} worst_ratio={}",
        status(ok),
        if worst.is_finite() {
            fmt_f64(worst)
        } else {
            "exact".into()
        }
    );
    Ok(ok)
}

fn cmd_diffusion(cfg: &ExperimentConfig) -> Result<bool> {
    let func = TestFunction::<f64>::from_id(&cfg.fn_id, cfg.n, cfg.p)?;
    let dcfg = DiffusionConfig::new(cfg.p, cfg.h, cfg.seed)?;
    let x0 = start_point(cfg);
    let r = estimate_value_ct(&func, &dcfg, &x0, cfg.samples, cfg.workers)?;
    let exact = func.eval(&x0)?;
    let err = (r.mean - exact).abs();
    let bias_budget = 2.0 * cfg.h.sqrt();
    println!(
        "fn={} p={} h={} x0={} estimate={} stderr={} u={} abs_error={} mean_steps={:.1} mean_exit_time={} paths={}",
        cfg.fn_id,
        cfg.p,
        cfg.h,
        x0,
        fmt_f64(r.mean),
        fmt_f64(r.stderr),
        fmt_f64(exact),
        fmt_f64(err),
        r.mean_steps,
        fmt_f64(r.mean_steps * cfg.h),
        r.n_samples
    );
    let ok = err <= bias_budget + 3.0 * r.stderr;
    println!("{} worst_error={}", status(ok), fmt_f64(err));
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Catalog => {
            for (id, desc) in catalog_entries() {
                println!("{id:<8} {desc}");
            }
            Ok(true)
        }
        Command::Value(f) => cmd_value(&f.resolve()?),
        Command::Sweep(f) => cmd_sweep(&f.resolve()?),
        Command::DriftCheck(f) => {
            let cfg = f.resolve()?;
            let from_file = f
                .config
                .as_ref()
                .map(|p| load_config(p))
                .transpose()?
                .unwrap_or_default();
            cmd_drift(
                &cfg,
                f.n.is_some() || from_file.contains_key("n"),
                f.samples.is_some() || from_file.contains_key("samples"),
            )
        }
        Command::ResidualCheck(f) => {
            let cfg = f.resolve()?;
            let from_file = f
                .config
                .as_ref()
                .map(|p| load_config(p))
                .transpose()?
                .unwrap_or_default();
            cmd_residual(&cfg, f.eps.is_some() || from_file.contains_key("eps"))
        }
        Command::Diffusion(f) => cmd_diffusion(&f.resolve()?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            ExitCode::from(2)
        }
    }
}
