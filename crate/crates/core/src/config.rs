//! Flat `key = value` experiment configuration.
//!
//! Keys mirror the CLI flags without the leading dashes. Blank lines and
//! lines starting with `#` are ignored; unknown or repeated keys are errors.
//!
//! ```text
//! fn = radial
//! p = 3
//! n = 2
//! regime = rate
//! a-prime = 0.2
//! eps = 0.1, 0.05, 0.025
//! samples = 20000
//! seed = 7
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::measures::{Regime, RegimeConfig, GRAD_ZERO_TOL};

pub const KEYS: &[&str] = &[
    "fn", "p", "n", "eps", "eta", "a-prime", "regime", "samples", "seed", "workers", "out", "x0", "h",
];

pub type ConfigMap = BTreeMap<String, String>;

pub fn parse_config_text(text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    Ok(map)
}

pub fn load_config(path: &Path) -> Result<ConfigMap> {
    parse_config_text(&std::fs::read_to_string(path)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegimeName {
    Eta,
    Rate,
    ZeroSet,
}

impl RegimeName {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "eta" => Ok(RegimeName::Eta),
            "rate" => Ok(RegimeName::Rate),
            "zeroset" => Ok(RegimeName::ZeroSet),
            _ => Err(Error::Config(format!(
                "unknown regime `{s}` (expected eta, rate, zeroset)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeName::Eta => "eta",
            RegimeName::Rate => "rate",
            RegimeName::ZeroSet => "zeroset",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub fn_id: String,
    pub p: f64,
    pub n: usize,
    /// Strictly decreasing step sizes.
    pub eps: Vec<f64>,
    pub regime: RegimeName,
    pub eta: f64,
    pub a_prime: f64,
    pub samples: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    /// Single start point; `None` means the lattice grid.
    pub x0: Option<Vec<f64>>,
    /// Diffusion time step.
    pub h: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            fn_id: "linear".into(),
            p: 3.0,
            n: 2,
            eps: vec![0.1, 0.05, 0.025],
            regime: RegimeName::Eta,
            eta: 0.1,
            a_prime: 0.2,
            samples: 10_000,
            seed: 0,
            workers: None,
            out: None,
            x0: None,
            h: 1e-4,
        }
    }
}

fn parse_num<V: std::str::FromStr>(key: &str, v: &str) -> Result<V> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
}

/// Comma- or semicolon-separated reals.
pub fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let items: Vec<&str> = v.split([',', ';']).map(str::trim).filter(|s| !s.is_empty()).collect();
    items.iter().map(|s| parse_num(key, s)).collect()
}

impl ExperimentConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }
        let mut cfg = Self::default();
        let get = |k: &str| map.get(k).map(String::as_str);
        if let Some(v) = get("fn") {
            cfg.fn_id = v.to_string();
        }
        cfg.p = match get("p") {
            Some(v) => parse_num("p", v)?,
            None if cfg.fn_id == "saddle" || cfg.fn_id.starts_with("hpow:") => 2.0,
            None => 3.0,
        };
        if let Some(v) = get("n") {
            cfg.n = parse_num("n", v)?;
        }
        if let Some(v) = get("eps") {
            cfg.eps = parse_list("eps", v)?;
        }
        if let Some(v) = get("regime") {
            cfg.regime = RegimeName::parse(v)?;
        }
        if let Some(v) = get("eta") {
            cfg.eta = parse_num("eta", v)?;
        }
        if let Some(v) = get("a-prime") {
            cfg.a_prime = parse_num("a-prime", v)?;
        }
        if let Some(v) = get("samples") {
            cfg.samples = parse_num("samples", v)?;
        }
        if let Some(v) = get("seed") {
            cfg.seed = parse_num("seed", v)?;
        }
        if let Some(v) = get("workers") {
            cfg.workers = Some(parse_num("workers", v)?);
        }
        if let Some(v) = get("out") {
            cfg.out = Some(PathBuf::from(v));
        }
        if let Some(v) = get("x0") {
            cfg.x0 = Some(parse_list("x0", v)?);
        }
        if let Some(v) = get("h") {
            cfg.h = parse_num("h", v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_map(&parse_config_text(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        crate::analysis::check_decreasing(&self.eps)?;
        if self.eps.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::Config("epsilon values must be positive".into()));
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != self.n {
                return Err(Error::Config(format!(
                    "x0 has {} coordinates but n = {}",
                    x0.len(),
                    self.n
                )));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn regime(&self) -> Regime<f64> {
        match self.regime {
            RegimeName::Eta => Regime::EtaCut { eta: self.eta },
            RegimeName::Rate => Regime::RateCut { a_prime: self.a_prime },
            RegimeName::ZeroSet => Regime::ZeroSetUniform {
                grad_zero_tol: GRAD_ZERO_TOL,
            },
        }
    }

    pub fn regime_config(&self, eps: f64) -> Result<RegimeConfig<f64>> {
        RegimeConfig::new(self.regime(), eps, self.p, self.n)
    }

    /// Allowed `|u_eps - u|` at step `eps` beyond sampling noise: `1.5 η`
    /// (eta), `1.5 eps^a'` (rate), and `0.05` on the zero-set regime.
    pub fn error_budget(&self, eps: f64) -> f64 {
        match self.regime {
            RegimeName::Eta => 1.5 * self.eta,
            RegimeName::Rate => 1.5 * eps.powf(self.a_prime),
            RegimeName::ZeroSet => 0.05,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let text = "# sweep\nfn = radial\np = 3\nn = 2\nregime = rate\na-prime = 0.2\neps = 0.1, 0.05, 0.025\nsamples = 20000\nseed = 7\n";
        let cfg = ExperimentConfig::from_text(text).unwrap();
        assert_eq!(cfg.fn_id, "radial");
        assert_eq!(cfg.regime, RegimeName::Rate);
        assert_eq!(cfg.eps, vec![0.1, 0.05, 0.025]);
        assert_eq!((cfg.samples, cfg.seed), (20000, 7));
        assert_eq!(cfg.regime(), Regime::RateCut { a_prime: 0.2 });
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_config_text("colour = red"), Err(Error::Config(_))));
        assert!(parse_config_text("p = 2\np = 3").is_err());
        assert!(parse_config_text("just words").is_err());
        assert!(ExperimentConfig::from_text("eps =").is_err());
        assert!(ExperimentConfig::from_text("eps = 0.05, 0.1").is_err());
        assert!(ExperimentConfig::from_text("regime = fancy").is_err());
        assert!(ExperimentConfig::from_text("p = three").is_err());
        assert!(ExperimentConfig::from_text("x0 = 0.1").is_err());
    }

    #[test]
    fn default_exponent_follows_function() {
        assert_eq!(ExperimentConfig::from_text("fn = saddle").unwrap().p, 2.0);
        assert_eq!(ExperimentConfig::from_text("fn = hpow:3").unwrap().p, 2.0);
        assert_eq!(ExperimentConfig::from_text("fn = radial").unwrap().p, 3.0);
    }
}
