//! Parallel Monte Carlo driver shared by the walk and diffusion engines.
//!
//! Path `i` always draws from ChaCha stream `i` of the generator keyed by
//! the seed, and per-path results are reduced in index order. The estimate
//! therefore depends on `(seed, n_samples)` only; the worker count changes
//! scheduling but not a single bit of the output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};

pub const MIN_SAMPLES: usize = 100;

/// Sample count, seed, and worker count of one Monte Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub n_samples: usize,
    pub seed: u64,
    /// `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl Sampling {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers.max(1));
        self
    }

    /// Same settings with a seed derived from `(seed, index)`.
    pub fn derive(&self, index: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d))),
            ..*self
        }
    }
}

/// Monte Carlo mean of `u` at the exit points.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateResult<T> {
    pub mean: T,
    /// Sample standard deviation over `sqrt(n_samples)`.
    pub stderr: T,
    pub n_samples: usize,
    pub mean_steps: T,
    pub seed: u64,
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random stream of path `index` under `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `n_samples` independent paths. `path` returns the payoff and step
/// count of one path.
pub(crate) fn estimate<T, F>(sampling: &Sampling, path: F) -> Result<EstimateResult<T>>
where
    T: Real,
    F: Fn(&mut ChaCha8Rng) -> Result<(T, u64)> + Sync,
{
    if sampling.n_samples < MIN_SAMPLES {
        return Err(Error::Parameter(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            sampling.n_samples
        )));
    }
    let seed = sampling.seed;
    let run = || -> Vec<Result<(T, u64)>> {
        (0..sampling.n_samples as u64)
            .into_par_iter()
            .map(|i| path(&mut path_rng(seed, i)))
            .collect()
    };
    let outcomes = match sampling.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Parameter(format!("cannot build worker pool: {e}")))?
            .install(run),
        None => run(),
    };

    let total = outcomes.len();
    let mut values = Vec::with_capacity(total);
    let mut steps = Vec::with_capacity(total);
    let mut capped = (0usize, 0u64);
    let mut escaped = (0usize, 0.0f64);
    for outcome in outcomes {
        match outcome {
            Ok((v, s)) => {
                values.push(v);
                steps.push(T::from_u64(s).unwrap());
            }
            Err(Error::Nontermination { cap, .. }) => capped = (capped.0 + 1, cap),
            Err(Error::DomainEscape { radius, .. }) => escaped = (escaped.0 + 1, radius),
            Err(e) => return Err(e),
        }
    }
    if capped.0 > 0 {
        return Err(Error::Nontermination {
            failed: capped.0,
            total,
            cap: capped.1,
        });
    }
    if escaped.0 > 0 {
        return Err(Error::DomainEscape {
            failed: escaped.0,
            total,
            radius: escaped.1,
        });
    }
    Ok(summarize(&values, &steps, seed))
}

pub(crate) fn summarize<T: Real>(values: &[T], steps: &[T], seed: u64) -> EstimateResult<T> {
    let n = T::from_usize(values.len()).unwrap();
    let mean = pairwise_sum(values) / n;
    let sq: Vec<T> = values.iter().map(|&v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - T::one());
    EstimateResult {
        mean,
        stderr: (var / n).sqrt(),
        n_samples: values.len(),
        mean_steps: pairwise_sum(steps) / n,
        seed,
    }
}
