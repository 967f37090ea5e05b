use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::events::Event;
use crate::sampler::{open_threshold, sample_with_threshold, SeedSpec};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Sample budget, seed and worker count of one Monte Carlo run. The worker
/// count only affects wall-clock time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonteCarlo {
    pub samples: u64,
    pub seed: SeedSpec,
    pub workers: usize,
}

impl MonteCarlo {
    pub fn new(samples: u64, seed: u64) -> Self {
        MonteCarlo {
            samples,
            seed: SeedSpec::new(seed),
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    /// Same budget on an independent stream.
    pub fn derive(&self, tag: &str) -> Self {
        MonteCarlo {
            seed: self.seed.derive(tag),
            ..*self
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))
    }
}

/// Integer histogram over all samples. `f` adds sample `i`'s contribution
/// into the slice; integer addition makes the result independent of how
/// samples are split across workers.
pub fn tally<F>(mc: &MonteCarlo, width: usize, f: F) -> Result<Vec<u64>>
where
    F: Fn(u64, &mut [u64]) -> Result<()> + Sync,
{
    let pool = mc.pool()?;
    pool.install(|| {
        (0..mc.samples)
            .into_par_iter()
            .try_fold(
                || vec![0u64; width],
                |mut acc, i| {
                    f(i, &mut acc)?;
                    Ok::<_, Error>(acc)
                },
            )
            .try_reduce(
                || vec![0u64; width],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    Ok(a)
                },
            )
    })
}

/// Number of samples for which `f` returns true.
pub fn count_successes<F>(mc: &MonteCarlo, f: F) -> Result<u64>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    let counts = tally(mc, 1, |i, acc| {
        acc[0] += u64::from(f(i)?);
        Ok(())
    })?;
    Ok(counts[0])
}

pub fn wilson_interval(successes: u64, samples: u64) -> (f64, f64) {
    let n = samples as f64;
    let phat = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).clamp(0.0, phat), (center + half).clamp(phat, 1.0))
}

pub fn clopper_pearson_interval(successes: u64, samples: u64) -> (f64, f64) {
    let (k, n) = (successes as f64, samples as f64);
    let low = if successes == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0)
            .map(|b| b.inverse_cdf(0.025))
            .unwrap_or(0.0)
    };
    let high = if successes == samples {
        1.0
    } else {
        Beta::new(k + 1.0, n - k)
            .map(|b| b.inverse_cdf(0.975))
            .unwrap_or(1.0)
    };
    (low, high)
}

/// A Monte Carlo probability with its Wilson 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub successes: u64,
    pub samples: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl Estimate {
    pub fn from_counts(successes: u64, samples: u64, seed: u64) -> Self {
        assert!(samples > 0 && successes <= samples);
        let (ci_low, ci_high) = wilson_interval(successes, samples);
        Estimate {
            p_hat: successes as f64 / samples as f64,
            successes,
            samples,
            ci_low,
            ci_high,
            seed,
        }
    }

    /// Exact interval, preferred when fewer than 100 successes or failures.
    pub fn clopper_pearson(&self) -> (f64, f64) {
        clopper_pearson_interval(self.successes, self.samples)
    }

    pub fn small_count(&self) -> bool {
        self.successes.min(self.samples - self.successes) < 100
    }

    /// Wilson interval, or Clopper–Pearson when counts are small.
    pub fn interval(&self) -> (f64, f64) {
        if self.small_count() {
            self.clopper_pearson()
        } else {
            (self.ci_low, self.ci_high)
        }
    }

    pub fn covers(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

/// Mean of a real per-sample quantity with a normal 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl MeanEstimate {
    /// From a histogram of integer outcomes `v` mapped through `value(v)`.
    pub fn from_histogram(hist: &[u64], value: impl Fn(usize) -> f64) -> Self {
        let samples: u64 = hist.iter().sum();
        let n = samples as f64;
        let mean = hist
            .iter()
            .enumerate()
            .map(|(v, &c)| c as f64 * value(v))
            .sum::<f64>()
            / n;
        let var = if samples > 1 {
            hist.iter()
                .enumerate()
                .map(|(v, &c)| c as f64 * (value(v) - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0)
        } else {
            0.0
        };
        let stderr = (var / n).sqrt();
        MeanEstimate {
            mean,
            stderr,
            samples,
            ci_low: mean - Z95 * stderr,
            ci_high: mean + Z95 * stderr,
        }
    }
}

/// Frequency of `event` over independent configurations of its box.
pub fn estimate_probability(event: &dyn Event, p: f64, mc: &MonteCarlo) -> Result<Estimate> {
    let threshold = open_threshold(p)?;
    let bbox = *event.bbox();
    let hits = count_successes(mc, |i| {
        event.holds(&sample_with_threshold(&bbox, threshold, &mc.seed, i))
    })?;
    Ok(Estimate::from_counts(hits, mc.samples, mc.seed.global_seed))
}
