//! Sampled χ² tests that check the analytic error rates.
//!
//! Every trial draws from its own ChaCha20 stream (`stream = 2·trial + arm`,
//! arm 0 for H₀ data and 1 for H₁ data) seeded with the run seed, so results
//! do not depend on how trials are spread over threads. Normal deviates use
//! the ziggurat method.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::inference::{error_probability, test_statistic, ErrorProbability, TestConfig};

pub const PRNG_NAME: &str = "ChaCha20 (rand_chacha 0.9), per-trial streams, ziggurat normals (rand_distr 0.5)";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McRun {
    pub trials: u64,
    pub seed: u64,
    pub cfg: TestConfig,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` zero-mean normal outcomes of variance `v` from stream `stream`.
pub fn sample_outcomes(v: f64, n: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid(format!("variance must be finite and > 0, got {v}")));
    }
    let sd = v.sqrt();
    let mut rng = stream_rng(seed, stream);
    Ok((0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalRates {
    pub type_i: f64,
    pub type_ii: f64,
    pub p_err: f64,
    pub type_i_se: f64,
    pub type_ii_se: f64,
    pub p_err_se: f64,
}

impl EmpiricalRates {
    /// Largest deviation from the analytic rates, in binomial standard errors
    /// evaluated at the analytic probabilities.
    pub fn max_sigma_deviation(&self, exact: &ErrorProbability, trials: u64) -> f64 {
        let n = trials as f64;
        let se = |p: f64| (p * (1.0 - p) / n).sqrt().max(f64::MIN_POSITIVE);
        let s1 = se(exact.type_i);
        let s2 = se(exact.type_ii);
        let sp = 0.5 * (s1 * s1 + s2 * s2).sqrt();
        [
            (self.type_i - exact.type_i).abs() / s1,
            (self.type_ii - exact.type_ii).abs() / s2,
            (self.p_err - exact.p_err).abs() / sp,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Runs `trials` tests with H₀ data (variance `V₀`) and `trials` with H₁ data
/// (variance `V₁`) and counts wrong decisions.
pub fn empirical_error_rates(run: &McRun) -> Result<EmpiricalRates> {
    if run.trials < 1 {
        return Err(invalid("need at least one trial"));
    }
    let cfg = run.cfg;
    let threshold = cfg.threshold()?;
    let n = cfg.n as usize;
    let (false_reject, false_accept) = (0..run.trials)
        .into_par_iter()
        .map(|trial| -> Result<(u64, u64)> {
            let h0 = sample_outcomes(cfg.v0, n, run.seed, 2 * trial)?;
            let h1 = sample_outcomes(cfg.v1, n, run.seed, 2 * trial + 1)?;
            let reject0 = test_statistic(&h0, cfg.v0)? > threshold;
            let reject1 = test_statistic(&h1, cfg.v0)? > threshold;
            Ok((u64::from(reject0), u64::from(!reject1)))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let t = run.trials as f64;
    let type_i = false_reject as f64 / t;
    let type_ii = false_accept as f64 / t;
    let se = |p: f64| (p * (1.0 - p) / t).sqrt();
    Ok(EmpiricalRates {
        type_i,
        type_ii,
        p_err: 0.5 * (type_i + type_ii),
        type_i_se: se(type_i),
        type_ii_se: se(type_ii),
        p_err_se: 0.5 * (se(type_i).powi(2) + se(type_ii).powi(2)).sqrt(),
    })
}

/// Empirical rates next to the analytic ones for the same configuration.
pub fn calibrate(run: &McRun) -> Result<(EmpiricalRates, ErrorProbability)> {
    Ok((empirical_error_rates(run)?, error_probability(&run.cfg)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QuadratureSelector;

    fn cfg(n: u32, alpha: f64, ratio: f64) -> TestConfig {
        TestConfig { n, significance: alpha, selector: QuadratureSelector::QPlus, v0: 1.0, v1: ratio }
    }

    #[test]
    fn sample_moments() {
        let xs = sample_outcomes(2.0, 1_000_000, 42, 0).unwrap();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4.0 * (2.0 / n).sqrt());
        assert!((var - 2.0).abs() < 0.012, "{var}");
        let unit = sample_outcomes(1.0, 1_000_000, 7, 3).unwrap();
        assert!((unit.iter().sum::<f64>() / n).abs() < 4e-3);
    }

    #[test]
    fn deterministic_under_seed() {
        assert_eq!(sample_outcomes(1.0, 100, 5, 9).unwrap(), sample_outcomes(1.0, 100, 5, 9).unwrap());
        assert_ne!(sample_outcomes(1.0, 100, 5, 9).unwrap(), sample_outcomes(1.0, 100, 5, 10).unwrap());
        assert!(sample_outcomes(0.0, 10, 1, 1).is_err());
    }

    #[test]
    fn independent_of_thread_count() {
        let run = McRun { trials: 2000, seed: 11, cfg: cfg(10, 0.05, 2.0) };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| empirical_error_rates(&run).unwrap());
        let b = four.install(|| empirical_error_rates(&run).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn smallest_sample_size() {
        let run = McRun { trials: 20_000, seed: 3, cfg: cfg(2, 0.05, 3.0) };
        let (emp, exact) = calibrate(&run).unwrap();
        assert!(emp.max_sigma_deviation(&exact, run.trials) < 4.0);
    }

    #[test]
    fn type_one_calibration() {
        let run = McRun { trials: 100_000, seed: 1, cfg: cfg(100, 0.05, 1.0) };
        let (emp, exact) = calibrate(&run).unwrap();
        assert!(emp.max_sigma_deviation(&exact, run.trials) < 4.0);
    }
}
