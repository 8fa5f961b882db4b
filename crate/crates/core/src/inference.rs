//! χ² variance test, its error probabilities, and the fidelity-based bound
//! on what any classical probe could achieve.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gaussian::{check_physicality, symplectic_form, CovarianceMatrix};
use crate::model::QuadratureSelector;
use crate::special::{chi2_quantile, regularized_gamma_upper};

/// One variance test: `N` outcomes of a single quadrature, H₀ variance `V₀`
/// against the inflated H₁ variance `V₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub n: u32,
    pub significance: f64,
    pub selector: QuadratureSelector,
    pub v0: f64,
    pub v1: f64,
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid(format!("sample size must be ≥ 2, got {}", self.n)));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(invalid(format!("significance must lie in (0, 1), got {}", self.significance)));
        }
        for (name, v) in [("V0", self.v0), ("V1", self.v1)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn dof(&self) -> u32 {
        self.n - 1
    }

    /// Rejection threshold `Q^{N−1}_{1−α}`.
    pub fn threshold(&self) -> Result<f64> {
        self.validate()?;
        chi2_quantile(1.0 - self.significance, self.dof())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    AcceptH0,
    RejectH0,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HypothesisOutcome {
    pub decision: Decision,
    pub t_star: f64,
    pub quantile: f64,
}

/// Statistic `T = (N−1)s²/V₀` for a set of outcomes.
pub fn test_statistic(samples: &[f64], v0: f64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(invalid("need at least two outcomes"));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|x| (x - mean).powi(2)).sum();
    Ok(ss / v0)
}

/// Upper-tail decision: reject H₀ when `t* > Q^{N−1}_{1−α}`.
pub fn decide(t_star: f64, cfg: &TestConfig) -> Result<HypothesisOutcome> {
    let quantile = cfg.threshold()?;
    Ok(decide_with_threshold(t_star, quantile))
}

pub fn decide_with_threshold(t_star: f64, quantile: f64) -> HypothesisOutcome {
    let decision = if t_star > quantile { Decision::RejectH0 } else { Decision::AcceptH0 };
    HypothesisOutcome { decision, t_star, quantile }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorProbability {
    /// `P(reject H₀ | H₀)`.
    pub type_i: f64,
    /// `P(accept H₀ | H₁)`.
    pub type_ii: f64,
    /// Mean of the two under equal priors.
    pub p_err: f64,
}

/// Analytic error rates of the χ² test for `cfg`.
pub fn error_probability(cfg: &TestConfig) -> Result<ErrorProbability> {
    let q = cfg.threshold()?;
    let a = 0.5 * f64::from(cfg.dof());
    let type_i = regularized_gamma_upper(a, 0.5 * q)?;
    let type_ii = 1.0 - regularized_gamma_upper(a, 0.5 * q * cfg.v0 / cfg.v1)?;
    Ok(ErrorProbability { type_i, type_ii, p_err: 0.5 * (type_i + type_ii) })
}

/// Squared Uhlmann fidelity of two zero-mean Gaussian states (vacuum = I/2).
pub fn gaussian_fidelity(a: &CovarianceMatrix, b: &CovarianceMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(invalid(format!("dimension mismatch: {} vs {}", a.dim(), b.dim())));
    }
    for (label, s) in [("first", a), ("second", b)] {
        let check = check_physicality(s)?;
        if !check.physical {
            return Err(invalid(format!(
                "{label} state is unphysical (min eigenvalue {:e})",
                check.min_eigenvalue
            )));
        }
    }
    if a.matrix() == b.matrix() {
        return Ok(1.0);
    }
    fidelity_kernel(a, b)
}

/// The fidelity formula itself, without input checks or the identical-input
/// shortcut.
pub(crate) fn fidelity_kernel(a: &CovarianceMatrix, b: &CovarianceMatrix) -> Result<f64> {
    let dim = a.dim();
    let omega = symplectic_form(a.n_modes())?.matrix().clone();
    let (sa, sb) = (a.matrix(), b.matrix());
    let vs = sa + sb;
    let lu = vs.clone().lu();
    let det = lu.determinant();
    if !(det > 0.0) {
        return Err(Error::Numerical(format!("σ_a + σ_b is not positive definite (det {det:e})")));
    }
    let inner = &omega / 4.0 + sb * &omega * sa;
    let vs_inv_inner = lu
        .solve(&inner)
        .ok_or_else(|| Error::Numerical("σ_a + σ_b is singular".into()))?;
    let v_aux = omega.transpose() * vs_inv_inner;
    let x = &v_aux * &omega;
    // Y = −4X² − I is positive semidefinite; forming it directly keeps
    // pure-state pairs (Y → 0) free of cancellation in the square root.
    let y = &x * &x * -4.0 - DMatrix::<f64>::identity(dim, dim);
    let mut log_f = -0.5 * det.ln();
    for ev in y.complex_eigenvalues().iter() {
        let yj: f64 = ev.re.max(0.0);
        let nu = (1.0 + yj).sqrt() / 2.0;
        log_f += 0.5 * (2.0 * nu + yj.sqrt()).ln();
    }
    let f = log_f.exp();
    if !f.is_finite() {
        return Err(Error::Numerical("fidelity evaluation produced a non-finite value".into()));
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Lower bound `(1 − √(1 − F^N))/2` on the error of any classical probe.
pub fn classical_bound(fidelity: f64, n: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(invalid(format!("fidelity must lie in [0, 1], got {fidelity}")));
    }
    if n < 1 {
        return Err(invalid("sample count must be ≥ 1"));
    }
    let fn_ = fidelity.powi(n as i32);
    // 1 − √(1 − x) = x / (1 + √(1 − x)) avoids cancellation for small x.
    Ok(fn_ / (2.0 * (1.0 + (1.0 - fn_).sqrt())))
}

/// Relative gap `100(C − P)/(C + P)` in percent; positive means advantage.
pub fn quantum_advantage(bound: f64, p_err: f64) -> Result<f64> {
    let sum = bound + p_err;
    if !(sum > 0.0) {
        return Err(invalid(format!("advantage undefined for C = {bound}, P_err = {p_err}")));
    }
    Ok(100.0 * (bound - p_err) / sum)
}
