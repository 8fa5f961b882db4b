//! Independent reference computations. None of these share code paths with
//! the production solvers they check; they are slow and only used by tests
//! and the `validate` subcommand.

mod csl_mc;
mod eigen;
mod fock;
mod rk4;

pub use csl_mc::{csl_delta_real_space, McEstimate};
pub use eigen::lyapunov_by_eigendecomposition;
pub use fock::{fock_density_matrix, fock_fidelity, FockFidelity};
pub use rk4::rk4_covariance;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::gaussian::{matrix_exponential, symplectic_form, CovarianceMatrix};

/// Closed-form fidelity of two single-mode thermal states.
pub fn thermal_fidelity(n: f64, m: f64) -> f64 {
    1.0 / (((n + 1.0) * (m + 1.0)).sqrt() - (n * m).sqrt()).powi(2)
}

/// Random mixed Gaussian state `S diag(ν) Sᵀ`: symplectic eigenvalues drawn
/// from `[1/2, 1/2 + nu_spread]`, `S = exp(ε·ΩH)` with `H` a random symmetric
/// Gaussian matrix.
pub fn random_gaussian_state(n_modes: usize, eps: f64, nu_spread: f64, seed: u64) -> CovarianceMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dim = 2 * n_modes;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let v: f64 = StandardNormal.sample(&mut rng);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let omega = symplectic_form(n_modes).expect("n_modes ≥ 1").matrix().clone();
    let s = matrix_exponential(&(omega * h), eps).expect("finite generator");
    let nu = Uniform::new_inclusive(0.5, 0.5 + nu_spread).expect("valid range");
    let mut diag = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..n_modes {
        let v = nu.sample(&mut rng);
        diag[(2 * k, 2 * k)] = v;
        diag[(2 * k + 1, 2 * k + 1)] = v;
    }
    let sigma = &s * diag * s.transpose();
    CovarianceMatrix::new(0.5 * (&sigma + sigma.transpose())).expect("symmetric by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::check_physicality;

    #[test]
    fn random_states_are_physical() {
        for seed in 0..20 {
            let s = random_gaussian_state(2, 0.3, 0.2, seed);
            assert!(check_physicality(&s).unwrap().physical);
        }
    }

    #[test]
    fn random_states_are_reproducible() {
        let a = random_gaussian_state(2, 0.3, 0.2, 9);
        let b = random_gaussian_state(2, 0.3, 0.2, 9);
        assert_eq!(a, b);
    }

    #[test]
    fn thermal_fidelity_vacuum_overlap() {
        assert_eq!(thermal_fidelity(0.0, 3.0), 0.25);
        assert_eq!(thermal_fidelity(2.0, 2.0), 1.0);
    }
}
