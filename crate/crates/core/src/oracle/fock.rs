//! Density matrices of Gaussian states in a truncated Fock basis and the
//! Uhlmann fidelity computed from them.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::gaussian::CovarianceMatrix;

/// Fock states `|m₁, …, m_N⟩` with `Σ m_i ≤ cutoff`, in a fixed order.
fn basis(n_modes: usize, cutoff: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, modes_left: usize, budget: usize, out: &mut Vec<Vec<usize>>) {
        if modes_left == 0 {
            out.push(prefix.clone());
            return;
        }
        for m in 0..=budget {
            prefix.push(m);
            rec(prefix, modes_left - 1, budget - m, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n_modes, cutoff, &mut out);
    out
}

/// `ρ` of a zero-mean Gaussian state on all Fock states with at most
/// `cutoff` photons in total.
///
/// Matrix elements come from the multidimensional Hermite recursion
/// `G_{k+e_i} = Σ_j A_ij k_j G_{k−e_j}` with `A = X(I − Q⁻¹)`, where `Q` is
/// the Husimi covariance in the `(a, a†)` basis. The recursion is run on
/// `g_k = G_k/√(k!)` to keep magnitudes O(1).
pub fn fock_density_matrix(sigma: &CovarianceMatrix, cutoff: usize) -> Result<DMatrix<Complex64>> {
    let n = sigma.n_modes();
    let dim = 2 * n;
    let i = Complex64::i();
    let s = 1.0 / 2f64.sqrt();
    // ξ = (a₁..a_N, a₁†..a_N†) with a_k = (x_k + i p_k)/√2; σ is in xpxp order.
    let mut w = DMatrix::<Complex64>::zeros(dim, dim);
    for k in 0..n {
        w[(k, 2 * k)] = Complex64::new(s, 0.0);
        w[(k, 2 * k + 1)] = i * s;
        w[(n + k, 2 * k)] = Complex64::new(s, 0.0);
        w[(n + k, 2 * k + 1)] = -i * s;
    }
    let sig = sigma.matrix().map(|v| Complex64::new(v, 0.0));
    let q = &w * sig * w.adjoint() + DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(0.5, 0.0);
    let q_lu = q.clone().lu();
    let det_q = q_lu.determinant();
    if !(det_q.re > 0.0) {
        return Err(Error::Numerical(format!("Husimi covariance is not positive (det {det_q})")));
    }
    let q_inv = q_lu.try_inverse().ok_or_else(|| Error::Numerical("Husimi covariance is singular".into()))?;
    let mut x = DMatrix::<Complex64>::zeros(dim, dim);
    for k in 0..n {
        x[(k, n + k)] = Complex64::new(1.0, 0.0);
        x[(n + k, k)] = Complex64::new(1.0, 0.0);
    }
    let a = x * (DMatrix::<Complex64>::identity(dim, dim) - q_inv);

    // Dense table over index vectors k ∈ [0, cutoff]^{2N}.
    let side = cutoff + 1;
    let len = side.pow(dim as u32);
    let stride: Vec<usize> = (0..dim).map(|d| side.pow((dim - 1 - d) as u32)).collect();
    let mut g = vec![Complex64::new(0.0, 0.0); len];
    g[0] = Complex64::new(1.0, 0.0);
    let mut idx = vec![0usize; dim];
    for flat in 1..len {
        let mut rem = flat;
        for d in 0..dim {
            idx[d] = rem / stride[d];
            rem %= stride[d];
        }
        // Only ket and bra halves that stay within the photon budget are needed.
        if idx[..n].iter().sum::<usize>() > cutoff || idx[n..].iter().sum::<usize>() > cutoff {
            continue;
        }
        let p = idx.iter().position(|&v| v > 0).expect("flat > 0");
        let prev = flat - stride[p];
        let mut kp = idx.clone();
        kp[p] -= 1;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..dim {
            if kp[j] > 0 {
                acc += a[(p, j)] * (kp[j] as f64).sqrt() * g[prev - stride[j]];
            }
        }
        g[flat] = acc / ((kp[p] + 1) as f64).sqrt();
    }

    let states = basis(n, cutoff);
    let norm = det_q.sqrt();
    let d = states.len();
    let mut rho = DMatrix::<Complex64>::zeros(d, d);
    for (r, m) in states.iter().enumerate() {
        for (c, k) in states.iter().enumerate() {
            let flat: usize = m.iter().chain(k.iter()).zip(&stride).map(|(v, st)| v * st).sum();
            rho[(r, c)] = g[flat] / norm;
        }
    }
    Ok(rho)
}

#[derive(Clone, Copy, Debug)]
pub struct FockFidelity {
    pub fidelity: f64,
    /// Traces of the two truncated density matrices.
    pub trace_a: f64,
    pub trace_b: f64,
}

fn hermitian_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let roots = eig.eigenvalues.map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Squared Uhlmann fidelity `(Tr √(√ρ_a ρ_b √ρ_a))²` in a truncated Fock space.
pub fn fock_fidelity(a: &CovarianceMatrix, b: &CovarianceMatrix, cutoff: usize) -> Result<FockFidelity> {
    if a.dim() != b.dim() {
        return Err(invalid("dimension mismatch"));
    }
    let ra = fock_density_matrix(a, cutoff)?;
    let rb = fock_density_matrix(b, cutoff)?;
    let sa = hermitian_sqrt(&ra);
    let m = &sa * &rb * &sa;
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(m);
    let tr: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok(FockFidelity {
        fidelity: tr * tr,
        trace_a: ra.trace().re,
        trace_b: rb.trace().re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn thermal1(n: f64) -> CovarianceMatrix {
        CovarianceMatrix::new(DMatrix::identity(2, 2) * (n + 0.5)).unwrap()
    }

    #[test]
    fn thermal_populations() {
        let n = 0.7;
        let rho = fock_density_matrix(&thermal1(n), 30).unwrap();
        for k in 0..10 {
            let expected = n.powi(k as i32) / (n + 1.0).powi(k as i32 + 1);
            assert_abs_diff_eq!(rho[(k, k)].re, expected, epsilon = 1e-14);
            assert_abs_diff_eq!(rho[(k, k + 1)].norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn squeezed_vacuum_amplitudes() {
        // |r⟩ = (cosh r)^{-1/2} Σ_k (−tanh r)^k √((2k)!)/(2^k k!) |2k⟩ for x-squeezing.
        let r: f64 = 0.4;
        let sigma = CovarianceMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            0.5 * (-2.0 * r).exp(),
            0.5 * (2.0 * r).exp(),
        ])))
        .unwrap();
        let rho = fock_density_matrix(&sigma, 20).unwrap();
        let amp = |k: usize| {
            let mut c = 1.0 / r.cosh().sqrt() * (-r.tanh()).powi(k as i32);
            for j in 1..=k {
                c *= ((2 * j - 1) as f64 * (2 * j) as f64).sqrt() / (2.0 * j as f64);
            }
            c
        };
        for k in 0..5 {
            for l in 0..5 {
                assert_abs_diff_eq!(rho[(2 * k, 2 * l)].re, amp(k) * amp(l), epsilon = 1e-13);
                assert_abs_diff_eq!(rho[(2 * k, 2 * l)].im, 0.0, epsilon = 1e-13);
            }
            assert_abs_diff_eq!(rho[(2 * k, 2 * k + 1)].norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn thermal_fidelity_matches_closed_form() {
        let f = fock_fidelity(&thermal1(0.3), &thermal1(0.8), 60).unwrap();
        assert_abs_diff_eq!(f.fidelity, super::super::thermal_fidelity(0.3, 0.8), epsilon = 1e-9);
    }

    #[test]
    fn basis_size() {
        assert_eq!(basis(2, 3).len(), 10);
        assert_eq!(basis(1, 5).len(), 6);
    }
}
