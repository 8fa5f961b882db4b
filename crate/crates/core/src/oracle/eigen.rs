//! Steady-state covariance through the modal expansion
//! `σ = V [ (V⁻¹ D V⁻ᵀ)_ij / −(λ_i + λ_j) ] Vᵀ`, with eigenvectors found by
//! complex inverse iteration. Requires distinct, well separated eigenvalues.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn lyapunov_by_eigendecomposition(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let lambdas: Vec<Complex64> = a.complex_eigenvalues().iter().copied().collect();
    let ac = a.map(|v| Complex64::new(v, 0.0));
    let scale = a.amax();
    let mut v = DMatrix::<Complex64>::zeros(n, n);
    for (col, &lam) in lambdas.iter().enumerate() {
        // A tiny shift keeps the iteration matrix invertible.
        let shifted = &ac - DMatrix::identity(n, n) * (lam + Complex64::new(1e-10 * scale, 1e-10 * scale));
        let lu = shifted.lu();
        let mut x = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * i as f64, 0.3 - 0.05 * i as f64));
        for _ in 0..3 {
            x = lu.solve(&x).ok_or_else(|| Error::Numerical("inverse iteration failed".into()))?;
            let norm = x.norm();
            x /= Complex64::new(norm, 0.0);
        }
        v.set_column(col, &x);
    }
    let v_inv = v
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("eigenvector matrix is singular".into()))?;
    let dc = d.map(|x| Complex64::new(x, 0.0));
    let mut m = &v_inv * dc * v_inv.transpose();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] /= -(lambdas[i] + lambdas[j]);
        }
    }
    let sigma = &v * m * v.transpose();
    let out = sigma.map(|z| z.re);
    Ok(0.5 * (&out + out.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn damped_oscillator() {
        let (w, g, dd) = (3.0, 0.5, 2.0);
        let a = DMatrix::from_row_slice(2, 2, &[0.0, w, -w, -g]);
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, dd]);
        let s = lyapunov_by_eigendecomposition(&a, &d).unwrap();
        assert_relative_eq!(s[(0, 0)], dd / (2.0 * g), max_relative = 1e-10);
        assert_relative_eq!(s[(1, 1)], dd / (2.0 * g), max_relative = 1e-10);
        assert!(s[(0, 1)].abs() < 1e-10);
    }
}
