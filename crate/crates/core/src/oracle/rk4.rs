use nalgebra::DMatrix;

/// Fixed-step classical Runge–Kutta integration of `σ̇ = Aσ + σAᵀ + D`.
pub fn rk4_covariance(a: &DMatrix<f64>, d: &DMatrix<f64>, sigma0: &DMatrix<f64>, t: f64, steps: usize) -> DMatrix<f64> {
    let f = |s: &DMatrix<f64>| a * s + s * a.transpose() + d;
    let h = t / steps as f64;
    let mut s = sigma0.clone();
    for _ in 0..steps {
        let k1 = f(&s);
        let k2 = f(&(&s + &k1 * (h / 2.0)));
        let k3 = f(&(&s + &k2 * (h / 2.0)));
        let k4 = f(&(&s + &k3 * h));
        s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn scalar_relaxation() {
        // σ̇ = −2λσ + d ⇒ σ(t) = d/2λ + (σ₀ − d/2λ)e^{−2λt}
        let (l, d, s0, t) = (1.5, 4.0, 0.2, 0.7);
        let out = rk4_covariance(
            &DMatrix::from_element(1, 1, -l),
            &DMatrix::from_element(1, 1, d),
            &DMatrix::from_element(1, 1, s0),
            t,
            2000,
        );
        let exact = d / (2.0 * l) + (s0 - d / (2.0 * l)) * (-2.0 * l * t).exp();
        assert_relative_eq!(out[(0, 0)], exact, max_relative = 1e-12);
    }
}
