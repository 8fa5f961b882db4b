//! Linear-algebra kernel for zero-mean Gaussian dynamics.
//!
//! Covariance matrices use the convention `σ_ij = ½⟨{r_i, r_j}⟩` with the
//! quadrature vector ordered mode by mode, `(x_1, p_1, x_2, p_2, …)`, so the
//! vacuum of every mode is `I/2` and the symplectic form is block-diagonal
//! with `[[0, 1], [-1, 0]]` blocks.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};

/// Default lower bound on the spectrum of `σ + iΩ/2`.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// A drift matrix counts as Hurwitz only if `max Re λ` is below this value.
pub const HURWITZ_THRESHOLD: f64 = -1e-12;

const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric matrix of quadrature second moments (even dimension).
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix(DMatrix<f64>);

impl CovarianceMatrix {
    /// Wraps `m` after checking it is square, even-sized and symmetric to
    /// `1e-12` relative; the stored matrix is exactly symmetrised.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(invalid(format!(
                "covariance matrix must be square, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 || m.nrows() % 2 != 0 {
            return Err(invalid(format!(
                "covariance dimension must be even and positive, got {}",
                m.nrows()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(invalid("covariance matrix has non-finite entries"));
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(invalid(format!(
                "covariance matrix not symmetric (max |σ-σᵀ| = {asym:e})"
            )));
        }
        Ok(Self(symmetrize(&m)))
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self(DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Entry with 1-based indices, matching the `σ_33`, `σ_35` notation.
    pub fn sigma(&self, i: usize, j: usize) -> f64 {
        self.0[(i - 1, j - 1)]
    }

    /// Principal sub-block on rows/columns `start..start + len` (0-based).
    pub fn block(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.dim() {
            return Err(invalid(format!(
                "block {start}..{} outside a {}-dimensional matrix",
                start + len,
                self.dim()
            )));
        }
        Self::new(self.0.view((start, start), (len, len)).into_owned())
    }
}

/// `Ω` for `n_modes` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

pub fn symplectic_form(n_modes: usize) -> Result<SymplecticForm> {
    if n_modes < 1 {
        return Err(invalid("symplectic form needs at least one mode"));
    }
    let mut matrix = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        matrix[(2 * k, 2 * k + 1)] = 1.0;
        matrix[(2 * k + 1, 2 * k)] = -1.0;
    }
    Ok(SymplecticForm { n_modes, matrix })
}

/// `e^{M t}`, computed by scaling and squaring with a Padé approximant.
pub fn matrix_exponential(m: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(invalid("matrix exponential needs a square matrix"));
    }
    if !t.is_finite() || m.iter().any(|v| !v.is_finite()) {
        return Err(invalid("matrix exponential input has non-finite entries"));
    }
    let out = (m * t).exp();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "matrix exponential overflowed".to_string(),
        ));
    }
    Ok(out)
}

/// Largest real part over the spectrum of `a`.
pub fn max_real_eigenvalue(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Returns `max Re λ(a)` or a stability error if it is not below
/// [`HURWITZ_THRESHOLD`].
pub fn ensure_hurwitz(a: &DMatrix<f64>) -> Result<f64> {
    let max_real = max_real_eigenvalue(a);
    if max_real.is_nan() || max_real >= HURWITZ_THRESHOLD {
        return Err(Error::Stability { max_real });
    }
    Ok(max_real)
}

/// Solves `Aσ + σAᵀ + D = 0` for Hurwitz `A`.
///
/// The equation is vectorised as `(I⊗A + A⊗I) vec σ = -vec D` and solved by
/// LU with two rounds of iterative refinement.
pub fn lyapunov_steady_state(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    let n = a.nrows();
    if !a.is_square() || d.shape() != (n, n) {
        return Err(invalid(format!(
            "Lyapunov shapes mismatch: A {:?}, D {:?}",
            a.shape(),
            d.shape()
        )));
    }
    ensure_hurwitz(a)?;

    let eye = DMatrix::<f64>::identity(n, n);
    let k = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = -DVector::from_column_slice(d.as_slice());
    let lu = k.clone().lu();
    let mut x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular Kronecker system".to_string()))?;
    for _ in 0..2 {
        let r = &rhs - &k * &x;
        if let Some(dx) = lu.solve(&r) {
            x += dx;
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "Lyapunov solution is not finite".to_string(),
        ));
    }
    let sigma = DMatrix::from_column_slice(n, n, x.as_slice());
    CovarianceMatrix::new(symmetrize(&sigma))
}

/// Frobenius norm of `Aσ + σAᵀ + D`.
pub fn lyapunov_residual(a: &DMatrix<f64>, sigma: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    (a * sigma + sigma * a.transpose() + d).norm()
}

/// Exact one-step map of `σ̇ = Aσ + σAᵀ + D` over a time `t`:
/// `σ(t) = Φ σ0 Φᵀ + Q` with `Φ = e^{At}` and `Q = ∫₀ᵗ e^{As} D e^{Aᵀs} ds`.
#[derive(Clone, Debug)]
pub struct Transition {
    pub phi: DMatrix<f64>,
    pub q: DMatrix<f64>,
}

impl Transition {
    pub fn apply(&self, sigma0: &DMatrix<f64>) -> DMatrix<f64> {
        symmetrize(&(&self.phi * sigma0 * self.phi.transpose() + &self.q))
    }
}

/// Builds the transition pair for time `t`.
///
/// The augmented (Van Loan) exponential of `[[-A, D], [0, Aᵀ]]` is only
/// evaluated on a sub-step `h = t / 2^s` with `‖A‖h ≤ ½`; the pair is then
/// lifted to `t` by exact doubling, `Φ₂ₕ = Φₕ²`, `Q₂ₕ = Qₕ + Φₕ Qₕ Φₕᵀ`.
/// Evaluating the augmented matrix at the full `t` would need `e^{-At}`,
/// which overflows once `t` exceeds a few hundred cavity lifetimes.
pub fn transition(a: &DMatrix<f64>, d: &DMatrix<f64>, t: f64) -> Result<Transition> {
    let n = a.nrows();
    if !a.is_square() || d.shape() != (n, n) {
        return Err(invalid("transition: A and D must be square and equal-sized"));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(invalid(format!("transition time must be finite and ≥ 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(Transition {
            phi: DMatrix::identity(n, n),
            q: DMatrix::zeros(n, n),
        });
    }
    let norm_a = one_norm(a);
    let doublings = if norm_a * t > 0.5 {
        (norm_a * t / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let h = t / 2f64.powi(doublings);

    // Q is linear in D, so D is rescaled to keep the augmented block tame.
    let norm_d = one_norm(d);
    let d_scale = if norm_d > 0.0 { 0.5 / (norm_d * h) } else { 1.0 };

    let mut aug = DMatrix::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(&(-a));
    aug.view_mut((0, n), (n, n)).copy_from(&(d * d_scale));
    aug.view_mut((n, n), (n, n)).copy_from(&a.transpose());
    let e = matrix_exponential(&aug, h)?;

    let mut phi = e.view((n, n), (n, n)).transpose();
    let mut q = &phi * e.view((0, n), (n, n)) / d_scale;
    q = symmetrize(&q);
    for _ in 0..doublings {
        q = symmetrize(&(&q + &phi * &q * phi.transpose()));
        phi = &phi * &phi;
    }
    if phi.iter().chain(q.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "covariance transition diverged at t = {t:e}"
        )));
    }
    Ok(Transition { phi, q })
}

/// `σ(t)` on every point of `t_grid`, each computed directly from `σ0`.
pub fn propagate_covariance(
    a: &DMatrix<f64>,
    d: &DMatrix<f64>,
    sigma0: &CovarianceMatrix,
    t_grid: &[f64],
) -> Result<Vec<CovarianceMatrix>> {
    if sigma0.dim() != a.nrows() {
        return Err(invalid(format!(
            "initial covariance is {}-dimensional, drift is {}",
            sigma0.dim(),
            a.nrows()
        )));
    }
    check_time_grid(t_grid)?;
    t_grid
        .iter()
        .map(|&t| {
            let step = transition(a, d, t)?;
            CovarianceMatrix::new(step.apply(sigma0.matrix()))
        })
        .collect()
}

pub(crate) fn check_time_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(invalid("time grid is empty"));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid[0] < 0.0 {
        return Err(invalid("time grid must be finite and start at t ≥ 0"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("time grid must be strictly increasing"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Physicality {
    pub physical: bool,
    /// Smallest eigenvalue of the Hermitian matrix `σ + iΩ/2`.
    pub min_eigenvalue: f64,
}

pub fn check_physicality(sigma: &CovarianceMatrix) -> Result<Physicality> {
    check_physicality_with_tol(sigma.matrix(), PHYSICALITY_TOL)
}

/// Physicality test on a raw matrix; the Hermitian `σ + iΩ/2` is embedded
/// as the real symmetric `[[σ, -Ω/2], [Ω/2, σ]]`, whose spectrum is the
/// Hermitian one with every eigenvalue doubled.
pub fn check_physicality_with_tol(sigma: &DMatrix<f64>, tol: f64) -> Result<Physicality> {
    let n = sigma.nrows();
    if !sigma.is_square() || n == 0 || n % 2 != 0 {
        return Err(invalid(format!(
            "physicality check needs an even square matrix, got {:?}",
            sigma.shape()
        )));
    }
    let omega = symplectic_form(n / 2)?.matrix;
    let half = &omega * 0.5;
    let mut real = DMatrix::zeros(2 * n, 2 * n);
    real.view_mut((0, 0), (n, n)).copy_from(&symmetrize(sigma));
    real.view_mut((n, n), (n, n)).copy_from(&symmetrize(sigma));
    real.view_mut((0, n), (n, n)).copy_from(&(-&half));
    real.view_mut((n, 0), (n, n)).copy_from(&half);
    let min_eigenvalue = real
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(Physicality {
        physical: min_eigenvalue >= -tol,
        min_eigenvalue,
    })
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Block-diagonal direct sum of square matrices.
pub fn direct_sum(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), b.shape()).copy_from(*b);
        at += b.nrows();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    #[test]
    fn symplectic_single_and_double_mode() {
        let o1 = symplectic_form(1).unwrap();
        assert_eq!(o1.matrix(), &dmatrix![0.0, 1.0; -1.0, 0.0]);
        let o2 = symplectic_form(2).unwrap();
        assert_eq!(o2.matrix().nrows(), 4);
        assert_eq!(o2.matrix()[(2, 3)], 1.0);
        assert_eq!(o2.matrix()[(3, 2)], -1.0);
        assert_eq!(o2.matrix()[(0, 3)], 0.0);
    }

    #[test]
    fn symplectic_squares_to_minus_identity() {
        let o = symplectic_form(3).unwrap();
        let m = o.matrix();
        assert_eq!(m * m, -DMatrix::<f64>::identity(6, 6));
        assert_eq!(m.transpose(), -m.clone());
    }

    #[test]
    fn symplectic_rejects_zero_modes() {
        assert!(matches!(symplectic_form(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn exp_of_zero_and_diagonal() {
        let z = DMatrix::<f64>::zeros(4, 4);
        assert_eq!(matrix_exponential(&z, 3.7).unwrap(), DMatrix::identity(4, 4));
        let d = dmatrix![-1.0, 0.0; 0.0, -2.0];
        let e = matrix_exponential(&d, 1.0).unwrap();
        assert_relative_eq!(e[(0, 0)], (-1.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(e[(1, 1)], (-2.0f64).exp(), max_relative = 1e-14);
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn exp_rejects_non_finite() {
        let m = dmatrix![f64::NAN, 0.0; 0.0, 1.0];
        assert!(matches!(matrix_exponential(&m, 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn lyapunov_scalar_decoupled() {
        let lambda = 3.0;
        let dval = 1.5;
        let a = DMatrix::identity(2, 2) * -lambda;
        let d = DMatrix::identity(2, 2) * dval;
        let s = lyapunov_steady_state(&a, &d).unwrap();
        assert_relative_eq!(s.sigma(1, 1), dval / (2.0 * lambda), max_relative = 1e-14);
        assert_relative_eq!(s.sigma(2, 2), dval / (2.0 * lambda), max_relative = 1e-14);
        assert!(s.sigma(1, 2).abs() < 1e-15);
    }

    #[test]
    fn lyapunov_rejects_unstable_drift() {
        let a = dmatrix![0.0, 1.0; -1.0, 0.0];
        let d = DMatrix::identity(2, 2);
        match lyapunov_steady_state(&a, &d) {
            Err(Error::Stability { max_real }) => assert!(max_real.abs() < 1e-12),
            other => panic!("expected stability error, got {other:?}"),
        }
    }

    #[test]
    fn propagate_zero_time_is_identity() {
        let a = dmatrix![-1.0, 2.0; -2.0, -0.5];
        let d = dmatrix![0.3, 0.0; 0.0, 0.7];
        let s0 = CovarianceMatrix::new(dmatrix![1.0, 0.2; 0.2, 0.8]).unwrap();
        let out = propagate_covariance(&a, &d, &s0, &[0.0]).unwrap();
        assert_eq!(out[0], s0);
    }

    #[test]
    fn propagate_pure_diffusion() {
        let a = DMatrix::zeros(2, 2);
        let dval = 0.25;
        let d = DMatrix::identity(2, 2) * dval;
        let s0 = CovarianceMatrix::vacuum(1);
        let ts = [0.5, 1.0, 4.0];
        let out = propagate_covariance(&a, &d, &s0, &ts).unwrap();
        for (s, t) in out.iter().zip(ts) {
            assert_relative_eq!(s.sigma(1, 1), 0.5 + dval * t, max_relative = 1e-14);
            assert_relative_eq!(s.sigma(2, 2), 0.5 + dval * t, max_relative = 1e-14);
            assert!(s.sigma(1, 2).abs() < 1e-15);
        }
    }

    #[test]
    fn propagate_rejects_bad_grid() {
        let a = DMatrix::identity(2, 2) * -1.0;
        let d = DMatrix::identity(2, 2);
        let s0 = CovarianceMatrix::vacuum(1);
        assert!(propagate_covariance(&a, &d, &s0, &[1.0, 1.0]).is_err());
        assert!(propagate_covariance(&a, &d, &s0, &[2.0, 1.0]).is_err());
        assert!(propagate_covariance(&a, &d, &s0, &[-1.0]).is_err());
    }

    #[test]
    fn vacuum_is_physical_and_saturates() {
        for n in 1..=3 {
            let p = check_physicality(&CovarianceMatrix::vacuum(n)).unwrap();
            assert!(p.physical);
            assert!(p.min_eigenvalue.abs() < 1e-14);
        }
    }

    #[test]
    fn sub_vacuum_is_unphysical() {
        let s = CovarianceMatrix::new(DMatrix::identity(2, 2) * 0.25).unwrap();
        let p = check_physicality(&s).unwrap();
        assert!(!p.physical);
        assert_relative_eq!(p.min_eigenvalue, -0.25, max_relative = 1e-12);
    }

    #[test]
    fn physicality_rejects_odd_dimension() {
        assert!(check_physicality_with_tol(&DMatrix::identity(3, 3), 1e-9).is_err());
    }

    #[test]
    fn covariance_rejects_asymmetric() {
        let m = dmatrix![1.0, 0.5; 0.4, 1.0];
        assert!(CovarianceMatrix::new(m).is_err());
    }
}
