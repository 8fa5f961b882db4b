//! Linearised two-cavity optomechanical model.
//!
//! The quadrature vector is ordered `(Q, P, X₁, Y₁, X₂, Y₂)`: mechanical
//! position and momentum, then the two intracavity fields. All rates
//! (`κ`, `δ`, `γ_m`, `Δ`) are stored in rad/s.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constants::{C_LIGHT, HBAR, K_B};
use crate::error::{invalid, Result};
use crate::gaussian::{self, direct_sum, CovarianceMatrix};

/// Set-up parameters. Frequencies and rates are angular (rad/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_m: f64,
    pub gamma_m: f64,
    /// Phonon bath temperature, K.
    pub temperature: f64,
    pub omega_c: f64,
    pub kappa: f64,
    /// Cavity–pump detuning `ω_C − ω_L`.
    pub detuning: f64,
    /// Pump power, W.
    pub pump_power: f64,
    /// Oscillator mass, kg.
    pub mass: f64,
    /// Cavity length, m.
    pub cavity_length: f64,
    /// Radius of the (spherical) mechanical element, m.
    pub sphere_radius: f64,
}

/// Mechanical quality factor used to derive `γ_m = ω_m / Q`.
pub const TABLE1_MECHANICAL_Q: f64 = 1e5;

impl SystemParams {
    /// Reference set-up: `ω_m/2π = 275 kHz`, `Q_m = 10⁵`, `T = 1 mK`,
    /// `ω_C/2π = 9.4×10⁵ c`, `κ = 5×10⁷`, `δ = 4κ`, `P = 4 mW`, `m = 150 ng`,
    /// `L = 25 mm`, `R = 1 μm`.
    pub fn table1() -> Self {
        let omega_m = TAU * 2.75e5;
        let kappa = 5e7;
        Self {
            omega_m,
            gamma_m: omega_m / TABLE1_MECHANICAL_Q,
            temperature: 1e-3,
            omega_c: TAU * 9.4e5 * C_LIGHT,
            kappa,
            detuning: 4.0 * kappa,
            pump_power: 4e-3,
            mass: 150e-12,
            cavity_length: 25e-3,
            sphere_radius: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("omega_c", self.omega_c),
            ("kappa", self.kappa),
            ("mass", self.mass),
            ("cavity_length", self.cavity_length),
            ("sphere_radius", self.sphere_radius),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        for (name, v) in [("temperature", self.temperature), ("pump_power", self.pump_power)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        if !self.detuning.is_finite() {
            return Err(invalid("detuning must be finite"));
        }
        let eps = derived_coupling(self).epsilon;
        if !eps.is_finite() {
            return Err(invalid("pump amplitude ε is not finite"));
        }
        Ok(())
    }

    /// Mean phonon number `k_B T / ħω_m` (high-temperature limit), the value
    /// consistent with the Brownian correlator used in the diffusion matrix.
    pub fn thermal_occupation(&self) -> f64 {
        K_B * self.temperature / (HBAR * self.omega_m)
    }

    /// Exact Bose–Einstein occupation; diagnostics only.
    pub fn bose_occupation(&self) -> f64 {
        if self.temperature == 0.0 {
            return 0.0;
        }
        1.0 / ((HBAR * self.omega_m / (K_B * self.temperature)).exp_m1())
    }

    /// Brownian momentum diffusion `2γ_m k_B T / ħω_m`.
    pub fn thermal_diffusion(&self) -> f64 {
        2.0 * self.gamma_m * self.thermal_occupation()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedCoupling {
    /// Pump amplitude `√(2κP/ħω_C)`, s^{-1/2}·s^{-1/2} (i.e. √(photons/s)·√rate).
    pub epsilon: f64,
    /// Radiation-pressure coupling `ω_C / L`, rad/s/m.
    pub chi: f64,
    /// Single-photon coupling `χ √(ħ / m ω_m)`, rad/s.
    pub g: f64,
}

pub fn derived_coupling(p: &SystemParams) -> DerivedCoupling {
    let epsilon = (2.0 * p.kappa * p.pump_power / (HBAR * p.omega_c)).sqrt();
    let chi = p.omega_c / p.cavity_length;
    let g = chi * (HBAR / (p.mass * p.omega_m)).sqrt();
    DerivedCoupling { epsilon, chi, g }
}

/// Real steady-state intracavity amplitude `α = ε / √(κ² + δ²)`.
///
/// Bare driven-cavity value; the radiation-pressure shift of the detuning is
/// neglected, as the drift matrix uses the bare `δ`.
pub fn cavity_amplitude(p: &SystemParams) -> f64 {
    derived_coupling(p).epsilon / p.kappa.hypot(p.detuning)
}

/// 6×6 drift matrix in `(Q, P, X₁, Y₁, X₂, Y₂)` ordering.
pub fn drift_matrix(p: &SystemParams) -> DMatrix<f64> {
    let coupling = 2f64.sqrt() * cavity_amplitude(p) * derived_coupling(p).g;
    let (k, d) = (p.kappa, p.detuning);
    let mut a = DMatrix::zeros(6, 6);
    a[(0, 1)] = p.omega_m;
    a[(1, 0)] = -p.omega_m;
    a[(1, 1)] = -p.gamma_m;
    a[(1, 2)] = coupling;
    a[(3, 0)] = coupling;
    for c in [2, 4] {
        a[(c, c)] = -k;
        a[(c, c + 1)] = d;
        a[(c + 1, c)] = -d;
        a[(c + 1, c + 1)] = -k;
    }
    a
}

/// State of the extra light fed to the two cavities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputNoiseSpec {
    Vacuum,
    /// Independent thermal states with mean photon numbers `n1`, `n2`.
    Thermal { n1: f64, n2: f64 },
    /// Two-mode squeezed vacuum with squeezing `r` and angle `phi` (rad).
    TwoModeSqueezed { r: f64, phi: f64 },
}

impl InputNoiseSpec {
    /// Two-mode squeezed light carrying `n` photons per mode.
    pub fn squeezed_with_photons(n: f64, phi: f64) -> Result<Self> {
        let spec = Self::TwoModeSqueezed {
            r: photon_to_squeezing(n)?,
            phi: phi.rem_euclid(TAU),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Vacuum => Ok(()),
            Self::Thermal { n1, n2 } => {
                if n1.is_finite() && n2.is_finite() && n1 >= 0.0 && n2 >= 0.0 {
                    Ok(())
                } else {
                    Err(invalid(format!("thermal photon numbers must be ≥ 0, got ({n1}, {n2})")))
                }
            }
            Self::TwoModeSqueezed { r, phi } => {
                if !(r.is_finite() && r >= 0.0) {
                    return Err(invalid(format!("squeezing r must be ≥ 0, got {r}")));
                }
                if !(phi.is_finite() && (0.0..TAU).contains(&phi)) {
                    return Err(invalid(format!("squeezing angle must lie in [0, 2π), got {phi}")));
                }
                Ok(())
            }
        }
    }

    /// Mean photon numbers per input mode.
    pub fn photons(&self) -> (f64, f64) {
        match *self {
            Self::Vacuum => (0.0, 0.0),
            Self::Thermal { n1, n2 } => (n1, n2),
            Self::TwoModeSqueezed { r, .. } => {
                let n = squeezing_to_photon(r);
                (n, n)
            }
        }
    }

    /// Thermal light with the same photon numbers, the reference for the
    /// classical bound.
    pub fn classical_counterpart(&self) -> Self {
        let (n1, n2) = self.photons();
        Self::Thermal { n1, n2 }
    }
}

/// 4×4 input block `σ_IN` of the diffusion matrix (already scaled by `2κ`).
pub fn input_covariance(spec: &InputNoiseSpec, kappa: f64) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let out = match *spec {
        InputNoiseSpec::Vacuum => DMatrix::identity(4, 4) * kappa,
        InputNoiseSpec::Thermal { n1, n2 } => {
            let v = [n1 + 0.5, n1 + 0.5, n2 + 0.5, n2 + 0.5];
            DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&v)) * (2.0 * kappa)
        }
        InputNoiseSpec::TwoModeSqueezed { r, phi } => {
            let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
            let (cp, sp) = (phi.cos(), phi.sin());
            let rot = [[cp, sp], [sp, -cp]];
            let mut m = DMatrix::zeros(4, 4);
            for i in 0..2 {
                m[(i, i)] = c;
                m[(i + 2, i + 2)] = c;
                for j in 0..2 {
                    m[(i, j + 2)] = s * rot[i][j];
                    m[(i + 2, j)] = s * rot[i][j];
                }
            }
            m * kappa
        }
    };
    Ok(out)
}

/// Squeezing parameter carrying `n` photons per mode: `cosh 2r = 2n + 1`.
pub fn photon_to_squeezing(n: f64) -> Result<f64> {
    if !(n.is_finite() && n >= 0.0) {
        return Err(invalid(format!("photon number must be ≥ 0, got {n}")));
    }
    Ok(0.5 * (2.0 * n + 1.0).acosh())
}

pub fn squeezing_to_photon(r: f64) -> f64 {
    // (cosh 2r - 1)/2 = sinh² r, which avoids cancellation at small r.
    r.sinh().powi(2)
}

/// `D = σ_m ⊕ σ_IN` with `σ_m = diag(0, 2γ_m k_B T/ħω_m + Δ)`.
pub fn diffusion_matrix(p: &SystemParams, delta_csl: f64, sigma_in: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !(delta_csl.is_finite() && delta_csl >= 0.0) {
        return Err(invalid(format!("heating rate Δ must be ≥ 0, got {delta_csl}")));
    }
    if sigma_in.shape() != (4, 4) {
        return Err(invalid(format!("σ_IN must be 4×4, got {:?}", sigma_in.shape())));
    }
    let scale = sigma_in.amax().max(f64::MIN_POSITIVE);
    if (sigma_in - sigma_in.transpose()).amax() > 1e-12 * scale {
        return Err(invalid("σ_IN must be symmetric"));
    }
    let mut sigma_m = DMatrix::zeros(2, 2);
    sigma_m[(1, 1)] = p.thermal_diffusion() + delta_csl;
    Ok(direct_sum(&[&sigma_m, sigma_in]))
}

/// Product of the (mechanics + cavity 1) steady state under vacuum input with
/// heating `Δ`, and the cavity-2 vacuum.
pub fn initial_state(p: &SystemParams, delta_csl: f64) -> Result<CovarianceMatrix> {
    let a = drift_matrix(p);
    let sigma_in = input_covariance(&InputNoiseSpec::Vacuum, p.kappa)?;
    let d = diffusion_matrix(p, delta_csl, &sigma_in)?;
    let a_mc = a.view((0, 0), (4, 4)).into_owned();
    let d_mc = d.view((0, 0), (4, 4)).into_owned();
    let mc = gaussian::lyapunov_steady_state(&a_mc, &d_mc)?;
    let cavity2 = DMatrix::identity(2, 2) * 0.5;
    CovarianceMatrix::new(direct_sum(&[mc.matrix(), &cavity2]))
}

/// Measured output quadrature. `q±`/`p±` are the EPR combinations
/// `(x_out1 ± x_out2)/√2` and `(y_out1 ± y_out2)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureSelector {
    XOut1,
    YOut1,
    XOut2,
    YOut2,
    QPlus,
    QMinus,
    PPlus,
    PMinus,
}

impl QuadratureSelector {
    pub const ALL: [Self; 8] = [
        Self::XOut1,
        Self::YOut1,
        Self::XOut2,
        Self::YOut2,
        Self::QPlus,
        Self::QMinus,
        Self::PPlus,
        Self::PMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::XOut1 => "x_out1",
            Self::YOut1 => "y_out1",
            Self::XOut2 => "x_out2",
            Self::YOut2 => "y_out2",
            Self::QPlus => "q_plus",
            Self::QMinus => "q_minus",
            Self::PPlus => "p_plus",
            Self::PMinus => "p_minus",
        }
    }

    /// Whether the measurement recombines both outputs on a beam splitter.
    pub fn is_epr(self) -> bool {
        matches!(self, Self::QPlus | Self::QMinus | Self::PPlus | Self::PMinus)
    }
}

impl fmt::Display for QuadratureSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuadratureSelector {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| invalid(format!("unknown quadrature selector '{s}'")))
    }
}

fn require_full_state(sigma: &CovarianceMatrix) -> Result<()> {
    if sigma.dim() != 6 {
        return Err(invalid(format!("expected a 6×6 system covariance, got {}", sigma.dim())));
    }
    Ok(())
}

/// Variance of a measured output quadrature from the intracavity covariance.
pub fn output_variance(sigma: &CovarianceMatrix, sel: QuadratureSelector, kappa: f64) -> Result<f64> {
    require_full_state(sigma)?;
    let s = |i, j| sigma.sigma(i, j);
    let v = match sel {
        QuadratureSelector::XOut1 => 2.0 * kappa * s(3, 3),
        QuadratureSelector::YOut1 => 2.0 * kappa * s(4, 4),
        QuadratureSelector::XOut2 => 2.0 * kappa * s(5, 5),
        QuadratureSelector::YOut2 => 2.0 * kappa * s(6, 6),
        QuadratureSelector::QPlus => kappa * (s(3, 3) + s(5, 5) + 2.0 * s(3, 5)),
        QuadratureSelector::QMinus => kappa * (s(3, 3) + s(5, 5) - 2.0 * s(3, 5)),
        QuadratureSelector::PPlus => kappa * (s(4, 4) + s(6, 6) + 2.0 * s(4, 6)),
        QuadratureSelector::PMinus => kappa * (s(4, 4) + s(6, 6) - 2.0 * s(4, 6)),
    };
    Ok(v)
}

/// Covariance of `(x_out1, y_out1, x_out2, y_out2)`: `2κ` times the optical
/// block of `σ`.
pub fn output_two_mode_cm(sigma: &CovarianceMatrix, kappa: f64) -> Result<CovarianceMatrix> {
    require_full_state(sigma)?;
    let block = sigma.matrix().view((2, 2), (4, 4)).into_owned();
    CovarianceMatrix::new(block * (2.0 * kappa))
}

/// Angles used by the squeezing-angle figure.
pub const FIG_ANGLES: [f64; 3] = [PI / 2.0, 5.0 * PI / 6.0, PI];
