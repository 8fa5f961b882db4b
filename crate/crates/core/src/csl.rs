//! Heating rate induced by continuous spontaneous localization on a
//! homogeneous sphere.
//!
//! The real-space double integral over the mass-density gradients is
//! evaluated in Fourier space, where the Gaussian smearing kernel becomes
//! `e^{-k² r_C²}` and the two gradients contribute `k²`:
//!
//! `Δ = ħγ / (3 m ω_m m₀²) · (1/2π²) ∫₀^∞ k⁴ e^{-k² r_C²} |ρ̃(k)|² dk`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::constants::{AMU, HBAR};
use crate::error::{invalid, Error, Result};
use crate::model::SystemParams;
use crate::quadrature;

/// Collapse rate proposed by Adler, m³/s.
pub const ADLER_GAMMA: f64 = 1e-28;
/// Conventional localization length, m.
pub const DEFAULT_R_C: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CslParams {
    /// Collapse strength γ, m³·s⁻¹.
    pub gamma_csl: f64,
    /// Localization length, m.
    pub r_c: f64,
    pub sphere_radius: f64,
    pub mass: f64,
}

impl CslParams {
    /// Adler's γ with `r_C = 100 nm`, applied to the oscillator of `p`.
    pub fn adler(p: &SystemParams) -> Self {
        Self {
            gamma_csl: ADLER_GAMMA,
            r_c: DEFAULT_R_C,
            sphere_radius: p.sphere_radius,
            mass: p.mass,
        }
    }

    pub fn validate(&self) -> Result<()> {
        // γ = 0 is allowed: it switches the collapse off.
        if !(self.gamma_csl.is_finite() && self.gamma_csl >= 0.0) {
            return Err(invalid(format!("collapse rate must be ≥ 0, got {}", self.gamma_csl)));
        }
        for (name, v) in [("r_c", self.r_c), ("sphere_radius", self.sphere_radius), ("mass", self.mass)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// `3(sin u − u cos u)/u³`, the normalised transform of a uniform ball.
fn ball_shape(u: f64) -> f64 {
    if u < 0.05 {
        let u2 = u * u;
        1.0 - u2 / 10.0 + u2 * u2 / 280.0 - u2 * u2 * u2 / 15_120.0
    } else {
        3.0 * (u.sin() - u * u.cos()) / (u * u * u)
    }
}

/// Fourier transform of a homogeneous sphere of radius `radius` and mass `mass`.
pub fn sphere_form_factor(k: f64, radius: f64, mass: f64) -> Result<f64> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(invalid(format!("wavenumber must be ≥ 0, got {k}")));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(invalid(format!("sphere radius must be > 0, got {radius}")));
    }
    Ok(mass * ball_shape(k * radius))
}

/// Numerical settings of the Fourier-space integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CslQuadrature {
    pub rel_tol: f64,
    /// Number of equal starting panels on `[0, k_max]`.
    pub panels: usize,
}

impl Default for CslQuadrature {
    fn default() -> Self {
        Self { rel_tol: 1e-10, panels: 512 }
    }
}

/// Diagnostics of a heating-rate evaluation.
#[derive(Clone, Copy, Debug)]
pub struct CslRate {
    /// Δ in rad/s.
    pub delta: f64,
    pub k_max: f64,
    pub quad_error: f64,
    pub intervals: usize,
}

/// `Δ` with default quadrature settings. `two_pi` multiplies the result by
/// 2π, for sensitivity studies of the Hz/rad·s⁻¹ ambiguity.
pub fn csl_delta(csl: &CslParams, omega_m: f64, two_pi: bool) -> Result<f64> {
    Ok(csl_rate(csl, omega_m, two_pi, CslQuadrature::default())?.delta)
}

pub fn csl_rate(csl: &CslParams, omega_m: f64, two_pi: bool, quad: CslQuadrature) -> Result<CslRate> {
    csl.validate()?;
    if !(omega_m.is_finite() && omega_m > 0.0) {
        return Err(invalid(format!("omega_m must be > 0, got {omega_m}")));
    }
    let k_max = 50.0 / csl.r_c.min(csl.sphere_radius);
    if csl.gamma_csl == 0.0 {
        return Ok(CslRate { delta: 0.0, k_max, quad_error: 0.0, intervals: 0 });
    }
    // Work in u = kR so the integrand is O(1):
    // ∫ k⁴ e^{-k²r_C²} |ρ̃|² dk = m² R⁻⁵ ∫ u⁴ e^{-u² s²} f(u)² du, s = r_C/R.
    let r = csl.sphere_radius;
    let s2 = (csl.r_c / r).powi(2);
    let integrand = |u: f64| {
        let f = ball_shape(u);
        u.powi(4) * (-u * u * s2).exp() * f * f
    };
    // Beyond u·s = 8 the kernel is below e⁻⁶⁴ and the integrand negligible.
    let u_end = (k_max * r).min(8.0 / s2.sqrt());
    let res = quadrature::integrate(integrand, 0.0, u_end, quad.rel_tol, 0.0, quad.panels, 1 << 20)
        .map_err(|e| Error::Numerical(format!("CSL rate integral: {e}")))?;
    let integral = csl.mass.powi(2) * r.powi(-5) * res.value / (2.0 * PI * PI);
    let mut delta = HBAR * csl.gamma_csl / (3.0 * csl.mass * omega_m * AMU * AMU) * integral;
    if two_pi {
        delta *= TAU;
    }
    Ok(CslRate {
        delta,
        k_max,
        quad_error: res.error / res.value.abs() * delta,
        intervals: res.intervals,
    })
}

/// Effective occupation `n̄_th + Δ/(2γ_m)` of the collapse-heated oscillator.
pub fn csl_occupation(n_th: f64, delta: f64, gamma_m: f64) -> Result<f64> {
    if !(gamma_m.is_finite() && gamma_m > 0.0) {
        return Err(invalid(format!("gamma_m must be > 0, got {gamma_m}")));
    }
    if !(n_th >= 0.0 && delta >= 0.0) {
        return Err(invalid("occupation and heating rate must be ≥ 0"));
    }
    Ok(n_th + delta / (2.0 * gamma_m))
}
