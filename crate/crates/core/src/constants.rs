//! Physical constants (CODATA 2018, 10 significant figures).

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s (exact).
pub const C_LIGHT: f64 = 299_792_458.0;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_067e-27;
