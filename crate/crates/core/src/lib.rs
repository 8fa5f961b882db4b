//! Gaussian covariance dynamics of a two-cavity optomechanical set-up and the
//! χ²-based hypothesis test that decides whether an extra mechanical heating
//! channel (a CSL-type collapse rate Δ) is present.
//!
//! Module map:
//!
//! * [`gaussian`] – symplectic form, matrix exponential, Lyapunov solver,
//!   covariance propagation and physicality checks.
//! * [`model`] – physical parameters, drift/diffusion matrices, input light
//!   and output variances.
//! * [`csl`] – collapse-induced heating rate for a homogeneous sphere.
//! * [`special`] and [`inference`] – χ² machinery, error probabilities,
//!   Gaussian fidelity, classical bound and advantage metric.
//! * [`montecarlo`] – sampled χ² tests validating the analytic error rates.
//! * [`experiments`] – scenario configuration, figure presets, sweeps and CSV
//!   output.
//! * [`oracle`] and [`validate`] – independent reference computations and
//!   the self-check suite run by the `validate` subcommand.

pub mod constants;
pub mod csl;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod inference;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod quadrature;
pub mod special;
pub mod validate;

pub use error::{Error, Result};
pub use gaussian::CovarianceMatrix;
pub use inference::{HypothesisOutcome, TestConfig};
pub use model::{InputNoiseSpec, QuadratureSelector, SystemParams};
