//! Protocol pipeline: prepare, probe, measure and post-process for every
//! combination of protocol, photon number, angle, Δ and sample size.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{InputKind, ScenarioConfig};
use crate::error::{Error, Result};
use crate::gaussian::{check_physicality, transition, CovarianceMatrix};
use crate::inference::{classical_bound, error_probability, gaussian_fidelity, quantum_advantage, TestConfig};
use crate::model::{
    diffusion_matrix, drift_matrix, initial_state, input_covariance, output_two_mode_cm, output_variance,
    InputNoiseSpec, QuadratureSelector, SystemParams,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RowFlags {
    /// Δ = 0: both hypotheses coincide.
    pub degenerate: bool,
    /// `C + P_err = 0`, so the advantage is undefined (reported as NaN).
    pub advantage_undefined: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub protocol: usize,
    pub input: InputKind,
    pub t: f64,
    pub selector: QuadratureSelector,
    /// NaN for thermal input.
    pub phi: f64,
    pub delta: f64,
    pub n1: f64,
    pub n2: f64,
    pub n: u32,
    pub alpha: f64,
    pub v0: f64,
    pub v1: f64,
    pub fidelity: f64,
    pub bound: f64,
    pub p_err: f64,
    pub q_pct: f64,
    pub flags: RowFlags,
    /// Smallest physicality eigenvalue over the four 6×6 states behind the row.
    pub min_state_eigenvalue: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.flags != RowFlags::default()).count()
    }
}

/// One curve family: everything except time and sample size.
#[derive(Clone, Copy, Debug)]
struct Combo {
    protocol: usize,
    input: InputKind,
    selector: QuadratureSelector,
    photons: f64,
    phi: f64,
    delta: f64,
}

/// σ(t) for both hypotheses under a given input light.
struct Arm {
    h0: Vec<CovarianceMatrix>,
    h1: Vec<CovarianceMatrix>,
}

fn evolve(p: &SystemParams, spec: &InputNoiseSpec, delta: f64, times: &[f64]) -> Result<Vec<CovarianceMatrix>> {
    let a = drift_matrix(p);
    let sigma_in = input_covariance(spec, p.kappa)?;
    let d = diffusion_matrix(p, delta, &sigma_in)?;
    let sigma0 = initial_state(p, delta)?;
    times
        .par_iter()
        .map(|&t| CovarianceMatrix::new(transition(&a, &d, t)?.apply(sigma0.matrix())))
        .collect()
}

fn arm(p: &SystemParams, spec: &InputNoiseSpec, delta: f64, times: &[f64]) -> Result<Arm> {
    Ok(Arm {
        h0: evolve(p, spec, 0.0, times)?,
        h1: evolve(p, spec, delta, times)?,
    })
}

fn with_context(e: Error, what: &str) -> Error {
    match e {
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("{what}: {m}")),
        Error::Numerical(m) => Error::Numerical(format!("{what}: {m}")),
        other => other,
    }
}

fn combo_rows(cfg: &ScenarioConfig, c: Combo, times: &[f64]) -> Result<Vec<SweepRow>> {
    let p = &cfg.system;
    let thermal = InputNoiseSpec::Thermal { n1: c.photons, n2: c.photons };
    let probe = match c.input {
        InputKind::Thermal => thermal,
        InputKind::Squeezed => InputNoiseSpec::squeezed_with_photons(c.photons, c.phi)?,
    };
    let quantum = arm(p, &probe, c.delta, times)?;
    // The classical reference is thermal light with the same photon numbers.
    let classical = match c.input {
        InputKind::Thermal => None,
        InputKind::Squeezed => Some(arm(p, &thermal, c.delta, times)?),
    };
    let classical = classical.as_ref().unwrap_or(&quantum);

    let per_time: Vec<Vec<SweepRow>> = (0..times.len())
        .into_par_iter()
        .map(|i| -> Result<Vec<SweepRow>> {
            let t = times[i];
            let ctx = format!("protocol {} at t = {t:e} s, Δ = {:e}", c.protocol, c.delta);
            let states = [&quantum.h0[i], &quantum.h1[i], &classical.h0[i], &classical.h1[i]];
            let mut min_eig = f64::INFINITY;
            for s in states {
                min_eig = min_eig.min(check_physicality(s)?.min_eigenvalue);
            }
            let v0 = output_variance(&quantum.h0[i], c.selector, p.kappa)?;
            let v1 = output_variance(&quantum.h1[i], c.selector, p.kappa)?;
            let out0 = output_two_mode_cm(&classical.h0[i], p.kappa)?;
            let out1 = output_two_mode_cm(&classical.h1[i], p.kappa)?;
            let fidelity = gaussian_fidelity(&out0, &out1).map_err(|e| with_context(e, &ctx))?;
            cfg.sample_sizes
                .iter()
                .map(|&n| {
                    let test = TestConfig { n, significance: cfg.alpha, selector: c.selector, v0, v1 };
                    let p_err = error_probability(&test).map_err(|e| with_context(e, &ctx))?.p_err;
                    let bound = classical_bound(fidelity, n)?;
                    let mut flags = RowFlags { degenerate: c.delta == 0.0, ..RowFlags::default() };
                    let q_pct = quantum_advantage(bound, p_err).unwrap_or_else(|_| {
                        flags.advantage_undefined = true;
                        f64::NAN
                    });
                    Ok(SweepRow {
                        protocol: c.protocol,
                        input: c.input,
                        t,
                        selector: c.selector,
                        phi: c.phi,
                        delta: c.delta,
                        n1: c.photons,
                        n2: c.photons,
                        n,
                        alpha: cfg.alpha,
                        v0,
                        v1,
                        fidelity,
                        bound,
                        p_err,
                        q_pct,
                        flags,
                        min_state_eigenvalue: min_eig,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_time.into_iter().flatten().collect())
}

/// Runs every combination of the scenario. Rows are ordered by protocol,
/// photon number, angle, Δ, time and sample size, independently of how the
/// work is scheduled.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SweepResult> {
    cfg.validate()?;
    crate::gaussian::ensure_hurwitz(&drift_matrix(&cfg.system))?;
    let times = cfg.grid.times()?;
    let mut combos = Vec::new();
    for (k, proto) in cfg.protocols.iter().enumerate() {
        let angles = match proto.input {
            InputKind::Thermal => vec![f64::NAN],
            InputKind::Squeezed => proto.phi.clone(),
        };
        for &photons in &proto.photons {
            for &phi in &angles {
                for &delta in &cfg.deltas {
                    combos.push(Combo { protocol: k, input: proto.input, selector: proto.selector, photons, phi, delta });
                }
            }
        }
    }
    let blocks: Vec<Vec<SweepRow>> = combos
        .par_iter()
        .map(|&c| combo_rows(cfg, c, &times))
        .collect::<Result<_>>()?;
    Ok(SweepResult { rows: blocks.into_iter().flatten().collect() })
}
