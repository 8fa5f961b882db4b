//! Self-check suite: fidelity gates, numerical kernels, statistical
//! calibration and the structural behaviour of the figure presets. Every
//! check reports a verdict and a one-line detail.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::csl::{csl_delta, CslParams};
use crate::error::Result;
use crate::experiments::{preset, run_scenario, ScenarioConfig, SweepResult, SweepRow, TimeGrid};
use crate::gaussian::{
    lyapunov_residual, lyapunov_steady_state, transition, CovarianceMatrix, PHYSICALITY_TOL,
};
use crate::inference::{classical_bound, error_probability, fidelity_kernel, gaussian_fidelity, TestConfig};
use crate::model::{diffusion_matrix, drift_matrix, input_covariance, InputNoiseSpec, QuadratureSelector, SystemParams};
use crate::montecarlo::{calibrate, McRun};
use crate::oracle;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Check {
    pub fn line(&self) -> String {
        format!(
            "{} {:<44} {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

fn timed(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    Check { name: name.to_string(), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

fn thermal_cm(ns: &[f64]) -> Result<CovarianceMatrix> {
    let diag: Vec<f64> = ns.iter().flat_map(|&n| [n + 0.5, n + 0.5]).collect();
    CovarianceMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}

/// Two-mode thermal pairs against the closed-form single-mode factor.
pub fn fidelity_thermal_gate(tol: f64) -> Check {
    timed("fidelity: thermal closed form", || {
        let occ = [0.0, 0.5, 1.0, 5.0];
        let mut worst: f64 = 0.0;
        for &a in &occ {
            for &b in &occ {
                for &c in &occ {
                    for &d in &occ {
                        let f = gaussian_fidelity(&thermal_cm(&[a, b])?, &thermal_cm(&[c, d])?)?;
                        let exact = oracle::thermal_fidelity(a, c) * oracle::thermal_fidelity(b, d);
                        worst = worst.max((f - exact).abs());
                    }
                }
            }
        }
        Ok((worst <= tol, format!("max |ΔF| = {worst:.2e} (tol {tol:.0e})")))
    })
}

/// Random low-occupancy two-mode pairs against the Fock-basis fidelity.
pub fn fidelity_fock_gate(pairs: u64, cutoff: usize, tol: f64) -> Check {
    timed("fidelity: Fock-basis oracle", || {
        let per_pair = (0..pairs)
            .into_par_iter()
            .map(|k| {
                let a = oracle::random_gaussian_state(2, 0.15, 0.15, 1000 + 2 * k);
                let b = oracle::random_gaussian_state(2, 0.15, 0.15, 1001 + 2 * k);
                let fock = oracle::fock_fidelity(&a, &b, cutoff)?;
                let diff = (gaussian_fidelity(&a, &b)? - fock.fidelity).abs();
                Ok((diff, fock.trace_a.min(fock.trace_b)))
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        let worst = per_pair.iter().map(|p| p.0).fold(0.0, f64::max);
        let min_trace = per_pair.iter().map(|p| p.1).fold(1.0, f64::min);
        Ok((
            worst <= tol,
            format!("{pairs} pairs, max |ΔF| = {worst:.2e} (tol {tol:.0e}), min truncated trace {min_trace:.10}"),
        ))
    })
}

/// The fidelity formula evaluated on identical arguments.
pub fn fidelity_identity_gate(tol: f64) -> Check {
    timed("fidelity: F(V, V) = 1", || {
        let mut worst: f64 = 0.0;
        for k in 0..50 {
            let s = oracle::random_gaussian_state(2, 0.4, 0.5 * k as f64, 7 + k);
            worst = worst.max((fidelity_kernel(&s, &s)? - 1.0).abs());
            worst = worst.max((gaussian_fidelity(&s, &s)? - 1.0).abs());
        }
        Ok((worst <= tol, format!("max |F − 1| = {worst:.2e} (tol {tol:.0e})")))
    })
}

/// Heating rate of the reference set-up against `[lo, hi]`.
pub fn csl_rate_anchor(lo: f64, hi: f64, max_seconds: f64) -> Check {
    let start = Instant::now();
    let mut c = timed("csl: reference heating rate", || {
        let p = SystemParams::table1();
        let d = csl_delta(&CslParams::adler(&p), p.omega_m, false)?;
        let d2 = csl_delta(&CslParams::adler(&p), p.omega_m, true)?;
        Ok((
            d >= lo && d <= hi,
            format!(
                "Δ = {d:.4e} (log10 {:.3}), band [{lo:.3e}, {hi:.3e}]; with 2π factor {d2:.4e}",
                d.log10()
            ),
        ))
    });
    let secs = start.elapsed().as_secs_f64();
    if secs > max_seconds {
        c.passed = false;
        c.detail.push_str(&format!("; runtime {secs:.2} s > {max_seconds} s"));
    }
    c
}

/// Fourier quadrature against the real-space Monte Carlo estimate on a
/// reduced sphere.
pub fn csl_real_space_gate(samples: u64, sigmas: f64) -> Check {
    timed("csl: real-space Monte Carlo", || {
        let csl = CslParams { gamma_csl: 1e-28, r_c: 1e-7, sphere_radius: 1.5e-7, mass: 2e-17 };
        let omega = 2.0 * PI * 2.75e5;
        let fourier = csl_delta(&csl, omega, false)?;
        let mc = oracle::csl_delta_real_space(&csl, omega, samples, 2024);
        let z = (fourier - mc.mean).abs() / mc.std_error;
        Ok((
            z <= sigmas,
            format!("quadrature {fourier:.6e}, MC {:.6e} ± {:.1e} ({z:.2}σ)", mc.mean, mc.std_error),
        ))
    })
}

fn reference_systems() -> Result<Vec<(String, DMatrix<f64>, DMatrix<f64>)>> {
    let p = SystemParams::table1();
    let a = drift_matrix(&p);
    let specs = [
        ("vacuum", InputNoiseSpec::Vacuum),
        ("thermal n=100", InputNoiseSpec::Thermal { n1: 100.0, n2: 100.0 }),
        ("squeezed n=100 φ=π", InputNoiseSpec::squeezed_with_photons(100.0, PI)?),
    ];
    let mut out = Vec::new();
    for (label, spec) in specs {
        for delta in [0.0, 1e6] {
            let d = diffusion_matrix(&p, delta, &input_covariance(&spec, p.kappa)?)?;
            out.push((format!("{label}, Δ={delta:e}"), a.clone(), d));
        }
    }
    Ok(out)
}

/// Lyapunov residual relative to ‖D‖_F, and agreement with the modal oracle.
pub fn lyapunov_gate(tol: f64) -> Check {
    timed("numerics: Lyapunov residual", || {
        let mut worst: f64 = 0.0;
        for (_, a, d) in reference_systems()? {
            let s = lyapunov_steady_state(&a, &d)?;
            worst = worst.max(lyapunov_residual(&a, s.matrix(), &d) / d.norm());
        }
        // Mechanics + first cavity against the eigen-expansion oracle.
        let p = SystemParams::table1();
        let a4 = drift_matrix(&p).view((0, 0), (4, 4)).into_owned();
        let d6 = diffusion_matrix(&p, 0.0, &input_covariance(&InputNoiseSpec::Vacuum, p.kappa)?)?;
        let d4 = d6.view((0, 0), (4, 4)).into_owned();
        let s = lyapunov_steady_state(&a4, &d4)?;
        let o = oracle::lyapunov_by_eigendecomposition(&a4, &d4)?;
        let rel = (s.matrix() - &o).norm() / o.norm();
        Ok((
            worst <= tol && rel <= 1e-8,
            format!("max residual/‖D‖ = {worst:.2e} (tol {tol:.0e}); modal oracle rel. diff {rel:.2e}"),
        ))
    })
}

/// One-step propagation over `[0, t]` against two half steps.
pub fn midpoint_gate(tol: f64) -> Check {
    timed("numerics: midpoint composition", || {
        let p = SystemParams::table1();
        let mut worst: f64 = 0.0;
        for (_, a, d) in reference_systems()? {
            let s0 = crate::model::initial_state(&p, 0.0)?;
            for t in [1e-10, 3e-9, 1e-7, 1e-4, 0.05, 1.0] {
                let whole = transition(&a, &d, t)?.apply(s0.matrix());
                let half = transition(&a, &d, t / 2.0)?;
                let split = half.apply(&half.apply(s0.matrix()));
                worst = worst.max((&whole - &split).norm() / whole.norm());
            }
        }
        Ok((worst <= tol, format!("max relative difference {worst:.2e} (tol {tol:.0e})")))
    })
}

/// Analytic error rates against sampled χ² tests over the calibration grid.
pub fn mc_calibration_gate(trials: u64, sigmas: f64) -> Check {
    timed("statistics: Monte Carlo calibration", || {
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        for n in [10u32, 100] {
            for alpha in [0.01, 0.05] {
                for ratio in [1.0, 1.5, 2.0, 10.0] {
                    let cfg = TestConfig { n, significance: alpha, selector: QuadratureSelector::QPlus, v0: 1.0, v1: ratio };
                    let run = McRun { trials, seed: 0xC0FFEE + u64::from(n), cfg };
                    let (emp, exact) = calibrate(&run)?;
                    worst = worst.max(emp.max_sigma_deviation(&exact, trials));
                    cases += 1;
                }
            }
        }
        Ok((
            worst <= sigmas,
            format!("{cases} cases × {trials} trials, worst deviation {worst:.2}σ (limit {sigmas}σ)"),
        ))
    })
}

/// Exact limits: indistinguishable variances, perfect fidelity, Δ = 0 run.
pub fn trivial_limits_gate(grid: TimeGrid) -> Check {
    timed("limits: V1=V0, F=1, Δ=0", || {
        let e = error_probability(&TestConfig {
            n: 100,
            significance: 0.05,
            selector: QuadratureSelector::XOut1,
            v0: 2.0,
            v1: 2.0,
        })?;
        let c = classical_bound(1.0, 100)?;
        let mut cfg = preset("fig3")?;
        cfg.deltas = vec![0.0];
        cfg.grid = grid;
        let res = run_scenario(&cfg)?;
        let f_ok = res.rows.iter().all(|r| r.fidelity == 1.0);
        let flagged = res.rows.iter().all(|r| r.flags.degenerate);
        let q_ok = res.rows.iter().all(|r| r.q_pct.is_nan() || r.q_pct.abs() < 1e-9);
        let ok = (e.p_err - 0.5).abs() <= 1e-12 && c == 0.5 && f_ok && flagged && q_ok && !res.rows.is_empty();
        Ok((
            ok,
            format!(
                "P_err = {:.15}, C(F=1) = {c}, Δ=0: {} rows, F≡1 {f_ok}, flagged {flagged}",
                e.p_err,
                res.rows.len()
            ),
        ))
    })
}

/// Rows of one curve, ordered by time.
pub fn curve<'a>(rows: &'a [SweepRow], keep: impl Fn(&SweepRow) -> bool) -> Vec<&'a SweepRow> {
    rows.iter().filter(|r| keep(r)).collect()
}

fn close(a: f64, b: f64) -> bool {
    ((a - b) / b).abs() < 1e-9
}

pub fn run_preset(name: &str, grid: Option<TimeGrid>) -> Result<(ScenarioConfig, SweepResult)> {
    let mut cfg = preset(name)?;
    if let Some(g) = grid {
        cfg.grid = g;
    }
    let res = run_scenario(&cfg)?;
    Ok((cfg, res))
}

fn timed_preset(
    name: &str,
    preset_name: &str,
    grid: Option<TimeGrid>,
    max_seconds: f64,
    judge: impl FnOnce(&SweepResult) -> (bool, String),
) -> Check {
    let mut c = timed(name, || {
        let (_, res) = run_preset(preset_name, grid)?;
        Ok(judge(&res))
    });
    if c.seconds > max_seconds {
        c.passed = false;
        c.detail.push_str(&format!("; runtime {:.1} s > {max_seconds} s", c.seconds));
    }
    c
}

fn min_gap(rows: &[&SweepRow]) -> f64 {
    rows.iter().map(|r| r.p_err - r.bound).fold(f64::INFINITY, f64::min)
}

/// Classical protocol never beats its bound; more noise photons hurt.
pub fn fig2_gate(grid: Option<TimeGrid>, tol: f64, max_seconds: f64) -> Check {
    timed_preset("fig2: classical error respects bound", "fig2", grid, max_seconds, |res| {
        let n10 = curve(&res.rows, |r| r.n1 == 10.0);
        let n100 = curve(&res.rows, |r| r.n1 == 100.0);
        let gap = min_gap(&n10).min(min_gap(&n100));
        let ordered = n10.len() == n100.len() && n10.iter().zip(&n100).all(|(a, b)| b.p_err >= a.p_err - tol);
        (
            gap >= -tol && ordered && !n10.is_empty(),
            format!("min(P_err − C) = {gap:.3e}; P_err(n=100) ≥ P_err(n=10) pointwise: {ordered}"),
        )
    })
}

/// Squeezed light with EPR measurement beats the bound at φ = π.
pub fn fig3_gate(grid: Option<TimeGrid>, margin: f64, max_seconds: f64) -> Check {
    timed_preset("fig3: advantage window at φ = π", "fig3", grid, max_seconds, |res| {
        let angles = [PI / 2.0, 5.0 * PI / 6.0, PI];
        let max_gap: Vec<f64> = angles
            .iter()
            .map(|&phi| {
                curve(&res.rows, |r| close(r.phi, phi))
                    .iter()
                    .map(|r| r.bound - r.p_err)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let pi_rows = curve(&res.rows, |r| close(r.phi, PI));
        // Longest run of consecutive grid points with C − P ≥ margin·C.
        let (mut run, mut best, mut best_rel) = (0usize, 0usize, f64::NEG_INFINITY);
        let mut window = (f64::NAN, f64::NAN);
        let mut start = f64::NAN;
        for r in &pi_rows {
            let rel = (r.bound - r.p_err) / r.bound;
            best_rel = best_rel.max(rel);
            if rel >= margin {
                if run == 0 {
                    start = r.t;
                }
                run += 1;
                if run > best {
                    best = run;
                    window = (start, r.t);
                }
            } else {
                run = 0;
            }
        }
        let monotone = max_gap.windows(2).all(|w| w[1] >= w[0]);
        (
            best >= 2 && monotone,
            format!(
                "window {:.2e}–{:.2e} s ({best} pts), max (C−P)/C = {:.2}%; max(C−P) at π/2, 5π/6, π = {:.3e}, {:.3e}, {:.3e}",
                window.0,
                window.1,
                100.0 * best_rel,
                max_gap[0],
                max_gap[1],
                max_gap[2]
            ),
        )
    })
}

/// Protocols without a quantum input-and-measurement pair never beat the bound.
pub fn controls_gate(grid: Option<TimeGrid>, tol: f64, max_seconds: f64) -> Check {
    let start = Instant::now();
    let mut c = timed("controls: φ=0, TMS+local, thermal+EPR", || {
        let mut parts = Vec::new();
        let mut ok = true;
        for name in ["fig4", "fig5", "fig6"] {
            let (_, res) = run_preset(name, grid)?;
            let rows: Vec<&SweepRow> = res.rows.iter().collect();
            let gap = min_gap(&rows);
            ok &= gap >= -tol && !rows.is_empty();
            parts.push(format!("{name} min(P−C) = {gap:.3e}"));
        }
        Ok((ok, parts.join("; ")))
    });
    let secs = start.elapsed().as_secs_f64();
    if secs > max_seconds {
        c.passed = false;
        c.detail.push_str(&format!("; runtime {secs:.1} s > {max_seconds} s"));
    }
    c
}

/// Advantage for each sample Δ; near-bound behaviour for the weakest one.
pub fn fig8_gate(grid: Option<TimeGrid>, rel_tol: f64, max_seconds: f64) -> Check {
    timed_preset("fig8: advantage across Δ", "fig8", grid, max_seconds, |res| {
        let mut ok = true;
        let mut parts = Vec::new();
        for delta in [1e4, 1e6, 1e7] {
            let rows = curve(&res.rows, |r| close(r.delta, delta));
            let q_max = rows.iter().map(|r| r.q_pct).fold(f64::NEG_INFINITY, f64::max);
            ok &= q_max > 0.0;
            parts.push(format!("Δ={delta:.0e}: max Q = {q_max:.3e}%"));
            if delta == 1e4 {
                let dev = rows.iter().map(|r| ((r.p_err - r.bound) / r.bound).abs()).fold(0.0, f64::max);
                ok &= dev <= rel_tol;
                parts.push(format!("max |P−C|/C = {:.3}%", 100.0 * dev));
            }
        }
        (ok, parts.join("; "))
    })
}

/// More repetitions lower both the quantum error and the classical bound.
pub fn sample_size_gate(grid: Option<TimeGrid>, tol: f64, max_seconds: f64) -> Check {
    timed_preset("sample size: N=100 vs N=10", "sample-size", grid, max_seconds, |res| {
        let n10 = curve(&res.rows, |r| r.n == 10);
        let n100 = curve(&res.rows, |r| r.n == 100);
        let p_ok = n10.len() == n100.len() && n10.iter().zip(&n100).all(|(a, b)| b.p_err <= a.p_err + tol);
        let c_ok = n10.iter().zip(&n100).all(|(a, b)| b.bound <= a.bound + tol);
        (
            p_ok && c_ok && !n10.is_empty(),
            format!("P_err(100) ≤ P_err(10): {p_ok}; C(100) ≤ C(10): {c_ok}"),
        )
    })
}

/// Physicality of every propagated 6×6 state behind every preset row.
pub fn physicality_gate(grid: Option<TimeGrid>) -> Check {
    timed("numerics: physicality on all presets", || {
        let mut worst = f64::INFINITY;
        let mut rows = 0;
        for name in crate::experiments::PRESETS {
            let (_, res) = run_preset(name, grid)?;
            rows += res.rows.len();
            worst = res.rows.iter().map(|r| r.min_state_eigenvalue).fold(worst, f64::min);
        }
        Ok((
            worst >= -PHYSICALITY_TOL,
            format!("{rows} rows, min eigenvalue of σ + iΩ/2 = {worst:.3e}"),
        ))
    })
}

/// `V₁ > V₀` for selectors that see the mechanics, for Δ > 0.
pub fn variance_ordering_gate(grid: Option<TimeGrid>) -> Check {
    timed("model: V1 > V0 for Δ > 0", || {
        let (_, res) = run_preset("fig7", grid)?;
        let (_, th) = run_preset("fig2", grid)?;
        let bad = res
            .rows
            .iter()
            .chain(&th.rows)
            .filter(|r| !(r.v1 > r.v0))
            .count();
        Ok((bad == 0, format!("{} rows, {bad} violations", res.rows.len() + th.rows.len())))
    })
}

/// Everything the `validate` subcommand runs, fidelity gates first.
pub fn full_suite(grid: Option<TimeGrid>) -> Vec<Check> {
    vec![
        fidelity_thermal_gate(1e-10),
        fidelity_fock_gate(50, 22, 1e-4),
        fidelity_identity_gate(1e-12),
        lyapunov_gate(1e-10),
        midpoint_gate(1e-9),
        csl_rate_anchor(10f64.powf(5.5), 10f64.powf(6.5), 1.0),
        csl_real_space_gate(10_000_000, 3.0),
        mc_calibration_gate(100_000, 4.0),
        trivial_limits_gate(grid.unwrap_or(TimeGrid { t_min: 1e-11, t_max: 1.0, points: 40, spacing: crate::experiments::Spacing::Log })),
        fig2_gate(grid, 1e-9, 30.0),
        fig3_gate(grid, 0.01, 60.0),
        controls_gate(grid, 1e-9, 60.0),
        fig8_gate(grid, 0.10, 60.0),
        sample_size_gate(grid, 1e-12, 60.0),
        physicality_gate(grid),
        variance_ordering_gate(grid),
    ]
}
