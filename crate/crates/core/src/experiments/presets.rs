//! Built-in scenarios, one per figure of the protocol comparison.

use std::f64::consts::PI;

use super::config::{InputKind, Protocol, ScenarioConfig, TimeGrid};
use crate::error::{Error, Result};
use crate::model::{QuadratureSelector, SystemParams};

pub const PRESETS: [&str; 8] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "sample-size"];

fn thermal(selector: QuadratureSelector, photons: &[f64]) -> Protocol {
    Protocol { input: InputKind::Thermal, selector, photons: photons.to_vec(), phi: Vec::new() }
}

fn squeezed(selector: QuadratureSelector, photons: &[f64], phi: &[f64]) -> Protocol {
    Protocol { input: InputKind::Squeezed, selector, photons: photons.to_vec(), phi: phi.to_vec() }
}

/// Δ values of the heating-rate scan: half decades from 10³ to 10⁸ rad/s.
pub fn delta_scan() -> Vec<f64> {
    (0..=10).map(|i| 10f64.powf(3.0 + 0.5 * f64::from(i))).collect()
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    use QuadratureSelector::{QPlus, XOut1};
    let system = SystemParams::table1();
    let base = |protocols: Vec<Protocol>, deltas: Vec<f64>, sample_sizes: Vec<u32>| ScenarioConfig {
        system,
        deltas,
        sample_sizes,
        alpha: 0.05,
        grid: TimeGrid::default_for(&system),
        protocols,
    };
    let cfg = match name {
        // Thermal input, local measurement: classical error vs bound.
        "fig2" => base(vec![thermal(XOut1, &[10.0, 100.0])], vec![1e6], vec![100]),
        // Squeezed input, EPR measurement, three squeezing angles.
        "fig3" => base(vec![squeezed(QPlus, &[100.0], &[PI / 2.0, 5.0 * PI / 6.0, PI])], vec![1e6], vec![100]),
        // Vanishing squeezing angle for two photon numbers.
        "fig4" => base(vec![squeezed(QPlus, &[10.0, 100.0], &[0.0])], vec![1e6], vec![100]),
        // Squeezed input with local measurement.
        "fig5" => base(vec![squeezed(XOut1, &[100.0], &[PI])], vec![1e6], vec![10, 100]),
        // Thermal input with EPR measurement.
        "fig6" => base(vec![thermal(QPlus, &[100.0])], vec![1e6], vec![100]),
        // The three non-classical protocols side by side.
        "fig7" => base(
            vec![squeezed(QPlus, &[100.0], &[PI]), squeezed(XOut1, &[100.0], &[PI]), thermal(QPlus, &[100.0])],
            vec![1e6],
            vec![100],
        ),
        // Advantage as a function of Δ.
        "fig8" => base(vec![squeezed(QPlus, &[100.0], &[PI])], delta_scan(), vec![10]),
        // Number of repetitions.
        "sample-size" => base(vec![squeezed(QPlus, &[100.0], &[PI])], vec![1e6], vec![10, 100]),
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}'; available: {}",
                PRESETS.join(", ")
            )))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}
