//! Scenario configuration: a TOML document parsed into raw sections, then
//! resolved against the reference set-up into a validated [`ScenarioConfig`].
//!
//! ```toml
//! [system]            # any field of the reference set-up; all optional
//! mechanical_q = 1e5  # alternative to gamma_m
//!
//! [csl]
//! delta = [1e6]       # explicit Δ values in rad/s, or:
//! # gamma = 1e-28     # collapse rate (m³/s) with r_c (m); Δ is computed
//! # r_c = 1e-7
//! # two_pi = false
//!
//! [test]
//! n = [100]
//! alpha = 0.05
//!
//! [grid]
//! t_min = 1e-11
//! t_max = 1.0         # default 20/γ_m
//! points = 400
//! spacing = "log"     # or "lin"
//!
//! [[protocol]]
//! input = "squeezed"  # or "thermal"
//! selector = "q_plus"
//! photons = [100]
//! phi = [3.141592653589793]
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::csl::{csl_delta, CslParams, ADLER_GAMMA, DEFAULT_R_C};
use crate::error::{invalid, Error, Result};
use crate::model::{QuadratureSelector, SystemParams, TABLE1_MECHANICAL_Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Lin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl TimeGrid {
    /// Log grid from 10 ps to `20/γ_m`.
    pub fn default_for(p: &SystemParams) -> Self {
        Self { t_min: 1e-11, t_max: 20.0 / p.gamma_m, points: 400, spacing: Spacing::Log }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(invalid("time grid needs at least one point"));
        }
        if !(self.t_min.is_finite() && self.t_max.is_finite() && self.t_min >= 0.0) {
            return Err(invalid("time grid bounds must be finite and t_min ≥ 0"));
        }
        if self.points > 1 && self.t_max <= self.t_min {
            return Err(invalid("time grid needs t_max > t_min"));
        }
        if self.spacing == Spacing::Log && self.t_min <= 0.0 {
            return Err(invalid("log-spaced time grid needs t_min > 0"));
        }
        Ok(())
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        self.validate()?;
        if self.points == 1 {
            return Ok(vec![self.t_min]);
        }
        let last = (self.points - 1) as f64;
        let mut ts = (0..self.points)
            .map(|i| {
                let f = i as f64 / last;
                match self.spacing {
                    Spacing::Lin => self.t_min + f * (self.t_max - self.t_min),
                    Spacing::Log => (self.t_min.ln() + f * (self.t_max / self.t_min).ln()).exp(),
                }
            })
            .collect::<Vec<_>>();
        // Pin the end points against rounding in exp/ln.
        ts[0] = self.t_min;
        ts[self.points - 1] = self.t_max;
        Ok(ts)
    }

    /// Parses `t_min,t_max,points,log|lin`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Config(format!("grid must be t_min,t_max,points,log|lin; got '{s}'")));
        }
        let num = |v: &str| v.parse::<f64>().map_err(|e| Error::Config(format!("bad grid value '{v}': {e}")));
        let spacing = match parts[3] {
            "log" => Spacing::Log,
            "lin" => Spacing::Lin,
            other => return Err(Error::Config(format!("grid spacing must be log or lin, got '{other}'"))),
        };
        let grid = Self {
            t_min: num(parts[0])?,
            t_max: num(parts[1])?,
            points: parts[2]
                .parse()
                .map_err(|e| Error::Config(format!("bad grid point count '{}': {e}", parts[2])))?,
            spacing,
        };
        grid.validate()?;
        Ok(grid)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Thermal,
    Squeezed,
}

/// One input/measurement combination with its own photon and angle axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Protocol {
    pub input: InputKind,
    pub selector: QuadratureSelector,
    /// Mean photons per input mode (`n₁ = n₂`).
    pub photons: Vec<f64>,
    /// Squeezing angles; only for squeezed input.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phi: Vec<f64>,
}

impl Protocol {
    pub fn validate(&self) -> Result<()> {
        if self.photons.is_empty() {
            return Err(Error::Config("protocol needs at least one photon number".into()));
        }
        if self.photons.iter().any(|n| !(n.is_finite() && *n >= 0.0)) {
            return Err(Error::Config("photon numbers must be finite and ≥ 0".into()));
        }
        match self.input {
            InputKind::Thermal if !self.phi.is_empty() => {
                Err(Error::Config("thermal input takes no squeezing angle".into()))
            }
            InputKind::Squeezed if self.phi.is_empty() => {
                Err(Error::Config("squeezed input needs at least one angle".into()))
            }
            InputKind::Squeezed if self.phi.iter().any(|p| !(p.is_finite() && (0.0..TAU).contains(p))) => {
                Err(Error::Config("squeezing angles must lie in [0, 2π)".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Fully resolved scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub system: SystemParams,
    /// Heating rates Δ (rad/s) swept for the H₁ arm.
    pub deltas: Vec<f64>,
    pub sample_sizes: Vec<u32>,
    pub alpha: f64,
    pub grid: TimeGrid,
    pub protocols: Vec<Protocol>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.grid.validate()?;
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::Config("need at least one Δ, each finite and ≥ 0".into()));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.iter().any(|&n| n < 2) {
            return Err(Error::Config("need at least one sample size, each ≥ 2".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.protocols.is_empty() {
            return Err(Error::Config("at least one [[protocol]] is required".into()));
        }
        self.protocols.iter().try_for_each(Protocol::validate)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.resolve()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    omega_m: Option<f64>,
    gamma_m: Option<f64>,
    mechanical_q: Option<f64>,
    temperature: Option<f64>,
    omega_c: Option<f64>,
    kappa: Option<f64>,
    detuning: Option<f64>,
    pump_power: Option<f64>,
    mass: Option<f64>,
    cavity_length: Option<f64>,
    sphere_radius: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCsl {
    delta: Option<Vec<f64>>,
    gamma: Option<f64>,
    r_c: Option<f64>,
    #[serde(default)]
    two_pi: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTest {
    n: Option<Vec<u32>>,
    alpha: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t_min: Option<f64>,
    t_max: Option<f64>,
    points: Option<usize>,
    spacing: Option<Spacing>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    system: RawSystem,
    #[serde(default)]
    csl: RawCsl,
    #[serde(default)]
    test: RawTest,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    protocol: Vec<Protocol>,
}

impl RawConfig {
    fn resolve(self) -> Result<ScenarioConfig> {
        let s = self.system;
        let mut p = SystemParams::table1();
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = s.$f { p.$f = v; } )* };
        }
        set!(omega_m, temperature, omega_c, kappa, detuning, pump_power, mass, cavity_length, sphere_radius);
        match (s.gamma_m, s.mechanical_q) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either gamma_m or mechanical_q, not both".into()));
            }
            (Some(g), None) => p.gamma_m = g,
            (None, q) => p.gamma_m = p.omega_m / q.unwrap_or(TABLE1_MECHANICAL_Q),
        }
        p.validate()?;

        let c = self.csl;
        let deltas = match (c.delta, c.gamma.is_some() || c.r_c.is_some()) {
            (Some(_), true) => {
                return Err(Error::Config("give either csl.delta or csl.gamma/r_c, not both".into()));
            }
            (Some(d), false) => d,
            (None, true) => {
                let params = CslParams {
                    gamma_csl: c.gamma.unwrap_or(ADLER_GAMMA),
                    r_c: c.r_c.unwrap_or(DEFAULT_R_C),
                    sphere_radius: p.sphere_radius,
                    mass: p.mass,
                };
                vec![csl_delta(&params, p.omega_m, c.two_pi)?]
            }
            (None, false) => vec![1e6],
        };

        let default_grid = TimeGrid::default_for(&p);
        let grid = TimeGrid {
            t_min: self.grid.t_min.unwrap_or(default_grid.t_min),
            t_max: self.grid.t_max.unwrap_or(default_grid.t_max),
            points: self.grid.points.unwrap_or(default_grid.points),
            spacing: self.grid.spacing.unwrap_or(default_grid.spacing),
        };

        let cfg = ScenarioConfig {
            system: p,
            deltas,
            sample_sizes: self.test.n.unwrap_or_else(|| vec![100]),
            alpha: self.test.alpha.unwrap_or(0.05),
            grid,
            protocols: self.protocol,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [[protocol]]
        input = "thermal"
        selector = "x_out1"
        photons = [10, 100]
    "#;

    #[test]
    fn defaults_follow_reference_setup() {
        let cfg = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.system, SystemParams::table1());
        assert_eq!(cfg.deltas, vec![1e6]);
        assert_eq!(cfg.sample_sizes, vec![100]);
        assert_eq!(cfg.alpha, 0.05);
        assert_eq!(cfg.grid.points, 400);
        assert_eq!(cfg.grid.t_max, 20.0 / cfg.system.gamma_m);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[test]\nalpah = 0.1\n");
        assert!(matches!(ScenarioConfig::from_toml_str(&text), Err(Error::Config(_))));
        let text = "[[protocol]]\ninput = \"thermal\"\nselector = \"x_out1\"\nphotons = [1]\ncolour = 3\n";
        assert!(ScenarioConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn unknown_selector_rejected() {
        let text = "[[protocol]]\ninput = \"thermal\"\nselector = \"z_out\"\nphotons = [1]\n";
        assert!(ScenarioConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn squeezed_needs_angle_and_thermal_refuses_one() {
        let sq = "[[protocol]]\ninput = \"squeezed\"\nselector = \"q_plus\"\nphotons = [1]\n";
        assert!(ScenarioConfig::from_toml_str(sq).is_err());
        let th = "[[protocol]]\ninput = \"thermal\"\nselector = \"q_plus\"\nphotons = [1]\nphi = [1.0]\n";
        assert!(ScenarioConfig::from_toml_str(th).is_err());
    }

    #[test]
    fn mechanical_q_override() {
        let text = format!("[system]\nmechanical_q = 1e4\n{MINIMAL}");
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.system.gamma_m, cfg.system.omega_m / 1e4);
        let both = format!("[system]\nmechanical_q = 1e4\ngamma_m = 3.0\n{MINIMAL}");
        assert!(ScenarioConfig::from_toml_str(&both).is_err());
    }

    #[test]
    fn computed_delta_from_collapse_parameters() {
        let text = format!("[csl]\ngamma = 1e-28\nr_c = 1e-7\n{MINIMAL}");
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.deltas.len(), 1);
        assert!(cfg.deltas[0] > 0.0);
    }

    #[test]
    fn grids() {
        let g = TimeGrid::parse("1e-9,1e-3,7,log").unwrap();
        let ts = g.times().unwrap();
        assert_eq!(ts.len(), 7);
        assert_eq!(ts[0], 1e-9);
        assert_eq!(ts[6], 1e-3);
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        let lin = TimeGrid::parse("0,1,5,lin").unwrap().times().unwrap();
        assert_eq!(lin, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(TimeGrid::parse("0,1,5,log").is_err());
        assert!(TimeGrid::parse("1,0,5,lin").is_err());
        assert!(TimeGrid::parse("1,2,5").is_err());
        assert!(TimeGrid::parse("1,2,0,lin").is_err());
    }
}
