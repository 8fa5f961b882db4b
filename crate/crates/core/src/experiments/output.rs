//! CSV emission and the JSON metadata sidecar.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::ScenarioConfig;
use super::scenario::SweepResult;
use crate::error::Result;
use crate::montecarlo::PRNG_NAME;

pub const CSV_HEADER: [&str; 14] = [
    "t_s", "selector", "phi_rad", "delta_rads", "n1", "n2", "N", "alpha", "V0", "V1", "F", "C", "Perr", "Q_pct",
];

/// 17 significant digits, enough to round-trip any f64.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(result: &SweepResult, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in &result.rows {
        w.write_record([
            fmt_f64(r.t),
            r.selector.name().to_string(),
            fmt_f64(r.phi),
            fmt_f64(r.delta),
            fmt_f64(r.n1),
            fmt_f64(r.n2),
            r.n.to_string(),
            fmt_f64(r.alpha),
            fmt_f64(r.v0),
            fmt_f64(r.v1),
            fmt_f64(r.fidelity),
            fmt_f64(r.bound),
            fmt_f64(r.p_err),
            fmt_f64(r.q_pct),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// SHA-256 of the resolved configuration serialised as JSON.
pub fn config_hash(cfg: &ScenarioConfig) -> Result<String> {
    let bytes = serde_json::to_vec(cfg)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub source: &'a str,
    pub config_sha256: String,
    pub seed: u64,
    pub prng: &'a str,
    pub code_version: &'a str,
    pub rows: usize,
    pub flagged_rows: usize,
    pub config: &'a ScenarioConfig,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes `path` and its sidecar `path.with_extension("json")`.
pub fn emit_csv(result: &SweepResult, cfg: &ScenarioConfig, source: &str, seed: u64, path: &Path) -> Result<PathBuf> {
    write_csv(result, File::create(path)?)?;
    let meta = Metadata {
        source,
        config_sha256: config_hash(cfg)?,
        seed,
        prng: PRNG_NAME,
        code_version: env!("CARGO_PKG_VERSION"),
        rows: result.rows.len(),
        flagged_rows: result.flagged(),
        config: cfg,
    };
    let side = sidecar_path(path);
    let mut f = File::create(&side)?;
    serde_json::to_writer_pretty(&mut f, &meta)?;
    f.write_all(b"\n")?;
    Ok(side)
}
