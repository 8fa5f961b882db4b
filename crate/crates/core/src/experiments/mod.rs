//! Scenario configuration, the protocol pipeline, figure presets and output.

mod config;
mod output;
mod presets;
mod scenario;

pub use config::{InputKind, Protocol, ScenarioConfig, Spacing, TimeGrid};
pub use output::{config_hash, emit_csv, sidecar_path, write_csv, Metadata, CSV_HEADER};
pub use presets::{delta_scan, preset, PRESETS};
pub use scenario::{run_scenario, RowFlags, SweepResult, SweepRow};
