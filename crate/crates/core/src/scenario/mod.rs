//! Scenario files, shipped presets and the run driver behind the CLI.

mod config;
mod presets;
mod run;

pub use config::{parse_expr, parse_scenario, Diagnostic, OracleSettings, Output, Scenario, Severity, UNITS};
pub use presets::{preset, preset_names};
pub use run::{run_scenario, Manifest, ManifestEntry, PoleRecord, RunError, MANIFEST};
