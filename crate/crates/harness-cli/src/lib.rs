//! Batch harness around the attitude observers: scenario configuration,
//! trajectory-constant extraction, gain-certificate evaluation, closed-loop
//! runs with CSV telemetry, and SVG figure emission.
//!
//! The `attitude` binary in this crate exposes the same operations on the
//! command line; the library surface exists so test suites and downstream
//! tools can drive them directly. Every operation is deterministic: repeated
//! runs of the same configuration produce bit-identical CSV output, and
//! certificate evaluation is a pure function of its inputs.

use thiserror::Error;

pub mod certificate;
pub mod config;
pub mod constants;
pub mod plot;
pub mod scenario;
pub mod telemetry;

pub use certificate::{evaluate_certificate, mu_cap, Certificate, ConditionReport};
pub use config::{Mode, ScenarioConfig};
pub use constants::{extract_constants, TrajectoryConstants};
pub use plot::emit_plots;
pub use scenario::{run_scenario, RunOutput, RunSummary};
pub use telemetry::{read_csv, write_csv, TelemetryRow, CSV_HEADER};

/// Failures surfaced by the harness. Configuration, I/O, and telemetry
/// problems map to CLI exit code 1; propagated observer guard errors
/// (degenerate sensor directions, livelock) map to exit code 2.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("telemetry: {0}")]
    Telemetry(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Hybrid(#[from] hybrid_observer::HybridError),
}
