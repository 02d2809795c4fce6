//! Declarative parameter sweeps and their on-disk products.
//!
//! An output tree holds `config.toml` (canonical form), `manifest.json`,
//! `timing.json` (wall-clock only, excluded from determinism comparisons),
//! per-task `traces/` and `spectra/`, the aggregated `fractions.tsv`,
//! `lifetimes.tsv` and `boundary.tsv`, and optionally `meanfield/` and
//! `plotdata/`. Tables are tab-separated with unit-suffixed column names.

pub mod config;
pub mod manifest;
pub mod meanfield_run;
pub mod plotdata;
pub mod simulate;
pub mod tables;
pub mod verify;

pub use config::SweepConfig;
pub use manifest::{RunManifest, TaskStatus};
pub use meanfield_run::run_meanfield;
pub use plotdata::{emit_plotdata, Figure};
pub use simulate::{analyze, run_sweep, RunOptions, RunReport};
pub use verify::{run_verify, CheckResult};
