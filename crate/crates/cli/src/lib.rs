//! Batch front end for `wpcrelay-core`: TOML scenarios, sweeps, cross-engine
//! validation and CSV/JSONL output.

pub mod config;
pub mod engine;
pub mod report;
pub mod sweep;
pub mod validate;

pub use config::{load, load_str, Scenario};
pub use report::{Format, OutageRow, SteadyStateRow};
pub use sweep::{run_sweep, SweepParameter, SweepSpec};
pub use validate::{validate, ValidateOptions, ValidationReport};
