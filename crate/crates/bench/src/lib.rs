//! Sweep orchestration for the hypervector decoders: experiment grids,
//! deterministic trial fan-out, aggregation and CSV output.

pub mod config;
pub mod record;
pub mod sweep;

pub use config::{ExperimentConfig, Family};
pub use record::{emit_csv, read_csv, write_csv, SweepRecord};
pub use sweep::{rows_for, run_sweep, GridPoint};
