//! Config-driven experiments: TOML configs in, CSV series out, plus the
//! order and growth analyses run on those CSVs.

pub mod analysis;
pub mod config;
pub mod run;

pub use analysis::{growth_fit, order_table, read_series, OrderTable, Series};
pub use config::ExperimentConfig;
pub use run::{run, RunSummary};
