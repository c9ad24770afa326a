//! Experiment runner behind the `inr` binary: JSON configs in, summaries,
//! CSV tables and reconstructions out.

pub mod compare;
pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod summary;

pub use compare::{compare, compare_csv, compare_files, compare_table, CompareRow};
pub use config::{ExperimentConfig, Task};
pub use error::CliError;
pub use run::{run, run_config, RunOptions, RunReport};
pub use summary::Summary;

/// Exit status of a run whose training diverged; artifacts are still
/// written.
pub const EXIT_DIVERGED: i32 = 4;
