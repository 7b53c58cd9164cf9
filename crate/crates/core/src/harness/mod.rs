//! Run configuration, experiment pipeline and reports used by the CLI.

pub mod config;
pub mod eigen_check;
pub mod pipeline;
pub mod report;
pub mod suites;

pub use config::{parse_config, RunConfig, PRESETS};
pub use report::{write_outcome, Outcome, Report, Status, Verdict};
pub use suites::{run_suite, Suite};
