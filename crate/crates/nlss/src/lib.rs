//! Configuration, suites, and JSON reports for the `nlss` check runner.

pub mod config;
pub mod profile;
pub mod report;
pub mod suites;

pub use config::{ConfigError, Mode, RunConfig};
pub use suites::{run, RunError, Suite};
