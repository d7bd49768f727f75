//! Configuration, pipeline orchestration and report/table emission for the
//! `pwstab` command.

pub mod config;
pub mod report;
pub mod sweep;
pub mod tables;

pub use config::{Config, ConfigError};
pub use report::{run_report, Report, ReportOptions};
pub use sweep::{run_sweep, SweepSpec, Vary};
