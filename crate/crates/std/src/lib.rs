//! Spec files, reports, result cache and command execution for `treedim`.

pub mod cache;
pub mod config;
pub mod report;
pub mod run;
pub mod specfile;

pub use config::{load_spec, Command, ConfigError, RunConfig};
pub use report::{Format, Report};
pub use run::{run, Outcome};
