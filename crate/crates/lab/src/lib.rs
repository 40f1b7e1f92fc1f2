//! Scenario runner for `morse-core`: JSON configs in, a CSV table and a
//! JSON summary out.
//!
//! Each config names a kind (`model`, `localize`, `torus`, `hodge`) and its
//! parameters. [`config::parse`] validates everything before any
//! computation, [`run::run_all`] evaluates the checks in parallel and
//! [`report::Report`] sorts the rows canonically, so a rerun with the same
//! config produces byte-identical files whatever the thread count.

pub mod config;
pub mod report;
pub mod run;

pub use config::{sweep, Kind, ScenarioConfig, SweepRule};
pub use report::{Provenance, Report, ReportRow};
pub use run::run_all;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("bad sweep rule: {0}")]
    BadSweepRule(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl LabError {
    /// 2 for anything caught by validation, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::ConfigInvalid(_) | LabError::BadSweepRule(_) => 2,
            _ => 1,
        }
    }
}
