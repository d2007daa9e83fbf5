//! Named experiments over the `roughhj` solvers, with self-auditing reports
//! and a command-line front end.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod report;

pub use config::{ExperimentName, ExperimentSpec};
pub use experiments::run_experiment;
pub use report::{emit_report, Format, Report};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] roughhj::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}


#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod book {}
