//! Experiment drivers: single runs, step-size grids, reference solutions and
//! the theory verification report.
//!
//! Configuration is JSON ([`ExperimentConfig`]); the CLI layers flag
//! overrides on top. Every artifact is a function of configuration and seed.

mod config;
mod grid;
mod problem;
mod verify;

pub use config::{EtaGrid, ExperimentConfig, ObjectiveKind, ObjectiveSpec, ReferencePolicy};
pub use grid::{
    best_eta, cmd_grid, cmd_run, passes_per_epoch, run_cell, run_grid, summarize, summary_path,
    write_summary, GridReport, GridSummaryRow, RunReport,
};
pub use problem::{cmd_reference, Problem};
pub use verify::{cmd_verify, VerifyConfig, VerifyReport};
