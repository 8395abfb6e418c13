//! Batched discrete-event simulation of the local/global offloading protocol.

mod event_log;
mod infra;
mod report;
mod run;

use thiserror::Error;

use crate::model::ModelError;
use crate::policies::PolicyError;

pub use event_log::{Event, EventKind, EventLog, LOG_HEADER};
pub use infra::{feasible_u_min, BaseStation, Infra, Limits, TryOutcome};
pub use report::{OutcomeCounts, RunReport};
pub use run::{bs_local_admit, earliest_start, local_scan_grid, run};

#[derive(Debug, Error)]
pub enum EngineError {
    /// A bookkeeping invariant broke; this is a bug, never a task outcome.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}
