//! Domain types and the closed-form cost and utilisation model.

mod allocation;
mod config;
mod cost;
mod task;

use thiserror::Error;

pub use allocation::{AllocState, Allocation};
pub use config::{DurationModel, EnergyModel, VecsConfig, CONFIG_KEYS};
pub use cost::{
    drop_penalty, elastic_processing, energy_cost, instantaneous_power, min_utilisation,
    offload_distance, reservation_length, stretched_processing, total_cost, CostLedger,
    OutcomeKind, Site, TaskOutcome, UTIL_EPS,
};
pub use task::{slack_class, AvId, BsId, Criticality, Point, SlackClass, Task, TaskId, Time};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("task {task}: start {start} is not before deadline {deadline}")]
    InfeasibleStart {
        task: TaskId,
        start: Time,
        deadline: Time,
    },
    #[error("task {task}: utilisation {u} below minimum {u_min}")]
    UtilisationTooLow { task: TaskId, u: f64, u_min: f64 },
    #[error("task {task}: utilisation {u} above one core")]
    UtilisationTooHigh { task: TaskId, u: f64 },
    #[error("task {task}: finish {finish} overruns deadline {deadline}")]
    DeadlineOverrun {
        task: TaskId,
        finish: Time,
        deadline: Time,
    },
    #[error("task {task}: inconsistent scheduled/dropped indicators")]
    LedgerCorruption { task: TaskId },
    #[error("invalid task {task}: {reason}")]
    InvalidTask { task: TaskId, reason: String },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}
