//! Mixed-criticality task offloading in a vehicular edge cloud.
//!
//! Vehicles offload hard and soft deadline tasks to grid-located base
//! stations. Lightly loaded stations admit work on their own (local mode);
//! overflow is escalated to a centralized scheduler that places tasks in
//! batches using one of several policies (global mode). Every run is
//! deterministic and charges drop penalties, energy and offload distance to a
//! cost ledger.
//!
//! Crate layout:
//!
//! * [`model`] — task, allocation and config types plus the cost arithmetic.
//! * [`workload`] — synthetic generation, trace ingestion, scenario files.
//! * [`engine`] — the batched discrete-event simulator and event log.
//! * [`policies`] — global-mode placement strategies and soft-task eviction.
//! * [`harness`] — experiment plans, hyperparameter sweeps and CSV series.

pub mod engine;
pub mod harness;
pub mod model;
pub mod policies;
pub mod workload;
