//! Utilisation, power, distance and penalty arithmetic.
//!
//! Everything here is a pure function of its arguments. The engine calls these
//! while simulating; the ledger-replay tests call them again on the event log
//! and expect identical totals.

use std::collections::BTreeMap;

use super::config::{DurationModel, EnergyModel, VecsConfig};
use super::task::{BsId, Criticality, Point, Task, TaskId, Time};
use super::ModelError;

/// Tolerance for utilisation comparisons.
pub const UTIL_EPS: f64 = 1e-9;

/// Smallest share of a core that still lets `task` finish when started at `start`.
pub fn min_utilisation(task: &Task, start: Time) -> Result<f64, ModelError> {
    if start >= task.deadline {
        return Err(ModelError::InfeasibleStart {
            task: task.id,
            start,
            deadline: task.deadline,
        });
    }
    Ok(task.min_processing as f64 / (task.deadline - start) as f64)
}

/// Effective (integer) processing time of `task` run at utilisation `u` from `start`:
/// `ceil(u * (d - start))`, never below the task's minimum processing time.
pub fn stretched_processing(task: &Task, start: Time, u: f64) -> Result<Time, ModelError> {
    let u_min = min_utilisation(task, start)?;
    if u + UTIL_EPS < u_min {
        return Err(ModelError::UtilisationTooLow {
            task: task.id,
            u,
            u_min,
        });
    }
    if u > 1.0 + UTIL_EPS {
        return Err(ModelError::UtilisationTooHigh { task: task.id, u });
    }
    let window = task.deadline - start;
    let raw = (u * window as f64 - UTIL_EPS).ceil().max(0.0) as Time;
    let stretched = raw.max(task.min_processing);
    if start + stretched > task.deadline {
        return Err(ModelError::DeadlineOverrun {
            task: task.id,
            finish: start + stretched,
            deadline: task.deadline,
        });
    }
    Ok(stretched)
}

/// Reservation length under the constant-work model: `ceil(p / u)`, never
/// below `p`, and the reservation must still end by the deadline.
pub fn elastic_processing(task: &Task, start: Time, u: f64) -> Result<Time, ModelError> {
    let u_min = min_utilisation(task, start)?;
    if u + UTIL_EPS < u_min {
        return Err(ModelError::UtilisationTooLow {
            task: task.id,
            u,
            u_min,
        });
    }
    if u > 1.0 + UTIL_EPS {
        return Err(ModelError::UtilisationTooHigh { task: task.id, u });
    }
    let raw = (task.min_processing as f64 / u - UTIL_EPS).ceil().max(0.0) as Time;
    let stretched = raw.max(task.min_processing);
    if start + stretched > task.deadline {
        return Err(ModelError::DeadlineOverrun {
            task: task.id,
            finish: start + stretched,
            deadline: task.deadline,
        });
    }
    Ok(stretched)
}

/// Reservation length for `u` under the configured duration model.
pub fn reservation_length(
    task: &Task,
    start: Time,
    u: f64,
    cfg: &VecsConfig,
) -> Result<Time, ModelError> {
    match cfg.duration_model {
        DurationModel::Literal => stretched_processing(task, start, u),
        DurationModel::Elastic => elastic_processing(task, start, u),
    }
}

/// Power drawn by one base station carrying `u_committed` cores of load.
pub fn instantaneous_power(u_committed: f64, cfg: &VecsConfig) -> f64 {
    let load = (u_committed / cfg.bs_capacity).clamp(0.0, 1.0);
    match cfg.energy_model {
        EnergyModel::Cubic => cfg.p_static + (cfg.p_max - cfg.p_static) * load.powi(3),
        EnergyModel::Literal => cfg.p_static + ((cfg.p_max - cfg.p_static) + load.powi(3)),
    }
}

/// Total energy over `[0, horizon)` for a set of per-slot load calendars.
/// Slots past the end of a calendar count as idle.
pub fn energy_cost<'a, I>(calendars: I, horizon: Time, cfg: &VecsConfig) -> f64
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let horizon = horizon as usize;
    calendars
        .into_iter()
        .map(|cal| {
            let busy: f64 = cal
                .iter()
                .take(horizon)
                .map(|&u| instantaneous_power(u, cfg))
                .sum();
            let idle_slots = horizon.saturating_sub(cal.len());
            busy + idle_slots as f64 * instantaneous_power(0.0, cfg)
        })
        .sum()
}

/// Euclidean distance between two grid points.
pub fn offload_distance(av: Point, bs: Point) -> f64 {
    let dx = (av.x - bs.x) as f64;
    let dy = (av.y - bs.y) as f64;
    dx.hypot(dy)
}

/// Where a task ended up being served.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Site {
    Bs(BsId),
    Cloud,
}

/// The `y` / `z` indicator pair for one task.
///
/// `scheduled_at` is `Some` exactly when `y = 1` for one site; `dropped` is `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskOutcome {
    pub task: TaskId,
    pub flag: Criticality,
    pub scheduled_at: Option<Site>,
    pub dropped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutcomeKind {
    Completed,
    Evicted,
    NeverScheduled,
}

impl TaskOutcome {
    pub fn pending(task: &Task) -> Self {
        TaskOutcome {
            task: task.id,
            flag: task.flag,
            scheduled_at: None,
            dropped: false,
        }
    }

    pub fn kind(&self) -> Result<OutcomeKind, ModelError> {
        match (self.scheduled_at.is_some(), self.dropped) {
            (true, false) => Ok(OutcomeKind::Completed),
            (true, true) => Ok(OutcomeKind::Evicted),
            (false, false) => Ok(OutcomeKind::NeverScheduled),
            (false, true) => Err(ModelError::LedgerCorruption { task: self.task }),
        }
    }
}

/// Drop penalty summed over task outcomes:
/// `sum_i ((1 - sum_j y_ij) + sum_j z_ij y_ij) (1 + delta) pen_i`.
pub fn drop_penalty<'a, I>(outcomes: I, cfg: &VecsConfig) -> Result<f64, ModelError>
where
    I: IntoIterator<Item = &'a TaskOutcome>,
{
    let mut total = 0.0;
    for o in outcomes {
        let y = if o.scheduled_at.is_some() { 1.0 } else { 0.0 };
        let z = if o.dropped { 1.0 } else { 0.0 };
        if z > y {
            return Err(ModelError::LedgerCorruption { task: o.task });
        }
        total += ((1.0 - y) + z * y) * (1.0 + cfg.delta_pen) * cfg.penalty(o.flag.is_hard());
    }
    Ok(total)
}

/// Running cost components and per-task indicator records.
#[derive(Debug, Clone, PartialEq)]
pub struct CostLedger {
    pub c_drop: f64,
    pub c_dis: f64,
    pub c_e: f64,
    pub lambda_e: f64,
    pub lambda_dis: f64,
    pub outcomes: BTreeMap<TaskId, TaskOutcome>,
}

impl CostLedger {
    pub fn new(cfg: &VecsConfig) -> Self {
        CostLedger {
            c_drop: 0.0,
            c_dis: 0.0,
            c_e: 0.0,
            lambda_e: cfg.lambda_e,
            lambda_dis: cfg.lambda_dis,
            outcomes: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, task: &Task) {
        self.outcomes.insert(task.id, TaskOutcome::pending(task));
    }

    /// Sets `y = 1` for `site` and charges the offload distance.
    pub fn record_scheduled(
        &mut self,
        task: TaskId,
        site: Site,
        distance: f64,
    ) -> Result<(), ModelError> {
        let o = self
            .outcomes
            .get_mut(&task)
            .ok_or(ModelError::LedgerCorruption { task })?;
        if o.scheduled_at.is_some() || o.dropped {
            return Err(ModelError::LedgerCorruption { task });
        }
        o.scheduled_at = Some(site);
        self.c_dis += distance;
        Ok(())
    }

    /// Sets `z = 1` for a scheduled task and charges its penalty.
    pub fn record_evicted(&mut self, task: TaskId, cfg: &VecsConfig) -> Result<(), ModelError> {
        let o = self
            .outcomes
            .get_mut(&task)
            .ok_or(ModelError::LedgerCorruption { task })?;
        if o.scheduled_at.is_none() || o.dropped {
            return Err(ModelError::LedgerCorruption { task });
        }
        o.dropped = true;
        self.c_drop += (1.0 + cfg.delta_pen) * cfg.penalty(o.flag.is_hard());
        Ok(())
    }

    /// Charges the penalty of a task that was never placed anywhere.
    pub fn record_unscheduled(&mut self, task: TaskId, cfg: &VecsConfig) -> Result<(), ModelError> {
        let o = self
            .outcomes
            .get(&task)
            .ok_or(ModelError::LedgerCorruption { task })?;
        if o.scheduled_at.is_some() {
            return Err(ModelError::LedgerCorruption { task });
        }
        self.c_drop += (1.0 + cfg.delta_pen) * cfg.penalty(o.flag.is_hard());
        Ok(())
    }

    pub fn total(&self) -> f64 {
        total_cost(self)
    }
}

/// `C_drop + lambda_dis * C_dis + lambda_e * C_e`.
pub fn total_cost(ledger: &CostLedger) -> f64 {
    ledger.c_drop + ledger.lambda_dis * ledger.c_dis + ledger.lambda_e * ledger.c_e
}
