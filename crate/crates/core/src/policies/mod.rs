//! Global-mode placement strategies: Alg. 4 (BS and utility selection),
//! Alg. 5 (soft-task eviction), Algs. 6–8 and the adapted Baruah baseline.
//!
//! Policies only decide. The engine applies the returned decision through
//! `Infra::schedule` / `Infra::evict`, so every placement passes TrySchedule.

mod eviction;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::engine::{feasible_u_min, Infra, Limits, TryOutcome};
use crate::model::{Point, Task, TaskId, Time, VecsConfig};

pub use eviction::{drop_for_hard, EvictionChoice, SEARCH_BUDGET};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("Alg. 5 invoked for soft task {0}")]
    SoftEviction(TaskId),
    #[error("unknown policy `{0}` (expected selfish_holding, nearest, dynamic_holding or baruah_baseline)")]
    UnknownPolicy(String),
    #[error("dynamic holding needs a non-empty u_fav list")]
    EmptyFavourites,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolicyId {
    SelfishHolding,
    Nearest,
    DynamicHolding,
    BaruahBaseline,
}

impl PolicyId {
    pub const ALL: [PolicyId; 4] = [
        PolicyId::SelfishHolding,
        PolicyId::Nearest,
        PolicyId::DynamicHolding,
        PolicyId::BaruahBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyId::SelfishHolding => "selfish_holding",
            PolicyId::Nearest => "nearest",
            PolicyId::DynamicHolding => "dynamic_holding",
            PolicyId::BaruahBaseline => "baruah_baseline",
        }
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyId {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().replace('-', "_");
        PolicyId::ALL
            .into_iter()
            .find(|p| p.name() == norm)
            .or(match norm.as_str() {
                "selfish" => Some(PolicyId::SelfishHolding),
                "dynamic" => Some(PolicyId::DynamicHolding),
                "baruah" => Some(PolicyId::BaruahBaseline),
                _ => None,
            })
            .ok_or_else(|| PolicyError::UnknownPolicy(s.to_string()))
    }
}

/// How a placement was found; fixes which load cap it had to respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlacementMode {
    /// Local-mode admission under `U^T`.
    Local,
    /// Alg. 4 under `Û^max · U^max` and `D̂^max`.
    Alg4,
    /// Alg. 7's nearest station under `Û^max · U^max`.
    Nearest,
    /// Baruah least-loaded station under `U^max`.
    Baruah,
    /// Alg. 5 placement after evictions, under the policy's global cap.
    Evict,
}

impl PlacementMode {
    pub fn name(self) -> &'static str {
        match self {
            PlacementMode::Local => "local",
            PlacementMode::Alg4 => "alg4",
            PlacementMode::Nearest => "nearest",
            PlacementMode::Baruah => "baruah",
            PlacementMode::Evict => "evict",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            PlacementMode::Local,
            PlacementMode::Alg4,
            PlacementMode::Nearest,
            PlacementMode::Baruah,
            PlacementMode::Evict,
        ]
        .into_iter()
        .find(|m| m.name() == s)
    }
}

/// Alg. 4 input: the task, candidate utilisation, batch and an immutable view of the infrastructure.
#[derive(Debug, Clone, Copy)]
pub struct PlacementQuery<'a> {
    pub task: &'a Task,
    pub u: f64,
    pub batch: Time,
    /// AV location at request time.
    pub av: Point,
    pub infra: &'a Infra,
}

/// What a policy wants done with one queued task.
#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Place(TryOutcome, PlacementMode),
    Evict(EvictionChoice),
    /// No base station now; the engine retries, sends to the cloud or drops.
    Unplaced,
}

/// Limits used by Alg. 4.
pub fn alg4_limits(infra: &Infra) -> Limits {
    Limits {
        cap: infra.cfg.global_cap(),
        radius: Some(infra.cfg.d_hat_max),
    }
}

/// Alg. 4: among stations meeting the `Û^max`, deadline and `D̂^max` conditions,
/// the one minimising `λ_e·ΔC_e + λ_dis·ΔC_dis`; ties go to lower distance, then lower id.
pub fn select_bs_and_utility(q: &PlacementQuery<'_>) -> Option<TryOutcome> {
    let cfg = &q.infra.cfg;
    let limits = alg4_limits(q.infra);
    q.infra
        .stations
        .iter()
        .filter_map(|s| {
            q.infra
                .try_schedule(s.id, q.task, q.u, q.batch, q.av, limits)
        })
        .map(|o| (cfg.lambda_e * o.d_energy + cfg.lambda_dis * o.distance, o))
        .min_by(|(ca, a), (cb, b)| {
            ca.total_cmp(cb)
                .then(a.distance.total_cmp(&b.distance))
                .then(a.bs.cmp(&b.bs))
        })
        .map(|(_, o)| o)
}

fn alg4(task: &Task, u: f64, batch: Time, av: Point, infra: &Infra) -> Option<Decision> {
    select_bs_and_utility(&PlacementQuery {
        task,
        u,
        batch,
        av,
        infra,
    })
    .map(|o| Decision::Place(o, PlacementMode::Alg4))
}

/// Load cap for a global-mode placement by `policy`: `Û^max · U^max` for the
/// proposed policies, plain `U^max` for the Baruah baseline.
pub fn placement_cap(policy: PolicyId, cfg: &VecsConfig) -> f64 {
    match policy {
        PolicyId::BaruahBaseline => cfg.bs_capacity,
        _ => cfg.global_cap(),
    }
}

/// Limits for `policy`'s Alg. 5 fallback: its placement cap, and the `D̂^max`
/// service radius except for the Baruah baseline, which ignores distance.
pub fn eviction_limits(policy: PolicyId, cfg: &VecsConfig) -> Limits {
    Limits {
        cap: placement_cap(policy, cfg),
        radius: match policy {
            PolicyId::BaruahBaseline => None,
            _ => Some(cfg.d_hat_max),
        },
    }
}

fn hard_fallback(
    policy: PolicyId,
    task: &Task,
    batch: Time,
    av: Point,
    infra: &Infra,
) -> Result<Decision, PolicyError> {
    if !task.is_hard() {
        return Ok(Decision::Unplaced);
    }
    let limits = eviction_limits(policy, &infra.cfg);
    Ok(match drop_for_hard(infra, task, batch, av, limits)? {
        Some(choice) => Decision::Evict(choice),
        None => Decision::Unplaced,
    })
}

/// Alg. 6: Alg. 4 at `u^max`, then Alg. 5 for hard tasks.
pub fn policy_selfish(
    task: &Task,
    batch: Time,
    av: Point,
    infra: &Infra,
) -> Result<Decision, PolicyError> {
    match alg4(task, infra.cfg.u_max_per_task, batch, av, infra) {
        Some(d) => Ok(d),
        None => hard_fallback(PolicyId::SelfishHolding, task, batch, av, infra),
    }
}

/// Alg. 7: only the nearest station, at `u^min`, under `Û^max · U^max`.
pub fn policy_nearest(
    task: &Task,
    batch: Time,
    av: Point,
    infra: &Infra,
) -> Result<Decision, PolicyError> {
    let placed = infra.nearest(av).and_then(|bs| {
        let u = feasible_u_min(task, batch)?;
        let limits = Limits {
            cap: infra.cfg.global_cap(),
            radius: None,
        };
        infra.try_schedule(bs, task, u, batch, av, limits)
    });
    match placed {
        Some(o) => Ok(Decision::Place(o, PlacementMode::Nearest)),
        None => hard_fallback(PolicyId::Nearest, task, batch, av, infra),
    }
}

/// Alg. 8: Alg. 4 over `u_fav` descending, then Alg. 4 at `u^min`, then Alg. 5 for hard tasks.
pub fn policy_dynamic(
    task: &Task,
    batch: Time,
    av: Point,
    infra: &Infra,
) -> Result<Decision, PolicyError> {
    if infra.cfg.u_fav.is_empty() {
        return Err(PolicyError::EmptyFavourites);
    }
    for &u in &infra.cfg.u_fav {
        if let Some(d) = alg4(task, u, batch, av, infra) {
            return Ok(d);
        }
    }
    if let Some(u) = feasible_u_min(task, batch) {
        if let Some(d) = alg4(task, u, batch, av, infra) {
            return Ok(d);
        }
    }
    hard_fallback(PolicyId::DynamicHolding, task, batch, av, infra)
}

/// Adapted Baruah: `u^max` on the station with the lowest committed load at the
/// batch start, subject only to `U^max` and the deadline; ties go to the lower id.
pub fn policy_baruah(
    task: &Task,
    batch: Time,
    av: Point,
    infra: &Infra,
) -> Result<Decision, PolicyError> {
    let limits = Limits {
        cap: infra.cfg.bs_capacity,
        radius: None,
    };
    let best = infra
        .stations
        .iter()
        .filter_map(|s| {
            infra
                .try_schedule(s.id, task, infra.cfg.u_max_per_task, batch, av, limits)
                .map(|o| (s.load_at(batch), o))
        })
        .min_by(|(la, a), (lb, b)| la.total_cmp(lb).then(a.bs.cmp(&b.bs)));
    match best {
        Some((_, o)) => Ok(Decision::Place(o, PlacementMode::Baruah)),
        None => hard_fallback(PolicyId::BaruahBaseline, task, batch, av, infra),
    }
}

/// Runs `policy` for one queued task at batch boundary `batch`.
pub fn decide(
    policy: PolicyId,
    task: &Task,
    batch: Time,
    av: Point,
    infra: &Infra,
) -> Result<Decision, PolicyError> {
    match policy {
        PolicyId::SelfishHolding => policy_selfish(task, batch, av, infra),
        PolicyId::Nearest => policy_nearest(task, batch, av, infra),
        PolicyId::DynamicHolding => policy_dynamic(task, batch, av, infra),
        PolicyId::BaruahBaseline => policy_baruah(task, batch, av, infra),
    }
}
