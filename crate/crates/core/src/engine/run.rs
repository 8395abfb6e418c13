//! The batch loop. At every boundary `b = k·t_β`, in order:
//!
//! 1. execute and complete: reservations that have begun start executing,
//!    allocations with `f ≤ b` complete;
//! 2. local mode for tasks whose earliest start is `b` (Algs. 1–2): TORs to
//!    every station within `D̂^max`, first TOA wins, otherwise a TSR;
//! 3. the central scheduler's batch (Alg. 3): purge hopeless tasks, sort by
//!    criticality then EDF, run the policy, and use the cloud as a last resort.

use super::infra::{feasible_u_min, Infra, Limits, TryOutcome};
use super::report::{OutcomeCounts, RunReport};
use super::{EngineError, Event, EventKind, EventLog};
use crate::model::{
    offload_distance, AllocState, BsId, CostLedger, Point, Site, Task, Time, VecsConfig, UTIL_EPS,
};
use crate::policies::{decide, placement_cap, Decision, PlacementMode, PolicyId};
use crate::workload::Scenario;

/// First batch boundary at which a task may start: `next_boundary(a + Δ)`.
pub fn earliest_start(task: &Task, cfg: &VecsConfig) -> Time {
    cfg.next_boundary(task.arrival + cfg.delta_latency)
}

/// Local-mode scan: `u^max`, then down in `local_step` steps while above `u^min`, then `u^min`.
pub fn local_scan_grid(u_min: f64, cfg: &VecsConfig) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        let u = cfg.u_max_per_task - f64::from(k) * cfg.local_step;
        if u <= u_min + UTIL_EPS {
            break;
        }
        grid.push(u);
        k += 1;
    }
    grid.push(u_min);
    grid
}

/// Alg. 2: the highest utilisation in the scan grid that keeps `U_j(t) + u ≤ U^T`
/// over the whole reservation; `None` means the station stays silent.
pub fn bs_local_admit(
    infra: &Infra,
    bs: BsId,
    task: &Task,
    start: Time,
    av: Point,
) -> Option<TryOutcome> {
    let u_min = feasible_u_min(task, start)?;
    let limits = Limits {
        cap: infra.cfg.u_threshold,
        radius: None,
    };
    local_scan_grid(u_min, &infra.cfg)
        .into_iter()
        .find_map(|u| infra.try_schedule(bs, task, u, start, av, limits))
}

fn cap_of(mode: PlacementMode, policy: PolicyId, cfg: &VecsConfig) -> f64 {
    match mode {
        PlacementMode::Local => cfg.u_threshold,
        PlacementMode::Alg4 | PlacementMode::Nearest => cfg.global_cap(),
        PlacementMode::Baruah => cfg.bs_capacity,
        PlacementMode::Evict => placement_cap(policy, cfg),
    }
}

struct Sim<'a> {
    scenario: &'a Scenario,
    cfg: &'a VecsConfig,
    policy: PolicyId,
    infra: Infra,
    ledger: CostLedger,
    log: EventLog,
    /// Allocations not yet completed or dropped, as `(bs, task index)`.
    live: Vec<(BsId, usize)>,
    /// Indices of tasks waiting for the central scheduler.
    queue: Vec<usize>,
    counts: OutcomeCounts,
}

impl Sim<'_> {
    fn task(&self, i: usize) -> &Task {
        &self.scenario.tasks[i]
    }

    fn place(
        &mut self,
        i: usize,
        now: Time,
        o: &TryOutcome,
        mode: PlacementMode,
    ) -> Result<(), EngineError> {
        let task = &self.scenario.tasks[i];
        let cap = cap_of(mode, self.policy, self.cfg);
        if !self.infra.fits(o.bs, o.start, o.finish, o.u, cap) {
            return Err(EngineError::Invariant(format!(
                "{} placement of task {} on {} exceeds its cap {cap}",
                mode.name(),
                task.id,
                o.bs
            )));
        }
        self.infra.schedule(task, o)?;
        self.ledger
            .record_scheduled(task.id, Site::Bs(o.bs), o.distance)?;
        if mode != PlacementMode::Local {
            self.log.push(
                Event::new(now, EventKind::Tea, task.id)
                    .bs(o.bs)
                    .u(o.u)
                    .with("start", o.start),
            );
            self.counts.global += 1;
        } else {
            self.counts.local += 1;
        }
        self.log.push(
            Event::new(now, EventKind::Alloc, task.id)
                .bs(o.bs)
                .u(o.u)
                .with("start", o.start)
                .with("finish", o.finish)
                .with("dist", o.distance)
                .with("mode", mode.name())
                .with("cap", cap),
        );
        self.live.push((o.bs, i));
        Ok(())
    }

    fn drop_unscheduled(&mut self, i: usize, now: Time, reason: &str) -> Result<(), EngineError> {
        let task = self.task(i).clone();
        self.ledger.record_unscheduled(task.id, self.cfg)?;
        self.log.push(
            Event::new(now, EventKind::Drop, task.id)
                .with("flag", task.flag.code())
                .with("reason", reason),
        );
        Ok(())
    }

    fn cloud_or_drop(&mut self, i: usize, now: Time, reason: &str) -> Result<(), EngineError> {
        let task = self.task(i).clone();
        if now + self.cfg.cloud_latency <= task.deadline {
            let dist = 2.0 * self.cfg.d_hat_max;
            self.ledger.record_scheduled(task.id, Site::Cloud, dist)?;
            self.log.push(
                Event::new(now, EventKind::Cloud, task.id)
                    .with("flag", task.flag.code())
                    .with("dist", dist)
                    .with("finish", now + self.cfg.cloud_latency),
            );
            Ok(())
        } else {
            self.drop_unscheduled(i, now, reason)
        }
    }

    /// Step 1: reserved allocations that have begun start executing; finished ones complete.
    fn execute_and_complete(&mut self, now: Time) {
        let mut still = Vec::with_capacity(self.live.len());
        let mut done = Vec::new();
        for &(bs, i) in &self.live {
            let id = self.scenario.tasks[i].id;
            let Some(a) = self.infra.allocation_mut(bs, id) else {
                continue;
            };
            match a.state {
                AllocState::Dropped | AllocState::Completed => continue,
                AllocState::Reserved if a.start < now || a.finish <= now => {
                    a.state = AllocState::Executing;
                    self.log
                        .push(Event::new(a.start, EventKind::Start, id).bs(bs).u(a.u));
                }
                _ => {}
            }
            if a.finish <= now {
                a.state = AllocState::Completed;
                done.push((a.finish, id, bs));
            } else {
                still.push((bs, i));
            }
        }
        done.sort();
        for (f, id, bs) in done {
            self.log.push(Event::new(f, EventKind::Complete, id).bs(bs));
        }
        self.live = still;
    }

    /// Step 2: Alg. 1 at the vehicle and Alg. 2 at every station in range.
    fn av_offer_phase(&mut self, i: usize, now: Time) -> Result<(), EngineError> {
        let task = self.task(i).clone();
        let av = self.scenario.request_location(&task);
        let mut offers: Vec<(f64, TryOutcome)> = Vec::new();
        for s in &self.infra.stations {
            let dist = offload_distance(av, s.location);
            if dist > self.cfg.d_hat_max + UTIL_EPS {
                continue;
            }
            self.log.push(
                Event::new(now, EventKind::Tor, task.id)
                    .bs(s.id)
                    .with("flag", task.flag.code()),
            );
            if let Some(o) = bs_local_admit(&self.infra, s.id, &task, now, av) {
                let latency = dist / self.cfg.msg_speed;
                if latency <= self.cfg.delta_latency as f64 + UTIL_EPS {
                    offers.push((latency, o));
                }
            }
        }
        for (latency, o) in &offers {
            self.log.push(
                Event::new(now, EventKind::Toa, task.id)
                    .bs(o.bs)
                    .u(o.u)
                    .with("latency", latency),
            );
        }
        let winner = offers
            .iter()
            .min_by(|(la, a), (lb, b)| la.total_cmp(lb).then(a.bs.cmp(&b.bs)))
            .map(|(_, o)| *o);
        match winner {
            Some(w) => {
                for (_, o) in offers.iter().filter(|(_, o)| o.bs != w.bs) {
                    self.log
                        .push(Event::new(now, EventKind::Nack, task.id).bs(o.bs));
                }
                self.place(i, now, &w, PlacementMode::Local)
            }
            None => {
                let router = self.infra.nearest(av).ok_or_else(|| {
                    EngineError::Scenario("tasks present but no base stations".into())
                })?;
                self.log.push(
                    Event::new(now, EventKind::Tsr, task.id)
                        .bs(router)
                        .with("x", av.x)
                        .with("y", av.y),
                );
                self.queue.push(i);
                Ok(())
            }
        }
    }

    /// Step 3: Alg. 3 for one batch.
    fn cs_batch_schedule(&mut self, now: Time) -> Result<(), EngineError> {
        let mut queue = std::mem::take(&mut self.queue);
        let mut keep = Vec::with_capacity(queue.len());
        for &i in &queue {
            let t = self.task(i);
            if now + t.min_processing > t.deadline {
                self.drop_unscheduled(i, now, "expired")?;
            } else {
                keep.push(i);
            }
        }
        queue = keep;
        let tasks = &self.scenario.tasks;
        queue.sort_by_key(|&i| (!tasks[i].is_hard(), tasks[i].deadline, tasks[i].id));

        for i in queue {
            let task = self.task(i).clone();
            let av = self.scenario.request_location(&task);
            match decide(self.policy, &task, now, av, &self.infra)? {
                Decision::Place(o, mode) => self.place(i, now, &o, mode)?,
                Decision::Evict(choice) => {
                    for &victim in &choice.evict {
                        let a = self.infra.evict(choice.bs, victim, now)?;
                        self.ledger.record_evicted(victim, self.cfg)?;
                        self.log.push(
                            Event::new(now, EventKind::Evict, victim)
                                .bs(choice.bs)
                                .u(a.u)
                                .with("flag", 'S')
                                .with("by", task.id),
                        );
                    }
                    if choice.greedy {
                        self.counts.greedy_evictions += 1;
                    }
                    self.place(i, now, &choice.placement, PlacementMode::Evict)?;
                }
                Decision::Unplaced if task.is_hard() => {
                    self.cloud_or_drop(i, now, "no_capacity")?
                }
                Decision::Unplaced => {
                    // Last chance: it could not start at the next boundary either.
                    if now + self.cfg.t_beta + task.min_processing > task.deadline {
                        self.cloud_or_drop(i, now, "expired")?;
                    } else {
                        self.queue.push(i);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Simulates `scenario` under `policy`. Task failures become drop penalties;
/// an `Err` means an internal invariant broke.
pub fn run(scenario: &Scenario, policy: PolicyId) -> Result<RunReport, EngineError> {
    scenario
        .validate()
        .map_err(|e| EngineError::Scenario(e.to_string()))?;
    let cfg = &scenario.cfg;
    let horizon = scenario.horizon();
    let mut ledger = CostLedger::new(cfg);
    for t in &scenario.tasks {
        ledger.register(t);
    }
    let log = EventLog {
        meta: vec![
            ("policy".into(), policy.name().into()),
            ("seed".into(), scenario.seed.to_string()),
            ("horizon".into(), horizon.to_string()),
            ("n_bs".into(), scenario.n_bs().to_string()),
            ("n_tasks".into(), scenario.tasks.len().to_string()),
        ],
        ..EventLog::default()
    };
    let mut sim = Sim {
        scenario,
        cfg,
        policy,
        infra: Infra::new(cfg, &scenario.bs_locations, horizon),
        ledger,
        log,
        live: Vec::new(),
        queue: Vec::new(),
        counts: OutcomeCounts::default(),
    };

    let mut order: Vec<usize> = (0..scenario.tasks.len()).collect();
    order.sort_by_key(|&i| {
        let t = &scenario.tasks[i];
        (earliest_start(t, cfg), t.arrival, t.id)
    });
    let mut next = 0;
    let mut batch_peak = Vec::new();
    let mut now = 0;
    loop {
        sim.execute_and_complete(now);
        while next < order.len() && earliest_start(&scenario.tasks[order[next]], cfg) <= now {
            sim.av_offer_phase(order[next], now)?;
            next += 1;
        }
        sim.cs_batch_schedule(now)?;
        if now < horizon {
            let peak = sim
                .infra
                .stations
                .iter()
                .map(|s| s.load_at(now))
                .fold(0.0, f64::max);
            batch_peak.push((now, peak));
        }
        if now >= horizon {
            break;
        }
        now += cfg.t_beta;
    }
    for i in std::mem::take(&mut sim.queue) {
        sim.drop_unscheduled(i, now, "end_of_run")?;
    }
    if next != order.len() || !sim.live.is_empty() {
        return Err(EngineError::Invariant(format!(
            "run ended with {} unprocessed tasks and {} live allocations",
            order.len() - next,
            sim.live.len()
        )));
    }

    sim.ledger.c_e = sim.infra.total_energy();
    for o in sim.ledger.outcomes.values() {
        o.kind()?;
    }
    let mut counts = OutcomeCounts::tally(&sim.ledger);
    counts.local = sim.counts.local;
    counts.global = sim.counts.global;
    counts.greedy_evictions = sim.counts.greedy_evictions;
    if counts.evicted_hard > 0 {
        return Err(EngineError::Invariant("a hard task was evicted".into()));
    }
    let mut notes = vec![format!(
        "centralized cloud: unlimited capacity, latency {}, distance cost {} per task, no BS energy",
        cfg.cloud_latency,
        2.0 * cfg.d_hat_max
    )];
    if policy == PolicyId::BaruahBaseline {
        notes.push(
            "baruah baseline ignores the u_hat_max and d_hat_max caps (hard capacity only)".into(),
        );
    }
    if counts.greedy_evictions > 0 {
        notes.push(format!(
            "{} eviction searches exceeded the exact-search budget and used a greedy cover",
            counts.greedy_evictions
        ));
    }
    Ok(RunReport {
        policy,
        seed: scenario.seed,
        horizon,
        n_tasks: scenario.tasks.len(),
        n_bs: scenario.n_bs(),
        ledger: sim.ledger,
        counts,
        batch_peak,
        log: sim.log,
        notes,
    })
}
