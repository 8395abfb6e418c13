//! Shared oracles for the integration and acceptance tests: event-log replay,
//! run invariant checks and a micro-scenario builder.
#![allow(dead_code)]

pub mod alg5;
pub mod brute;

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vecsched::engine::{earliest_start, EventKind, EventLog, RunReport};
use vecsched::model::{
    energy_cost, min_utilisation, offload_distance, AvId, BsId, Criticality, Point, Task, TaskId,
    Time, VecsConfig,
};
use vecsched::policies::{placement_cap, PlacementMode, PolicyId};
use vecsched::workload::Scenario;

pub const EPS: f64 = 1e-9;

/// Cost components recomputed from an event log alone (plus the scenario's
/// task flags, locations and config).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replay {
    pub c_drop: f64,
    pub c_dis: f64,
    pub c_e: f64,
}

#[derive(Debug, Clone, Copy)]
struct Res {
    u: f64,
    start: Time,
    end: Time,
}

fn parse_f64(e: &vecsched::engine::Event, key: &str) -> Result<f64, String> {
    e.get_as(key)
        .ok_or_else(|| format!("{} event for task {} lacks `{key}`", e.kind.name(), e.task))
}

/// Replays `log`: penalties in log order, distances in log order, energy
/// from per-station calendars summed in task-id order (the engine's
/// canonical order).
pub fn replay(s: &Scenario, log: &EventLog) -> Result<Replay, String> {
    let cfg = &s.cfg;
    let horizon: Time = log
        .meta("horizon")
        .and_then(|h| h.parse().ok())
        .ok_or("log header lacks horizon")?;
    let flags: BTreeMap<TaskId, Criticality> = s.tasks.iter().map(|t| (t.id, t.flag)).collect();
    let pen = |id: TaskId| -> Result<f64, String> {
        let f = flags.get(&id).ok_or(format!("unknown task {id}"))?;
        Ok((1.0 + cfg.delta_pen) * cfg.penalty(*f == Criticality::Hard))
    };
    let mut per_bs: Vec<BTreeMap<TaskId, Res>> = vec![BTreeMap::new(); s.n_bs()];
    let (mut c_drop, mut c_dis) = (0.0, 0.0);
    for e in &log.events {
        match e.kind {
            EventKind::Alloc => {
                let bs = e.bs.ok_or("ALLOC without bs")?;
                let u = e.u.ok_or("ALLOC without u")?;
                let start: Time = e.get_as("start").ok_or("ALLOC without start")?;
                let finish: Time = e.get_as("finish").ok_or("ALLOC without finish")?;
                c_dis += parse_f64(e, "dist")?;
                per_bs[bs.0 as usize].insert(
                    e.task,
                    Res {
                        u,
                        start,
                        end: finish,
                    },
                );
            }
            EventKind::Cloud => c_dis += parse_f64(e, "dist")?,
            EventKind::Evict => {
                c_drop += pen(e.task)?;
                let bs = e.bs.ok_or("EVICT without bs")?;
                let r = per_bs[bs.0 as usize]
                    .get_mut(&e.task)
                    .ok_or(format!("EVICT of unallocated task {}", e.task))?;
                r.end = e.time.max(r.start);
            }
            EventKind::Drop => c_drop += pen(e.task)?,
            _ => {}
        }
    }
    let cals: Vec<Vec<f64>> = per_bs
        .iter()
        .map(|allocs| {
            let mut cal = vec![0.0; horizon as usize];
            for r in allocs.values() {
                for slot in &mut cal[r.start as usize..r.end.min(horizon) as usize] {
                    *slot += r.u;
                }
            }
            cal
        })
        .collect();
    let c_e = energy_cost(cals.iter().map(Vec::as_slice), horizon, cfg);
    Ok(Replay { c_drop, c_dis, c_e })
}

/// Load cap a placement of `mode` must respect under `policy`.
pub fn expected_cap(mode: PlacementMode, policy: PolicyId, cfg: &VecsConfig) -> f64 {
    match mode {
        PlacementMode::Local => cfg.u_threshold,
        PlacementMode::Alg4 | PlacementMode::Nearest => cfg.u_hat_max * cfg.bs_capacity,
        PlacementMode::Baruah => cfg.bs_capacity,
        PlacementMode::Evict => placement_cap(policy, cfg),
    }
}

fn allowed_modes(policy: PolicyId) -> [PlacementMode; 3] {
    let own = match policy {
        PolicyId::SelfishHolding | PolicyId::DynamicHolding => PlacementMode::Alg4,
        PolicyId::Nearest => PlacementMode::Nearest,
        PolicyId::BaruahBaseline => PlacementMode::Baruah,
    };
    [PlacementMode::Local, own, PlacementMode::Evict]
}

/// Counters gathered while checking a run.
#[derive(Debug, Default, Clone, Copy)]
pub struct CheckStats {
    pub allocs: usize,
    pub evictions: usize,
    pub hard_evictions: usize,
}

/// Checks every structural invariant of one run against its event log.
/// Returns the list of violations (empty when the run is clean).
pub fn check_run(s: &Scenario, policy: PolicyId, report: &RunReport) -> (Vec<String>, CheckStats) {
    let cfg = &s.cfg;
    let log = &report.log;
    let mut bad = Vec::new();
    let mut stats = CheckStats::default();
    let tasks: BTreeMap<TaskId, &Task> = s.tasks.iter().map(|t| (t.id, t)).collect();
    let horizon = report.horizon;
    let mut per_bs: Vec<BTreeMap<TaskId, Res>> = vec![BTreeMap::new(); s.n_bs()];
    // Running per-slot load of each station.
    let mut cal: Vec<Vec<f64>> = vec![vec![0.0; horizon as usize]; s.n_bs()];
    let mut placed: BTreeMap<TaskId, BsId> = BTreeMap::new();
    let mut terminal: BTreeMap<TaskId, Vec<EventKind>> = BTreeMap::new();
    let mut toa: BTreeSet<TaskId> = BTreeSet::new();
    let mut tea: BTreeSet<TaskId> = BTreeSet::new();

    for e in &log.events {
        let Some(task) = tasks.get(&e.task).copied() else {
            bad.push(format!("event for unknown task {}", e.task));
            continue;
        };
        match e.kind {
            EventKind::Toa => {
                toa.insert(e.task);
            }
            EventKind::Tea => {
                tea.insert(e.task);
            }
            EventKind::Alloc => {
                stats.allocs += 1;
                let (
                    Some(bs),
                    Some(u),
                    Some(start),
                    Some(finish),
                    Some(dist),
                    Some(cap),
                    Some(mode),
                ) = (
                    e.bs,
                    e.u,
                    e.get_as::<Time>("start"),
                    e.get_as::<Time>("finish"),
                    e.get_as::<f64>("dist"),
                    e.get_as::<f64>("cap"),
                    e.get("mode").and_then(PlacementMode::from_name),
                )
                else {
                    bad.push(format!("malformed ALLOC for task {}", e.task));
                    continue;
                };
                if let Some(prev) = placed.insert(e.task, bs) {
                    bad.push(format!("task {} allocated twice ({prev} and {bs})", e.task));
                }
                if !allowed_modes(policy).contains(&mode) {
                    bad.push(format!("{policy} produced a {} placement", mode.name()));
                }
                let want = expected_cap(mode, policy, cfg);
                if (cap - want).abs() > EPS {
                    bad.push(format!(
                        "task {}: {} cap {cap}, expected {want}",
                        e.task,
                        mode.name()
                    ));
                }
                if finish > task.deadline {
                    bad.push(format!(
                        "task {}: finish {finish} > deadline {}",
                        e.task, task.deadline
                    ));
                }
                if start != e.time || start < earliest_start(task, cfg) {
                    bad.push(format!(
                        "task {}: start {start} at event time {}",
                        e.task, e.time
                    ));
                }
                if finish > horizon {
                    bad.push(format!("task {}: finish {finish} beyond horizon", e.task));
                }
                match min_utilisation(task, start) {
                    Ok(u_min) if u + EPS >= u_min.min(1.0) && u <= 1.0 + EPS => {}
                    _ => bad.push(format!(
                        "task {}: utilisation {u} outside [u_min, 1]",
                        e.task
                    )),
                }
                let expect_dist = offload_distance(s.request_location(task), s.bs_location(bs));
                if (dist - expect_dist).abs() > EPS {
                    bad.push(format!("task {}: dist {dist} != {expect_dist}", e.task));
                }
                let radius_bound = match mode {
                    PlacementMode::Local | PlacementMode::Alg4 => true,
                    PlacementMode::Evict => policy != PolicyId::BaruahBaseline,
                    PlacementMode::Nearest | PlacementMode::Baruah => false,
                };
                if radius_bound && dist > cfg.d_hat_max + EPS {
                    bad.push(format!(
                        "task {}: {} placement at distance {dist} beyond D̂^max {}",
                        e.task,
                        mode.name(),
                        cfg.d_hat_max
                    ));
                }
                let loads = &mut cal[bs.0 as usize];
                for t in start..finish.min(horizon) {
                    let load = loads[t as usize];
                    if load + u > cap + EPS {
                        bad.push(format!(
                            "task {}: {} placement on {bs} loads slot {t} to {} > cap {cap}",
                            e.task,
                            mode.name(),
                            load + u
                        ));
                        break;
                    }
                }
                for l in &mut loads[start as usize..finish.min(horizon) as usize] {
                    *l += u;
                }
                per_bs[bs.0 as usize].insert(
                    e.task,
                    Res {
                        u,
                        start,
                        end: finish,
                    },
                );
            }
            EventKind::Evict => {
                stats.evictions += 1;
                if task.is_hard() {
                    stats.hard_evictions += 1;
                    bad.push(format!("hard task {} evicted", e.task));
                }
                let Some(bs) = e.bs else {
                    bad.push("EVICT without bs".into());
                    continue;
                };
                match per_bs[bs.0 as usize].get_mut(&e.task) {
                    Some(r) if r.end > e.time => {
                        let from = e.time.max(r.start);
                        for l in &mut cal[bs.0 as usize][from as usize..r.end.min(horizon) as usize]
                        {
                            *l -= r.u;
                        }
                        r.end = from;
                    }
                    _ => bad.push(format!(
                        "EVICT of task {} without a live allocation",
                        e.task
                    )),
                }
                terminal.entry(e.task).or_default().push(e.kind);
            }
            EventKind::Cloud => {
                if placed.contains_key(&e.task) {
                    bad.push(format!("task {} sent to cloud after an allocation", e.task));
                }
                if e.time + cfg.cloud_latency > task.deadline {
                    bad.push(format!("task {} misses its deadline in the cloud", e.task));
                }
                terminal.entry(e.task).or_default().push(e.kind);
            }
            EventKind::Drop => {
                if placed.contains_key(&e.task) {
                    bad.push(format!("task {} dropped after an allocation", e.task));
                }
                terminal.entry(e.task).or_default().push(e.kind);
            }
            EventKind::Complete => {
                if e.time > task.deadline {
                    bad.push(format!(
                        "task {} completed at {} after its deadline",
                        e.task, e.time
                    ));
                }
                terminal.entry(e.task).or_default().push(e.kind);
            }
            _ => {}
        }
    }
    for id in toa.intersection(&tea) {
        bad.push(format!(
            "task {id} received both a TOA-won local placement and a TEA"
        ));
    }
    for t in &s.tasks {
        let outcomes = terminal.get(&t.id).map_or(0, Vec::len);
        if outcomes != 1 {
            bad.push(format!("task {} has {outcomes} terminal events", t.id));
        }
    }
    for (j, loads) in cal.iter().enumerate() {
        for (t, &load) in loads.iter().enumerate() {
            if load > cfg.bs_capacity + EPS {
                bad.push(format!(
                    "BS {j} slot {t}: load {load} > U^max {}",
                    cfg.bs_capacity
                ));
                break;
            }
        }
    }
    (bad, stats)
}

/// Small config with a binding capacity: two cores per station, one-core
/// local threshold, a 0.2 local scan step and a modest power range.
pub fn micro_cfg() -> VecsConfig {
    VecsConfig {
        bs_capacity: 2.0,
        u_threshold: 1.0,
        grid_size: 10,
        d_hat_max: 6.0,
        p_static: 0.2,
        p_max: 4.0,
        local_step: 0.2,
        ..VecsConfig::default()
    }
}

/// Random micro-scenario: `n` tasks, `m` stations, every deadline ≤ `max_deadline`.
pub fn micro_scenario(seed: u64, n: usize, m: usize, max_deadline: Time) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = micro_cfg();
    let g = cfg.grid_size;
    let pt = |rng: &mut ChaCha8Rng| Point::new(rng.gen_range(0..=g), rng.gen_range(0..=g));
    let bs_locations = (0..m).map(|_| pt(&mut rng)).collect();
    let mut tasks = Vec::new();
    let mut av_locations = BTreeMap::new();
    for i in 0..n {
        let arrival = rng.gen_range(0..max_deadline / 2);
        let p = rng.gen_range(1..=8.min(max_deadline - arrival));
        let slack = rng.gen_range(0..=12);
        let deadline = (arrival + p + slack).min(max_deadline);
        let flag = if rng.gen_bool(0.5) {
            Criticality::Hard
        } else {
            Criticality::Soft
        };
        tasks.push(Task::new(i as u64, arrival, deadline, p, flag, i as u64).unwrap());
        av_locations.insert((arrival / cfg.t_beta, AvId(i as u64)), pt(&mut rng));
    }
    let s = Scenario {
        tasks,
        bs_locations,
        av_locations,
        cfg,
        seed,
    };
    s.validate().unwrap();
    s
}
