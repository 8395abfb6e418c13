//! Base-station reservation calendars and the TrySchedule / Schedule / evict primitives.

use std::collections::{BTreeMap, BTreeSet};

use super::EngineError;
use crate::model::{
    energy_cost, instantaneous_power, min_utilisation, offload_distance, reservation_length,
    AllocState, Allocation, BsId, Point, Task, TaskId, Time, VecsConfig, UTIL_EPS,
};

/// One base station: location, per-slot committed load and every allocation it ever held.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseStation {
    pub id: BsId,
    pub location: Point,
    /// `U_j(t)` for `t` in `[0, horizon)`.
    pub load: Vec<f64>,
    /// All allocations, keyed by task; dropped and completed ones are kept for accounting.
    pub allocations: BTreeMap<TaskId, Allocation>,
}

impl BaseStation {
    /// Largest committed load over `[from, to)`.
    pub fn peak_load(&self, from: Time, to: Time) -> f64 {
        let (from, to) = (from as usize, (to as usize).min(self.load.len()));
        self.load
            .get(from..to)
            .map(|s| s.iter().copied().fold(0.0, f64::max))
            .unwrap_or(0.0)
    }

    pub fn load_at(&self, t: Time) -> f64 {
        self.load.get(t as usize).copied().unwrap_or(0.0)
    }

    /// Live soft allocations are the only eviction candidates.
    pub fn live_allocations(&self) -> impl Iterator<Item = &Allocation> {
        self.allocations.values().filter(|a| a.is_live())
    }

    /// Per-slot load recomputed from allocations in task-id order.
    ///
    /// This is the canonical summation order used for energy accounting, so
    /// the event-log replay can reproduce it bit for bit.
    pub fn canonical_load(&self, horizon: Time) -> Vec<f64> {
        let mut cal = vec![0.0; horizon as usize];
        for a in self.allocations.values() {
            for slot in &mut cal[a.start as usize..(a.end.min(horizon)) as usize] {
                *slot += a.u;
            }
        }
        cal
    }
}

/// Constraints applied by a TrySchedule call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    /// Load ceiling in cores that `U_j(t) + u` must respect.
    pub cap: f64,
    /// Maximum AV-to-BS distance, if any.
    pub radius: Option<f64>,
}

/// A feasible TrySchedule answer with its marginal costs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TryOutcome {
    pub bs: BsId,
    pub u: f64,
    pub start: Time,
    pub stretched: Time,
    pub finish: Time,
    /// Marginal energy over the reserved slots.
    pub d_energy: f64,
    pub distance: f64,
}

/// All base stations of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Infra {
    pub cfg: VecsConfig,
    pub horizon: Time,
    pub stations: Vec<BaseStation>,
    /// Hard tasks that ever held an allocation; these are never evicted.
    pub hard: BTreeSet<TaskId>,
}

impl Infra {
    pub fn new(cfg: &VecsConfig, locations: &[Point], horizon: Time) -> Self {
        let stations = locations
            .iter()
            .enumerate()
            .map(|(i, &location)| BaseStation {
                id: BsId(i as u32),
                location,
                load: vec![0.0; horizon as usize],
                allocations: BTreeMap::new(),
            })
            .collect();
        Infra {
            cfg: cfg.clone(),
            horizon,
            stations,
            hard: BTreeSet::new(),
        }
    }

    pub fn is_hard(&self, task: TaskId) -> bool {
        self.hard.contains(&task)
    }

    pub fn station(&self, bs: BsId) -> &BaseStation {
        &self.stations[bs.0 as usize]
    }

    fn station_mut(&mut self, bs: BsId) -> &mut BaseStation {
        &mut self.stations[bs.0 as usize]
    }

    pub fn allocation_mut(&mut self, bs: BsId, task: TaskId) -> Option<&mut Allocation> {
        self.station_mut(bs).allocations.get_mut(&task)
    }

    /// Whether `U_j(t) + u <= cap` for every `t` in `[start, finish)`.
    pub fn fits(&self, bs: BsId, start: Time, finish: Time, u: f64, cap: f64) -> bool {
        let load = &self.station(bs).load;
        if finish as usize > load.len() {
            return false;
        }
        load[start as usize..finish as usize]
            .iter()
            .all(|&l| l + u <= cap + UTIL_EPS)
    }

    /// Energy added by `u` extra cores over `[start, finish)` on `bs`.
    pub fn marginal_energy(&self, bs: BsId, start: Time, finish: Time, u: f64) -> f64 {
        self.station(bs).load[start as usize..finish as usize]
            .iter()
            .map(|&l| instantaneous_power(l + u, &self.cfg) - instantaneous_power(l, &self.cfg))
            .sum()
    }

    /// Pure feasibility check: no state changes. `None` means infeasible.
    pub fn try_schedule(
        &self,
        bs: BsId,
        task: &Task,
        u: f64,
        start: Time,
        av: Point,
        limits: Limits,
    ) -> Option<TryOutcome> {
        if u > self.cfg.u_max_per_task + UTIL_EPS {
            return None;
        }
        let station = self.station(bs);
        let distance = offload_distance(av, station.location);
        if limits.radius.is_some_and(|r| distance > r + UTIL_EPS) {
            return None;
        }
        let stretched = reservation_length(task, start, u, &self.cfg).ok()?;
        let finish = start + stretched;
        if !self.fits(bs, start, finish, u, limits.cap) {
            return None;
        }
        Some(TryOutcome {
            bs,
            u,
            start,
            stretched,
            finish,
            d_energy: self.marginal_energy(bs, start, finish, u),
            distance,
        })
    }

    /// Reserves the slots. Fails if the reservation would exceed `U^max`.
    pub fn schedule(&mut self, task: &Task, placement: &TryOutcome) -> Result<(), EngineError> {
        let TryOutcome {
            bs,
            u,
            start,
            stretched,
            finish,
            ..
        } = *placement;
        if finish > task.deadline || start < min_start(task) {
            return Err(EngineError::Invariant(format!(
                "task {} reserved over [{start}, {finish}) outside its window",
                task.id
            )));
        }
        if !self.fits(bs, start, finish, u, self.cfg.bs_capacity) {
            return Err(EngineError::Invariant(format!(
                "capacity race scheduling task {} on {bs}",
                task.id
            )));
        }
        if task.is_hard() {
            self.hard.insert(task.id);
        }
        let station = self.station_mut(bs);
        if station.allocations.contains_key(&task.id) {
            return Err(EngineError::Invariant(format!(
                "task {} already allocated on {bs}",
                task.id
            )));
        }
        for l in &mut station.load[start as usize..finish as usize] {
            *l += u;
        }
        station
            .allocations
            .insert(task.id, Allocation::new(task.id, bs, u, start, stretched));
        Ok(())
    }

    /// Drops a live allocation at time `at`, freeing its slots from `at` onward.
    pub fn evict(&mut self, bs: BsId, task: TaskId, at: Time) -> Result<Allocation, EngineError> {
        if self.is_hard(task) {
            return Err(EngineError::Invariant(format!(
                "attempted to evict hard task {task}"
            )));
        }
        let station = self.station_mut(bs);
        let alloc = station
            .allocations
            .get_mut(&task)
            .filter(|a| a.is_live())
            .ok_or_else(|| {
                EngineError::Invariant(format!("no live allocation of task {task} on {bs}"))
            })?;
        let from = at.max(alloc.start);
        let to = alloc.end;
        alloc.end = from;
        alloc.state = AllocState::Dropped;
        let (u, snapshot) = (alloc.u, alloc.clone());
        for l in &mut station.load[from as usize..to.max(from) as usize] {
            *l = (*l - u).max(0.0);
        }
        Ok(snapshot)
    }

    /// Energy over the whole horizon from the canonical per-slot loads.
    pub fn total_energy(&self) -> f64 {
        let cals: Vec<Vec<f64>> = self
            .stations
            .iter()
            .map(|s| s.canonical_load(self.horizon))
            .collect();
        energy_cost(cals.iter().map(Vec::as_slice), self.horizon, &self.cfg)
    }

    /// BS nearest to `p`; ties go to the lower id.
    pub fn nearest(&self, p: Point) -> Option<BsId> {
        self.stations
            .iter()
            .map(|s| (offload_distance(p, s.location), s.id))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, id)| id)
    }
}

/// Earliest slot a task may occupy: its arrival. Starts are further aligned by the engine.
fn min_start(task: &Task) -> Time {
    task.arrival
}

/// `u^min` at `start`, or `None` if the task cannot finish from there even at full speed.
pub fn feasible_u_min(task: &Task, start: Time) -> Option<f64> {
    let u = min_utilisation(task, start).ok()?;
    (u <= 1.0 + UTIL_EPS && start + task.min_processing <= task.deadline).then_some(u.min(1.0))
}
