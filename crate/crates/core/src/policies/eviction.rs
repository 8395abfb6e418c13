//! Alg. 5: the fewest soft evictions that make room for a hard task at `u^min`.

use crate::engine::{feasible_u_min, Infra, Limits, TryOutcome};
use crate::model::{
    offload_distance, reservation_length, BsId, Point, Task, TaskId, Time, UTIL_EPS,
};

use super::PolicyError;

/// Search nodes explored per (base station, cardinality) before falling back to a greedy set.
pub const SEARCH_BUDGET: usize = 200_000;

/// Base station, soft allocations to evict there, and the resulting hard placement.
#[derive(Debug, Clone, PartialEq)]
pub struct EvictionChoice {
    pub bs: BsId,
    /// Ascending task ids.
    pub evict: Vec<TaskId>,
    /// Sum of `(1 + delta) * pen_soft` over `evict`.
    pub penalty: f64,
    pub placement: TryOutcome,
    /// True when the exact search ran out of budget and a greedy set was used.
    pub greedy: bool,
    /// Load cap the placement respects after the evictions.
    pub cap: f64,
}

struct Candidate {
    task: TaskId,
    u: f64,
    start: Time,
    /// Slots `[batch, end)` are freed by evicting this allocation.
    end: Time,
}

/// Eviction problem on one base station.
struct Instance {
    /// `(slot, excess)` for every slot where the hard task does not fit.
    deficits: Vec<(Time, f64)>,
    /// Useful candidates in ascending task id.
    cands: Vec<Candidate>,
}

impl Instance {
    fn covers(&self, c: usize, slot: Time) -> bool {
        self.cands[c].start <= slot && slot < self.cands[c].end
    }

    fn satisfied(&self, chosen: &[usize]) -> bool {
        self.deficits.iter().all(|&(t, need)| {
            let freed: f64 = chosen
                .iter()
                .filter(|&&c| self.covers(c, t))
                .map(|&c| self.cands[c].u)
                .sum();
            freed + UTIL_EPS >= need
        })
    }

    /// Smallest number of evictions any feasible set needs: per slot, the
    /// count of largest covering candidates required to cover its excess.
    fn lower_bound(&self) -> Option<usize> {
        let mut lb = 0;
        for &(t, need) in &self.deficits {
            let mut us: Vec<f64> = (0..self.cands.len())
                .filter(|&c| self.covers(c, t))
                .map(|c| self.cands[c].u)
                .collect();
            us.sort_by(|a, b| b.total_cmp(a));
            let mut acc = 0.0;
            let k = us.iter().position(|u| {
                acc += u;
                acc + UTIL_EPS >= need
            })?;
            lb = lb.max(k + 1);
        }
        Some(lb)
    }

    /// Lexicographically smallest feasible index set of size `k`, by DFS over
    /// ascending indices. `Err(())` means the node budget ran out.
    fn search(&self, k: usize) -> Result<Option<Vec<usize>>, ()> {
        let mut chosen = Vec::with_capacity(k);
        let mut nodes = 0usize;
        let mut need: Vec<f64> = self.deficits.iter().map(|d| d.1).collect();
        self.dfs(0, k, &mut chosen, &mut need, &mut nodes)
    }

    fn dfs(
        &self,
        from: usize,
        k: usize,
        chosen: &mut Vec<usize>,
        need: &mut [f64],
        nodes: &mut usize,
    ) -> Result<Option<Vec<usize>>, ()> {
        *nodes += 1;
        if *nodes > SEARCH_BUDGET {
            return Err(());
        }
        if need.iter().all(|&n| n <= UTIL_EPS) {
            return Ok(Some(chosen.clone()));
        }
        let left = k - chosen.len();
        if left == 0 || !self.can_still_cover(from, left, need) {
            return Ok(None);
        }
        for c in from..self.cands.len() {
            if self.cands.len() - c < left {
                break;
            }
            let u = self.cands[c].u;
            chosen.push(c);
            for (i, &(t, _)) in self.deficits.iter().enumerate() {
                if self.covers(c, t) {
                    need[i] -= u;
                }
            }
            let found = self.dfs(c + 1, k, chosen, need, nodes);
            for (i, &(t, _)) in self.deficits.iter().enumerate() {
                if self.covers(c, t) {
                    need[i] += u;
                }
            }
            chosen.pop();
            if let Some(set) = found? {
                return Ok(Some(set));
            }
        }
        Ok(None)
    }

    /// Whether `left` more candidates from index `from` on could still cover every slot.
    fn can_still_cover(&self, from: usize, left: usize, need: &[f64]) -> bool {
        let mut top = Vec::with_capacity(left);
        self.deficits.iter().zip(need).all(|(&(t, _), &n)| {
            if n <= UTIL_EPS {
                return true;
            }
            top.clear();
            top.extend(
                (from..self.cands.len())
                    .filter(|&c| self.covers(c, t))
                    .map(|c| self.cands[c].u),
            );
            if top.len() > left {
                top.select_nth_unstable_by(left - 1, |a, b| b.total_cmp(a));
                top.truncate(left);
            }
            top.iter().sum::<f64>() + UTIL_EPS >= n
        })
    }

    /// Largest-first greedy cover: repeatedly evict the candidate freeing the most unmet excess.
    fn greedy(&self) -> Vec<usize> {
        let mut need: Vec<f64> = self.deficits.iter().map(|d| d.1).collect();
        let mut chosen = Vec::new();
        while need.iter().any(|&n| n > UTIL_EPS) {
            let best = (0..self.cands.len())
                .filter(|c| !chosen.contains(c))
                .map(|c| {
                    let gain: f64 = self
                        .deficits
                        .iter()
                        .zip(&need)
                        .filter(|((t, _), _)| self.covers(c, *t))
                        .map(|(_, &n)| n.max(0.0).min(self.cands[c].u))
                        .sum();
                    (gain, c)
                })
                .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
            let Some((_, c)) = best else { break };
            chosen.push(c);
            for (i, &(t, _)) in self.deficits.iter().enumerate() {
                if self.covers(c, t) {
                    need[i] -= self.cands[c].u;
                }
            }
        }
        chosen.sort_unstable();
        chosen
    }
}

fn instance(infra: &Infra, bs: BsId, batch: Time, u: f64, finish: Time, cap: f64) -> Instance {
    let station = infra.station(bs);
    let deficits: Vec<(Time, f64)> = (batch..finish)
        .filter_map(|t| {
            let excess = station.load_at(t) + u - cap;
            (excess > UTIL_EPS).then_some((t, excess))
        })
        .collect();
    let first_deficit = deficits.first().map(|d| d.0);
    let cands = station
        .live_allocations()
        .filter(|a| {
            // Only soft allocations still holding a violated slot are useful.
            a.end > batch && first_deficit.is_some_and(|t| a.end > t) && !infra.is_hard(a.task)
        })
        .map(|a| Candidate {
            task: a.task,
            u: a.u,
            start: a.start,
            end: a.end,
        })
        .collect();
    Instance { deficits, cands }
}

/// Finds the base station needing the fewest soft evictions to host `task` at
/// `u^min` from `batch`; ties go to lower total penalty, then lower BS id,
/// then the lexicographically smallest set of task ids.
///
/// The placement must keep every slot's load within `limits.cap`; with a
/// radius, only stations within it of `av` are candidates. Returns `Ok(None)`
/// when no candidate station can host the task even after evicting every soft
/// allocation.
pub fn drop_for_hard(
    infra: &Infra,
    task: &Task,
    batch: Time,
    av: Point,
    limits: Limits,
) -> Result<Option<EvictionChoice>, PolicyError> {
    let cap = limits.cap;
    if !task.is_hard() {
        return Err(PolicyError::SoftEviction(task.id));
    }
    let Some(u) = feasible_u_min(task, batch) else {
        return Ok(None);
    };
    let Ok(length) = reservation_length(task, batch, u, &infra.cfg) else {
        return Ok(None);
    };
    let mut instances = Vec::new();
    for s in &infra.stations {
        if limits
            .radius
            .is_some_and(|r| offload_distance(av, s.location) > r + UTIL_EPS)
        {
            continue;
        }
        let inst = instance(infra, s.id, batch, u, batch + length, cap);
        let all: Vec<usize> = (0..inst.cands.len()).collect();
        if inst.satisfied(&all) {
            if let Some(lb) = inst.lower_bound() {
                instances.push((s.id, lb, inst));
            }
        }
    }
    let Some(min_lb) = instances.iter().map(|i| i.1).min() else {
        return Ok(None);
    };
    let max_k = instances.iter().map(|i| i.2.cands.len()).max().unwrap_or(0);
    for k in min_lb..=max_k {
        let mut fallback: Option<(usize, Vec<usize>)> = None;
        for (idx, (_, lb, inst)) in instances.iter().enumerate() {
            if *lb > k || inst.cands.len() < k {
                continue;
            }
            match inst.search(k) {
                Ok(Some(set)) => {
                    return Ok(Some(choice(
                        infra,
                        task,
                        batch,
                        av,
                        u,
                        &instances[idx],
                        set,
                        false,
                        cap,
                    )))
                }
                Ok(None) => {}
                Err(()) => {
                    let g = inst.greedy();
                    if fallback.as_ref().is_none_or(|(_, f)| g.len() < f.len()) {
                        fallback = Some((idx, g));
                    }
                }
            }
        }
        // The exact search gave up somewhere at this size; settle for the best greedy cover.
        if let Some((idx, set)) = fallback {
            return Ok(Some(choice(
                infra,
                task,
                batch,
                av,
                u,
                &instances[idx],
                set,
                true,
                cap,
            )));
        }
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn choice(
    infra: &Infra,
    task: &Task,
    batch: Time,
    av: Point,
    u: f64,
    (bs, _, inst): &(BsId, usize, Instance),
    set: Vec<usize>,
    greedy: bool,
    cap: f64,
) -> EvictionChoice {
    let bs = *bs;
    let evict: Vec<TaskId> = set.iter().map(|&c| inst.cands[c].task).collect();
    let station = infra.station(bs);
    let stretched = reservation_length(task, batch, u, &infra.cfg).unwrap_or(task.min_processing);
    let finish = batch + stretched;
    // Marginal energy after the evictions, against the post-eviction loads.
    let d_energy = (batch..finish)
        .map(|t| {
            let freed: f64 = set
                .iter()
                .filter(|&&c| inst.covers(c, t))
                .map(|&c| inst.cands[c].u)
                .sum();
            let base = (station.load_at(t) - freed).max(0.0);
            crate::model::instantaneous_power(base + u, &infra.cfg)
                - crate::model::instantaneous_power(base, &infra.cfg)
        })
        .sum();
    let penalty = evict.len() as f64 * (1.0 + infra.cfg.delta_pen) * infra.cfg.pen_soft;
    EvictionChoice {
        bs,
        evict,
        penalty,
        placement: TryOutcome {
            bs,
            u,
            start: batch,
            stretched,
            finish,
            d_energy,
            distance: offload_distance(av, station.location),
        },
        greedy,
        cap,
    }
}
