//! Exhaustive-optimal cost oracle on micro-scenarios (N ≤ 8, M ≤ 2, horizon ≤ 30)
//! as a lower bound for every policy.
//!
//! The oracle chooses, per task, to drop it, send it to the cloud at any
//! boundary that meets the deadline, or reserve it on any station at any
//! boundary from its earliest start, at any utilisation a policy could use:
//! `u^min`, the favourable list (0.8, 0.7, 0.6), 1.0 and the local scan grid
//! (step 0.2 in the micro config). Capacity is the hard `U^max`, and there is
//! no distance radius. Evicting a task is never cheaper than dropping it
//! outright, so this space contains every policy's outcome up to evictions,
//! and its optimum bounds every policy's `C_total` from below.

use vecsched::engine::{earliest_start, feasible_u_min, local_scan_grid};
use vecsched::model::{
    energy_cost, instantaneous_power, offload_distance, reservation_length, Time, UTIL_EPS,
};
use vecsched::workload::Scenario;

#[derive(Debug, Clone, Copy)]
struct Place {
    bs: usize,
    u: f64,
    start: Time,
    finish: Time,
    dist: f64,
}

struct Options {
    drop: f64,
    cloud: Option<f64>,
    places: Vec<Place>,
    /// Cheapest standalone cost: a lower bound on this task's marginal cost.
    lower: f64,
}

fn options(s: &Scenario, horizon: Time) -> Vec<Options> {
    let cfg = &s.cfg;
    let idle = instantaneous_power(0.0, cfg);
    s.tasks
        .iter()
        .map(|t| {
            let drop = (1.0 + cfg.delta_pen) * cfg.penalty(t.is_hard());
            let es = earliest_start(t, cfg);
            let boundaries: Vec<Time> = (es..t.deadline).step_by(cfg.t_beta as usize).collect();
            let cloud = boundaries
                .iter()
                .any(|&b| b + cfg.cloud_latency <= t.deadline)
                .then_some(cfg.lambda_dis * 2.0 * cfg.d_hat_max);
            let av = s.request_location(t);
            let mut places = Vec::new();
            for &b in &boundaries {
                let Some(u_min) = feasible_u_min(t, b) else {
                    continue;
                };
                let mut us = local_scan_grid(u_min, cfg);
                us.extend(cfg.u_fav.iter().copied());
                us.extend([1.0, u_min]);
                us.retain(|&u| u + UTIL_EPS >= u_min && u <= 1.0 + UTIL_EPS);
                us.sort_by(f64::total_cmp);
                us.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
                for u in us {
                    let Ok(len) = reservation_length(t, b, u, cfg) else {
                        continue;
                    };
                    let finish = b + len;
                    if finish > t.deadline || finish > horizon {
                        continue;
                    }
                    for (bs, &loc) in s.bs_locations.iter().enumerate() {
                        places.push(Place {
                            bs,
                            u,
                            start: b,
                            finish,
                            dist: offload_distance(av, loc),
                        });
                    }
                }
            }
            let standalone = |p: &Place| {
                cfg.lambda_dis * p.dist
                    + cfg.lambda_e
                        * (instantaneous_power(p.u, cfg) - idle)
                        * (p.finish - p.start) as f64
            };
            places.sort_by(|a, b| standalone(a).total_cmp(&standalone(b)));
            let lower = places
                .iter()
                .map(standalone)
                .chain([drop])
                .chain(cloud)
                .fold(f64::INFINITY, f64::min);
            Options {
                drop,
                cloud,
                places,
                lower,
            }
        })
        .collect()
}

struct Search<'a> {
    s: &'a Scenario,
    opts: Vec<Options>,
    /// `suffix[i]`: sum of lower bounds of tasks `i..`.
    suffix: Vec<f64>,
    loads: Vec<Vec<f64>>,
    best: f64,
    nodes: u64,
}

impl Search<'_> {
    fn marginal(&self, p: &Place) -> f64 {
        let cfg = &self.s.cfg;
        self.loads[p.bs][p.start as usize..p.finish as usize]
            .iter()
            .map(|&l| instantaneous_power(l + p.u, cfg) - instantaneous_power(l, cfg))
            .sum()
    }

    fn dfs(&mut self, i: usize, cost: f64) {
        self.nodes += 1;
        if cost + self.suffix[i] >= self.best - 1e-12 {
            return;
        }
        if i == self.opts.len() {
            self.best = cost;
            return;
        }
        let cfg = &self.s.cfg;
        let (drop, cloud) = (self.opts[i].drop, self.opts[i].cloud);
        for p in self.opts[i].places.clone() {
            let fits = self.loads[p.bs][p.start as usize..p.finish as usize]
                .iter()
                .all(|&l| l + p.u <= cfg.bs_capacity + UTIL_EPS);
            if !fits {
                continue;
            }
            let add = cfg.lambda_dis * p.dist + cfg.lambda_e * self.marginal(&p);
            for l in &mut self.loads[p.bs][p.start as usize..p.finish as usize] {
                *l += p.u;
            }
            self.dfs(i + 1, cost + add);
            for l in &mut self.loads[p.bs][p.start as usize..p.finish as usize] {
                *l -= p.u;
            }
        }
        if let Some(c) = cloud {
            self.dfs(i + 1, cost + c);
        }
        self.dfs(i + 1, cost + drop);
    }
}

/// Optimal `C_total` over the oracle's decision space.
pub fn optimum(s: &Scenario) -> (f64, u64) {
    let horizon = s.horizon();
    let cfg = &s.cfg;
    let opts = options(s, horizon);
    let mut suffix = vec![0.0; opts.len() + 1];
    for i in (0..opts.len()).rev() {
        suffix[i] = suffix[i + 1] + opts[i].lower;
    }
    // Everything dropped is always feasible.
    let all_drop: f64 = opts.iter().map(|o| o.drop).sum();
    let mut search = Search {
        s,
        opts,
        suffix,
        loads: vec![vec![0.0; horizon as usize]; s.n_bs()],
        best: all_drop + 1e-9,
        nodes: 0,
    };
    search.dfs(0, 0.0);
    let idle: Vec<Vec<f64>> = vec![Vec::new(); s.n_bs()];
    let base = cfg.lambda_e * energy_cost(idle.iter().map(Vec::as_slice), horizon, cfg);
    (base + search.best.min(all_drop), search.nodes)
}
