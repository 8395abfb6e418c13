//! Alg. 5 instances and an exhaustive subset-search oracle: Alg. 5 against an exhaustive subset search on ≤ 3 stations with ≤ 4 soft
//! allocations each. Soft allocations are small next to the hard task's
//! near-full-speed demand, so many instances need two or more evictions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vecsched::engine::{feasible_u_min, Infra, Limits};
use vecsched::model::{
    offload_distance, reservation_length, BsId, Criticality, Point, Task, TaskId, Time, VecsConfig,
    UTIL_EPS,
};
use vecsched::policies::drop_for_hard;

pub const HORIZON: Time = 60;
pub const BATCH: Time = 6;

pub struct Instance {
    pub infra: Infra,
    pub task: Task,
    pub av: Point,
    pub limits: Limits,
}

pub fn cfg() -> VecsConfig {
    VecsConfig {
        bs_capacity: 2.0,
        u_threshold: 1.0,
        grid_size: 10,
        d_hat_max: 6.0,
        ..VecsConfig::default()
    }
}

pub fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = cfg();
    let g = cfg.grid_size;
    let pt = |rng: &mut ChaCha8Rng| Point::new(rng.gen_range(0..=g), rng.gen_range(0..=g));
    let m = rng.gen_range(1..=3);
    let locs: Vec<Point> = (0..m).map(|_| pt(&mut rng)).collect();
    let mut infra = Infra::new(&cfg, &locs, HORIZON);
    let mut next_id = 1u64;
    for (j, &loc) in locs.iter().enumerate() {
        let bs = BsId(j as u32);
        // A long hard background load, then up to four small soft allocations.
        let background = Task::new(next_id, 0, 40, 30, Criticality::Hard, next_id).unwrap();
        next_id += 1;
        let lim = Limits {
            cap: cfg.bs_capacity,
            radius: None,
        };
        let o = infra
            .try_schedule(bs, &background, 1.0, 3, loc, lim)
            .unwrap();
        infra.schedule(&background, &o).unwrap();
        for _ in 0..rng.gen_range(0..=4) {
            let start = [3, 6, 6, 9][rng.gen_range(0..4)];
            let p = rng.gen_range(2..=12);
            let u = [0.2, 0.25, 0.3, 0.4, 0.5][rng.gen_range(0..5)];
            let task = Task::new(next_id, 0, start + p * 3, p, Criticality::Soft, next_id).unwrap();
            next_id += 1;
            if let Some(o) = infra.try_schedule(bs, &task, u, start, loc, lim) {
                infra.schedule(&task, &o).unwrap();
            }
        }
    }
    let p = rng.gen_range(1..=8);
    let task = Task::new(
        0,
        rng.gen_range(0..=4),
        BATCH + p + rng.gen_range(0..=2),
        p,
        Criticality::Hard,
        0,
    )
    .unwrap();
    let cap = if rng.gen_bool(0.5) {
        cfg.global_cap()
    } else {
        cfg.bs_capacity
    };
    let radius = rng.gen_bool(0.5).then_some(cfg.d_hat_max);
    Instance {
        infra,
        task,
        av: pt(&mut rng),
        limits: Limits { cap, radius },
    }
}

/// `(bs, evicted ids)` minimising cardinality, then penalty (all soft, so
/// equal at equal size), then BS id, then the lexicographic id set.
pub fn oracle(inst: &Instance) -> Option<(BsId, Vec<TaskId>)> {
    let infra = &inst.infra;
    let u = feasible_u_min(&inst.task, BATCH)?;
    let len = reservation_length(&inst.task, BATCH, u, &infra.cfg).ok()?;
    let mut best: Option<(usize, BsId, Vec<TaskId>)> = None;
    for s in &infra.stations {
        if inst
            .limits
            .radius
            .is_some_and(|r| offload_distance(inst.av, s.location) > r + UTIL_EPS)
        {
            continue;
        }
        let cands: Vec<_> = s
            .live_allocations()
            .filter(|a| !infra.is_hard(a.task) && a.end > BATCH)
            .collect();
        assert!(cands.len() <= 4);
        let n = cands.len();
        // Subsets by size, then lexicographically by index (ids ascend with index).
        let mut subsets: Vec<Vec<usize>> = (0u32..1 << n)
            .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
            .collect();
        subsets.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        let found = subsets.into_iter().find(|set| {
            (BATCH..BATCH + len).all(|t| {
                let freed: f64 = set
                    .iter()
                    .filter(|&&c| cands[c].start <= t && t < cands[c].end)
                    .map(|&c| cands[c].u)
                    .sum();
                s.load_at(t) - freed + u <= inst.limits.cap + UTIL_EPS
            })
        });
        if let Some(set) = found {
            let ids: Vec<TaskId> = set.iter().map(|&c| cands[c].task).collect();
            if best.as_ref().is_none_or(|b| ids.len() < b.0) {
                best = Some((ids.len(), s.id, ids));
            }
        }
    }
    best.map(|(_, bs, ids)| (bs, ids))
}

/// Checks Alg. 5 on instance `seed` against [`oracle`]: same station, same
/// eviction set, exact penalty, and the placement fits once applied.
/// Returns the eviction-set size (`None` when neither finds room).
pub fn check_seed(seed: u64) -> Result<Option<usize>, String> {
    let inst = instance(seed);
    let pen_soft = (1.0 + cfg().delta_pen) * cfg().pen_soft;
    let got = drop_for_hard(&inst.infra, &inst.task, BATCH, inst.av, inst.limits)
        .map_err(|e| format!("seed {seed}: {e}"))?;
    match (got, oracle(&inst)) {
        (None, None) => Ok(None),
        (Some(c), Some((bs, ids))) => {
            if c.greedy {
                return Err(format!("seed {seed}: greedy fallback on a tiny instance"));
            }
            if (c.bs, &c.evict) != (bs, &ids) {
                return Err(format!(
                    "seed {seed}: engine {:?} on {} vs oracle {ids:?} on {bs}",
                    c.evict, c.bs
                ));
            }
            if (c.penalty - pen_soft * ids.len() as f64).abs() > 1e-9 {
                return Err(format!("seed {seed}: penalty {}", c.penalty));
            }
            let mut infra = inst.infra.clone();
            for &v in &c.evict {
                infra
                    .evict(c.bs, v, BATCH)
                    .map_err(|e| format!("seed {seed}: {e}"))?;
            }
            let p = c.placement;
            if !infra.fits(c.bs, p.start, p.finish, p.u, inst.limits.cap) {
                return Err(format!(
                    "seed {seed}: placement does not fit after evictions"
                ));
            }
            infra
                .schedule(&inst.task, &p)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            Ok(Some(ids.len()))
        }
        (got, want) => Err(format!("seed {seed}: engine {got:?} vs oracle {want:?}")),
    }
}
