use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Scenario, WorkloadError};
use crate::model::{AvId, Criticality, Point, SlackClass, Task, Time, VecsConfig};

/// Requested slack band; `Mixed` draws a band per task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlackTarget {
    Tight,
    Normal,
    Loose,
    Mixed,
}

impl std::str::FromStr for SlackTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tight" => Ok(SlackTarget::Tight),
            "normal" => Ok(SlackTarget::Normal),
            "loose" => Ok(SlackTarget::Loose),
            "mixed" => Ok(SlackTarget::Mixed),
            other => Err(format!("unknown slack target `{other}`")),
        }
    }
}

impl SlackTarget {
    pub fn name(self) -> &'static str {
        match self {
            SlackTarget::Tight => "tight",
            SlackTarget::Normal => "normal",
            SlackTarget::Loose => "loose",
            SlackTarget::Mixed => "mixed",
        }
    }

    fn pick(self, rng: &mut impl Rng) -> SlackClass {
        match self {
            SlackTarget::Tight => SlackClass::Tight,
            SlackTarget::Normal => SlackClass::Normal,
            SlackTarget::Loose => SlackClass::Loose,
            SlackTarget::Mixed => {
                [SlackClass::Tight, SlackClass::Normal, SlackClass::Loose][rng.gen_range(0..3)]
            }
        }
    }
}

impl From<SlackClass> for SlackTarget {
    fn from(c: SlackClass) -> Self {
        match c {
            SlackClass::Tight => SlackTarget::Tight,
            SlackClass::Normal => SlackTarget::Normal,
            SlackClass::Loose => SlackTarget::Loose,
        }
    }
}

/// Upper end of the sampling range for the loose band.
const LOOSE_SLACK_MAX: f64 = 6.0;
const MAX_ATTEMPTS: usize = 10_000;

pub(crate) fn band_bounds(band: SlackClass) -> (f64, f64) {
    match band {
        SlackClass::Tight => (1.0, SlackClass::TIGHT_BELOW),
        SlackClass::Normal => (SlackClass::TIGHT_BELOW, SlackClass::LOOSE_ABOVE),
        SlackClass::Loose => (SlackClass::LOOSE_ABOVE, LOOSE_SLACK_MAX),
    }
}

/// Draws one slack ratio inside `band` and returns the resulting deadline, or
/// `None` when the rounded deadline falls outside the band.
pub(crate) fn draw_deadline(
    rng: &mut impl Rng,
    arrival: Time,
    processing: Time,
    band: SlackClass,
) -> Option<Time> {
    let (lo, hi) = band_bounds(band);
    let mu: f64 = rng.gen_range(lo..hi);
    let window = (mu * processing as f64 - 1e-9).ceil().max(1.0) as Time;
    let deadline = arrival + window;
    let ratio = window as f64 / processing as f64;
    (SlackClass::of_ratio(ratio) == band && window >= processing).then_some(deadline)
}

/// Number of hard tasks among `n` for a `hard:soft` ratio, rounding half up.
pub fn split_hard_soft(n: usize, ratio: (u32, u32)) -> usize {
    let (h, s) = (ratio.0 as u128, ratio.1 as u128);
    ((2 * n as u128 * h + h + s) / (2 * (h + s))) as usize
}

pub(crate) fn assign_flags(n: usize, ratio: (u32, u32), rng: &mut impl Rng) -> Vec<Criticality> {
    let n_hard = split_hard_soft(n, ratio);
    let mut flags: Vec<Criticality> = (0..n)
        .map(|i| {
            if i < n_hard {
                Criticality::Hard
            } else {
                Criticality::Soft
            }
        })
        .collect();
    flags.shuffle(rng);
    flags
}

/// Knobs of the synthetic workload generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub n_tasks: usize,
    pub n_bs: usize,
    /// Number of distinct vehicles; `None` gives every task its own vehicle.
    pub n_avs: Option<usize>,
    /// Arrivals are uniform on `[0, arrival_max]`.
    pub arrival_max: Time,
    pub slack: SlackTarget,
    /// `hard:soft` count ratio.
    pub hard_ratio: (u32, u32),
    pub grid_size: i64,
    /// Inclusive range of minimum processing times.
    pub processing: (Time, Time),
    pub seed: u64,
    /// Base config copied into the scenario; `grid_size` and `horizon` are overwritten.
    pub cfg: VecsConfig,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            n_tasks: 500,
            n_bs: 50,
            n_avs: None,
            arrival_max: 2000,
            slack: SlackTarget::Normal,
            hard_ratio: (1, 1),
            grid_size: 100,
            processing: (1, 20),
            seed: 0,
            cfg: VecsConfig::default(),
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let bad = |m: &str| Err(WorkloadError::InvalidParams(m.to_string()));
        if self.n_tasks == 0 {
            return bad("n_tasks must be at least 1");
        }
        if self.n_bs == 0 {
            return bad("n_bs must be at least 1");
        }
        if self.n_avs == Some(0) {
            return bad("n_avs must be at least 1");
        }
        if self.arrival_max + 1 < self.cfg.t_beta {
            return bad("arrival window must span at least one batch");
        }
        if self.hard_ratio.0 == 0 || self.hard_ratio.1 == 0 {
            return bad("hard:soft ratio components must be positive");
        }
        if self.grid_size <= 0 {
            return bad("grid_size must be positive");
        }
        if self.processing.0 == 0 || self.processing.0 > self.processing.1 {
            return bad("processing range must satisfy 1 <= lo <= hi");
        }
        self.cfg.validate()?;
        Ok(())
    }
}

/// ChaCha stream id for station locations; tasks use stream 0.
const BS_STREAM: u64 = 1;

/// Builds a synthetic scenario. Identical parameters give identical scenarios.
///
/// Every task satisfies its slack band and can still finish if started at its
/// first batch boundary after the scheduling delay.
pub fn generate_synthetic(params: &GeneratorParams) -> Result<Scenario, WorkloadError> {
    params.validate()?;
    // Stations come from their own stream (common random numbers): for a
    // given seed the task set is the same whatever the station count.
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut bs_rng = ChaCha8Rng::seed_from_u64(params.seed);
    bs_rng.set_stream(BS_STREAM);
    let mut cfg = params.cfg.clone();
    cfg.grid_size = params.grid_size;
    let m = params.grid_size;

    let bs_locations: Vec<Point> = (0..params.n_bs)
        .map(|_| Point::new(bs_rng.gen_range(0..=m), bs_rng.gen_range(0..=m)))
        .collect();

    let mut arrivals: Vec<Time> = (0..params.n_tasks)
        .map(|_| rng.gen_range(0..=params.arrival_max))
        .collect();
    arrivals.sort_unstable();

    let (p_lo, p_hi) = params.processing;
    let mut timings = Vec::with_capacity(params.n_tasks);
    for &a in &arrivals {
        let band = params.slack.pick(&mut rng);
        let batch_end = (a / cfg.t_beta + 1) * cfg.t_beta;
        let mut found = None;
        for _ in 0..MAX_ATTEMPTS {
            let p = rng.gen_range(p_lo..=p_hi);
            if let Some(d) = draw_deadline(&mut rng, a, p, band) {
                if d >= batch_end {
                    found = Some((p, d));
                    break;
                }
            }
        }
        let (p, d) = found.ok_or_else(|| WorkloadError::UnsatisfiableBand {
            band: band.to_string(),
            reason: format!(
                "no processing time in [{p_lo}, {p_hi}] gives a task arriving at {a} \
                 an in-band deadline at or after its batch end {batch_end}"
            ),
        })?;
        timings.push((a, p, d));
    }

    let flags = assign_flags(params.n_tasks, params.hard_ratio, &mut rng);

    let mut av_locations = BTreeMap::new();
    let mut tasks = Vec::with_capacity(params.n_tasks);
    for (i, ((a, p, d), flag)) in timings.into_iter().zip(flags).enumerate() {
        let av = match params.n_avs {
            None => i as u64,
            Some(n) => rng.gen_range(0..n as u64),
        };
        let batch = a / cfg.t_beta;
        av_locations
            .entry((batch, AvId(av)))
            .or_insert_with(|| Point::new(rng.gen_range(0..=m), rng.gen_range(0..=m)));
        tasks.push(Task::new(i as u64, a, d, p, flag, av)?);
    }

    let last_deadline = tasks.iter().map(|t| t.deadline).max().unwrap_or(0);
    cfg.horizon = cfg.next_boundary(last_deadline);

    let scenario = Scenario {
        tasks,
        bs_locations,
        av_locations,
        cfg,
        seed: params.seed,
    };
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::slack_class;

    fn params(n: usize) -> GeneratorParams {
        GeneratorParams {
            n_tasks: n,
            n_bs: 5,
            arrival_max: 60,
            seed: 42,
            ..Default::default()
        }
    }

    #[test]
    fn exact_ratio_partition() {
        let s = generate_synthetic(&GeneratorParams {
            hard_ratio: (1, 1),
            ..params(4)
        })
        .unwrap();
        let hard = s.tasks.iter().filter(|t| t.is_hard()).count();
        assert_eq!(hard, 2);
        assert_eq!(split_hard_soft(500, (2, 1)), 333);
        assert_eq!(split_hard_soft(5, (1, 1)), 3);
        assert_eq!(split_hard_soft(4, (1, 3)), 1);
    }

    #[test]
    fn loose_request_gives_loose_tasks() {
        let s = generate_synthetic(&GeneratorParams {
            slack: SlackTarget::Loose,
            ..params(200)
        })
        .unwrap();
        assert!(s.tasks.iter().all(|t| t.slack() > 3.0));
    }

    #[test]
    fn same_seed_same_scenario() {
        let a = generate_synthetic(&params(50)).unwrap();
        let b = generate_synthetic(&params(50)).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&GeneratorParams {
            seed: 43,
            ..params(50)
        })
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn station_count_does_not_change_tasks() {
        let a = generate_synthetic(&GeneratorParams {
            n_bs: 5,
            ..params(200)
        })
        .unwrap();
        let b = generate_synthetic(&GeneratorParams {
            n_bs: 50,
            ..params(200)
        })
        .unwrap();
        assert_eq!(a.tasks, b.tasks);
        assert_eq!(a.av_locations, b.av_locations);
        assert_eq!(a.bs_locations[..], b.bs_locations[..5]);
    }

    #[test]
    fn deadlines_reach_the_end_of_the_arrival_batch() {
        for slack in [SlackTarget::Tight, SlackTarget::Normal, SlackTarget::Mixed] {
            let s = generate_synthetic(&GeneratorParams {
                slack,
                ..params(300)
            })
            .unwrap();
            for t in &s.tasks {
                let batch_end = (t.arrival / s.cfg.t_beta + 1) * s.cfg.t_beta;
                assert!(t.deadline >= batch_end, "{t:?}");
            }
        }
    }

    #[test]
    fn tight_band_with_short_tasks_is_unsatisfiable() {
        let err = generate_synthetic(&GeneratorParams {
            slack: SlackTarget::Tight,
            processing: (1, 1),
            ..params(10)
        })
        .unwrap_err();
        assert!(
            matches!(err, WorkloadError::UnsatisfiableBand { .. }),
            "{err}"
        );
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(generate_synthetic(&params(0)).is_err());
        assert!(generate_synthetic(&GeneratorParams {
            n_bs: 0,
            ..params(3)
        })
        .is_err());
        assert!(generate_synthetic(&GeneratorParams {
            hard_ratio: (0, 1),
            ..params(3)
        })
        .is_err());
        assert!(generate_synthetic(&GeneratorParams {
            arrival_max: 1,
            ..params(3)
        })
        .is_err());
    }

    #[test]
    fn mixed_target_covers_all_bands() {
        let s = generate_synthetic(&GeneratorParams {
            slack: SlackTarget::Mixed,
            ..params(300)
        })
        .unwrap();
        for band in [SlackClass::Tight, SlackClass::Normal, SlackClass::Loose] {
            assert!(s.tasks.iter().any(|t| slack_class(t) == band));
        }
    }
}
