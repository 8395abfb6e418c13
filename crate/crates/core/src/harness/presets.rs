//! Plans mirroring the paper's figure captions.
//!
//! Synthetic presets sweep `N` tasks per batch over `DEFAULT_BATCHES` batches.
//! Trace presets read the stand-in fixtures under `fixtures/traces` at one
//! second per slot; there `N · TRACE_BATCHES` is the number of trace records
//! taken, so `N` sets the window length while the trace's own arrival rate
//! sets the load.

use std::path::PathBuf;

use super::plan::{Axis, ExperimentPlan, Source, TraceScale};
use super::HarnessError;
use crate::policies::PolicyId;
use crate::workload::{SlackTarget, TraceMapping};

/// Every preset id accepted by [`figure_plan`].
pub const PRESET_IDS: [&str; 9] = [
    "fig6",
    "fig7",
    "fig8",
    "fig9",
    "trace_tasks",
    "trace_slack",
    "trace_ratio",
    "trace_variants",
    "hyper",
];

/// Batches of trace records per scenario (`N · TRACE_BATCHES` records).
pub const TRACE_BATCHES: u64 = 10;
/// Nanoseconds per slot for trace presets.
pub const TRACE_NS_PER_SLOT: f64 = 1e9;
const REPETITIONS: u64 = 10;
const SLACKS: [SlackTarget; 3] = [SlackTarget::Tight, SlackTarget::Normal, SlackTarget::Loose];
const RATIOS: [(u32, u32); 3] = [(1, 3), (1, 1), (3, 1)];

/// Directory holding `tasks.csv` and `locations.csv`.
pub fn trace_fixture_dir() -> PathBuf {
    PathBuf::from(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../fixtures/traces"
    ))
}

fn trace_source() -> Source {
    let dir = trace_fixture_dir();
    Source::Trace {
        tasks: dir.join("tasks.csv"),
        locations: dir.join("locations.csv"),
        mapping: TraceMapping::default(),
        scale: TraceScale::UnitsPerSlot(TRACE_NS_PER_SLOT),
    }
}

fn synthetic(name: &str, axis: Axis) -> ExperimentPlan {
    ExperimentPlan {
        name: name.into(),
        axis,
        repetitions: REPETITIONS,
        n_tasks: 500,
        n_bs: 50,
        slack: SlackTarget::Normal,
        hard_ratio: (1, 1),
        ..Default::default()
    }
}

fn trace(name: &str, axis: Axis) -> ExperimentPlan {
    ExperimentPlan {
        name: name.into(),
        source: trace_source(),
        axis,
        repetitions: REPETITIONS,
        n_tasks: 1000,
        n_bs: 100,
        batches: TRACE_BATCHES,
        slack: SlackTarget::Normal,
        hard_ratio: (1, 1),
        ..Default::default()
    }
}

/// Base plan for [`super::hyperparameter_study`]: trace source, dynamic
/// holding, `Û^max = 0.9` and `D̂^max = 20` as the fixed values.
pub fn hyper_base_plan() -> ExperimentPlan {
    ExperimentPlan {
        policies: vec![PolicyId::DynamicHolding],
        repetitions: 5,
        ..trace("hyper", Axis::NTasks(vec![1000]))
    }
}

/// The preset plan for `id`; see [`PRESET_IDS`].
pub fn figure_plan(id: &str) -> Result<ExperimentPlan, HarnessError> {
    Ok(match id {
        "fig6" => ExperimentPlan {
            hard_ratio: (2, 1),
            ..synthetic(id, Axis::NTasks(vec![100, 200, 350, 500, 650, 800, 1000]))
        },
        "fig7" => synthetic(id, Axis::NBs(vec![10, 25, 50, 75, 100, 150, 200])),
        "fig8" => synthetic(id, Axis::Slack(SLACKS.to_vec())),
        "fig9" => synthetic(id, Axis::Ratio(RATIOS.to_vec())),
        "trace_tasks" => trace(id, Axis::NTasks(vec![250, 500, 750, 1000])),
        "trace_slack" => trace(id, Axis::Slack(SLACKS.to_vec())),
        "trace_ratio" => trace(id, Axis::Ratio(RATIOS.to_vec())),
        "trace_variants" => trace(
            id,
            Axis::Grid {
                u_hat: vec![0.8, 0.9],
                d_hat: vec![10.0, 20.0],
            },
        ),
        "hyper" => hyper_base_plan(),
        other => {
            return Err(HarnessError::Plan(format!(
                "unknown figure id `{other}` (expected one of {})",
                PRESET_IDS.join(", ")
            )))
        }
    })
}
