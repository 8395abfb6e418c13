//! Experiment plans, sweep execution, hyperparameter studies and plot series.
//!
//! [`run_plan`] builds one scenario per `(axis value, seed)` cell, runs every
//! policy on it and returns rows in plan order regardless of how the cells
//! were scheduled across threads. The deterministic tables ([`ResultTable::detail_csv`],
//! [`ResultTable::aggregate_csv`]) never contain wall-clock time; that goes to
//! [`ResultTable::timings_csv`] only.

mod hyper;
mod plan;
mod plot;
mod presets;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

use crate::engine::{run, EngineError, RunReport};
use crate::model::{Time, VecsConfig};
use crate::policies::PolicyId;
use crate::workload::{
    generate_synthetic, ingest_trace, trace_span, ScalingParams, Scenario, WorkloadError,
};

pub use hyper::{
    hyperparameter_study, HyperPoint, HyperStudy, HyperSweep, D_HAT_POINTS, U_HAT_POINTS,
};
pub use plan::{
    trace_band, Axis, AxisValue, Cell, ExperimentPlan, Source, TraceScale, DEFAULT_BATCHES,
    DEFAULT_PROCESSING,
};
pub use plot::{emit_plot_data, FigureId, PlotSeries};
pub use presets::{figure_plan, hyper_base_plan, trace_fixture_dir, PRESET_IDS, TRACE_BATCHES};

#[derive(Debug, Error)]
pub enum HarnessError {
    /// The plan or its parameters are unusable (a usage error).
    #[error("invalid plan: {0}")]
    Plan(String),
    /// A scenario could not be built from the plan's inputs.
    #[error("workload for {cell}: {source}")]
    Workload {
        cell: String,
        #[source]
        source: WorkloadError,
    },
    /// A result table could not be read back.
    #[error("result table: {0}")]
    Table(String),
    /// The engine reported a broken invariant.
    #[error("engine on {cell} / {policy}: {source}")]
    Engine {
        cell: String,
        policy: PolicyId,
        #[source]
        source: EngineError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One `(axis value, policy, seed)` run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub value: String,
    pub policy: PolicyId,
    pub seed: u64,
    /// Tasks in the scenario.
    pub n_tasks: usize,
    pub n_bs: usize,
    pub c_drop: f64,
    pub c_e: f64,
    pub c_dis: f64,
    pub c_total: f64,
    /// Penalty of dropping every task in the scenario; normalises `C_drop`.
    pub drop_all_penalty: f64,
    /// Penalty of the tasks no policy can finish (see [`drop_floor`]).
    pub drop_floor: f64,
    pub completed_hard: usize,
    pub completed_soft: usize,
    pub dropped_hard: usize,
    pub dropped_soft: usize,
    pub cloud: usize,
    pub local: usize,
    pub global: usize,
    /// Wall time of the run in milliseconds; excluded from the deterministic CSVs.
    pub wall_ms: f64,
}

impl ResultRow {
    fn from_report(value: String, scenario: &Scenario, r: &RunReport, wall_ms: f64) -> Self {
        ResultRow {
            value,
            policy: r.policy,
            seed: r.seed,
            n_tasks: r.n_tasks,
            n_bs: r.n_bs,
            c_drop: r.ledger.c_drop,
            c_e: r.ledger.c_e,
            c_dis: r.ledger.c_dis,
            c_total: r.c_total(),
            drop_all_penalty: drop_all_penalty(scenario),
            drop_floor: drop_floor(scenario),
            completed_hard: r.counts.completed_hard,
            completed_soft: r.counts.completed_soft,
            dropped_hard: r.counts.dropped_hard(),
            dropped_soft: r.counts.dropped_soft(),
            cloud: r.counts.cloud,
            local: r.counts.local,
            global: r.counts.global,
            wall_ms,
        }
    }
}

/// `Σ_i (1 + δ) · pen_i`: the drop cost if no task were served.
pub fn drop_all_penalty(scenario: &Scenario) -> f64 {
    let cfg = &scenario.cfg;
    scenario
        .tasks
        .iter()
        .map(|t| (1.0 + cfg.delta_pen) * cfg.penalty(t.is_hard()))
        .sum()
}

/// `Σ (1 + δ) · pen_i` over tasks with `d_i < s_i + p_i`, where `s_i` is the
/// first decision boundary after `a_i + Δ`: even full-speed execution started
/// at the earliest possible moment misses the deadline, so every policy drops
/// them. `C_drop − drop_floor` is the capacity-attributable drop cost.
pub fn drop_floor(scenario: &Scenario) -> f64 {
    let cfg = &scenario.cfg;
    scenario
        .tasks
        .iter()
        .filter(|t| {
            cfg.next_boundary(t.arrival + cfg.delta_latency) + t.min_processing > t.deadline
        })
        .map(|t| (1.0 + cfg.delta_pen) * cfg.penalty(t.is_hard()))
        .sum()
}

/// Mean metrics over the seeds of one `(axis value, policy)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub value: String,
    pub policy: PolicyId,
    pub runs: usize,
    pub c_drop: f64,
    pub c_e: f64,
    pub c_dis: f64,
    pub c_total: f64,
    pub drop_all_penalty: f64,
    pub drop_floor: f64,
    pub completed_hard: f64,
    pub completed_soft: f64,
    pub dropped_hard: f64,
    pub dropped_soft: f64,
}

/// Rows of a finished plan.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub plan: String,
    /// Axis name, e.g. `n_tasks`.
    pub axis: String,
    pub rows: Vec<ResultRow>,
}

const DETAIL_COLUMNS: [&str; 19] = [
    "axis",
    "value",
    "policy",
    "seed",
    "n_tasks",
    "n_bs",
    "c_drop",
    "c_e",
    "c_dis",
    "c_total",
    "drop_all_penalty",
    "drop_floor",
    "completed_hard",
    "completed_soft",
    "dropped_hard",
    "dropped_soft",
    "cloud",
    "local",
    "global",
];

const AGGREGATE_COLUMNS: [&str; 15] = [
    "axis",
    "value",
    "policy",
    "runs",
    "mean_c_drop",
    "mean_c_e",
    "mean_c_dis",
    "mean_c_total",
    "mean_drop_all_penalty",
    "mean_drop_floor",
    "mean_completed_hard",
    "mean_completed_soft",
    "mean_dropped_hard",
    "mean_dropped_soft",
    "plan",
];

fn csv_line(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

impl ResultTable {
    /// Axis values in first-appearance order.
    pub fn values(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.value) {
                out.push(r.value.clone());
            }
        }
        out
    }

    /// Policies in first-appearance order.
    pub fn policies(&self) -> Vec<PolicyId> {
        let mut out = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.policy) {
                out.push(r.policy);
            }
        }
        out
    }

    /// Means per `(value, policy)`, summing rows in table order.
    pub fn aggregate(&self) -> Vec<AggregateRow> {
        let mut out = Vec::new();
        for value in self.values() {
            for policy in self.policies() {
                let rows: Vec<&ResultRow> = self
                    .rows
                    .iter()
                    .filter(|r| r.value == value && r.policy == policy)
                    .collect();
                if rows.is_empty() {
                    continue;
                }
                let n = rows.len() as f64;
                let mean =
                    |f: &dyn Fn(&ResultRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
                out.push(AggregateRow {
                    value: value.clone(),
                    policy,
                    runs: rows.len(),
                    c_drop: mean(&|r| r.c_drop),
                    c_e: mean(&|r| r.c_e),
                    c_dis: mean(&|r| r.c_dis),
                    c_total: mean(&|r| r.c_total),
                    drop_all_penalty: mean(&|r| r.drop_all_penalty),
                    drop_floor: mean(&|r| r.drop_floor),
                    completed_hard: mean(&|r| r.completed_hard as f64),
                    completed_soft: mean(&|r| r.completed_soft as f64),
                    dropped_hard: mean(&|r| r.dropped_hard as f64),
                    dropped_soft: mean(&|r| r.dropped_soft as f64),
                });
            }
        }
        out
    }

    /// The mean row for `(value, policy)`.
    pub fn mean(&self, value: &str, policy: PolicyId) -> Option<AggregateRow> {
        self.aggregate()
            .into_iter()
            .find(|a| a.value == value && a.policy == policy)
    }

    /// One line per run; byte-identical across reruns of the same plan.
    pub fn detail_csv(&self) -> String {
        let mut out = String::new();
        csv_line(
            &mut out,
            &DETAIL_COLUMNS
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>(),
        );
        for r in &self.rows {
            csv_line(
                &mut out,
                &[
                    self.axis.clone(),
                    r.value.clone(),
                    r.policy.name().into(),
                    r.seed.to_string(),
                    r.n_tasks.to_string(),
                    r.n_bs.to_string(),
                    r.c_drop.to_string(),
                    r.c_e.to_string(),
                    r.c_dis.to_string(),
                    r.c_total.to_string(),
                    r.drop_all_penalty.to_string(),
                    r.drop_floor.to_string(),
                    r.completed_hard.to_string(),
                    r.completed_soft.to_string(),
                    r.dropped_hard.to_string(),
                    r.dropped_soft.to_string(),
                    r.cloud.to_string(),
                    r.local.to_string(),
                    r.global.to_string(),
                ],
            );
        }
        out
    }

    /// Means per `(value, policy)`.
    pub fn aggregate_csv(&self) -> String {
        let mut out = String::new();
        csv_line(
            &mut out,
            &AGGREGATE_COLUMNS
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>(),
        );
        for a in self.aggregate() {
            csv_line(
                &mut out,
                &[
                    self.axis.clone(),
                    a.value.clone(),
                    a.policy.name().into(),
                    a.runs.to_string(),
                    a.c_drop.to_string(),
                    a.c_e.to_string(),
                    a.c_dis.to_string(),
                    a.c_total.to_string(),
                    a.drop_all_penalty.to_string(),
                    a.drop_floor.to_string(),
                    a.completed_hard.to_string(),
                    a.completed_soft.to_string(),
                    a.dropped_hard.to_string(),
                    a.dropped_soft.to_string(),
                    self.plan.clone(),
                ],
            );
        }
        out
    }

    /// Wall time per run; not deterministic.
    pub fn timings_csv(&self) -> String {
        let mut out = String::from("value,policy,seed,wall_ms\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.3}",
                r.value,
                r.policy.name(),
                r.seed,
                r.wall_ms
            );
        }
        out
    }

    /// Reads a table written by [`ResultTable::detail_csv`]; wall times come back as zero.
    pub fn from_detail_csv(text: &str, plan: &str) -> Result<Self, HarnessError> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let headers = rdr
            .headers()
            .map_err(|e| HarnessError::Table(e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != DETAIL_COLUMNS {
            return Err(HarnessError::Table(format!(
                "unexpected detail columns: {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut axis = String::new();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| HarnessError::Table(e.to_string()))?;
            let bad =
                |c: usize| HarnessError::Table(format!("row {}: bad {}", i + 2, DETAIL_COLUMNS[c]));
            let f = |c: usize| -> Result<f64, HarnessError> { rec[c].parse().map_err(|_| bad(c)) };
            let n =
                |c: usize| -> Result<usize, HarnessError> { rec[c].parse().map_err(|_| bad(c)) };
            if i == 0 {
                axis = rec[0].to_string();
            } else if rec[0] != axis {
                return Err(HarnessError::Table("mixed axes in one table".into()));
            }
            rows.push(ResultRow {
                value: rec[1].to_string(),
                policy: rec[2].parse().map_err(|_| bad(2))?,
                seed: rec[3].parse().map_err(|_| bad(3))?,
                n_tasks: n(4)?,
                n_bs: n(5)?,
                c_drop: f(6)?,
                c_e: f(7)?,
                c_dis: f(8)?,
                c_total: f(9)?,
                drop_all_penalty: f(10)?,
                drop_floor: f(11)?,
                completed_hard: n(12)?,
                completed_soft: n(13)?,
                dropped_hard: n(14)?,
                dropped_soft: n(15)?,
                cloud: n(16)?,
                local: n(17)?,
                global: n(18)?,
                wall_ms: 0.0,
            });
        }
        Ok(ResultTable {
            plan: plan.to_string(),
            axis,
            rows,
        })
    }

    /// Writes `detail.csv`, `aggregate.csv` and `timings.csv` under `dir`.
    pub fn write_to(&self, dir: &std::path::Path) -> Result<Vec<PathBuf>, HarnessError> {
        std::fs::create_dir_all(dir)?;
        let files = [
            ("detail.csv", self.detail_csv()),
            ("aggregate.csv", self.aggregate_csv()),
            ("timings.csv", self.timings_csv()),
        ];
        let mut out = Vec::new();
        for (name, body) in files {
            let p = dir.join(name);
            std::fs::write(&p, body)?;
            out.push(p);
        }
        Ok(out)
    }
}

/// Trace inputs loaded once per plan.
struct TraceData {
    tasks: Vec<u8>,
    locations: Vec<u8>,
}

fn load_trace(plan: &ExperimentPlan) -> Result<Option<TraceData>, HarnessError> {
    match &plan.source {
        Source::Synthetic => Ok(None),
        Source::Trace {
            tasks, locations, ..
        } => {
            let read = |p: &PathBuf| {
                std::fs::read(p).map_err(|e| HarnessError::Workload {
                    cell: plan.name.clone(),
                    source: WorkloadError::Ingest(format!("{}: {e}", p.display())),
                })
            };
            Ok(Some(TraceData {
                tasks: read(tasks)?,
                locations: read(locations)?,
            }))
        }
    }
}

/// Builds the scenario for one cell of `plan`.
pub fn build_scenario(plan: &ExperimentPlan, cell: &Cell) -> Result<Scenario, HarnessError> {
    let trace = load_trace(plan)?;
    build_with(plan, cell, trace.as_ref())
}

fn build_with(
    plan: &ExperimentPlan,
    cell: &Cell,
    trace: Option<&TraceData>,
) -> Result<Scenario, HarnessError> {
    let wrap = |source| HarnessError::Workload {
        cell: format!("{}={} seed={}", plan.axis.name(), cell.value, cell.seed),
        source,
    };
    match (&plan.source, trace) {
        (Source::Trace { mapping, scale, .. }, Some(data)) => {
            let n_tasks = plan.scenario_tasks(cell);
            let t_max = match *scale {
                TraceScale::TMax(t) => t,
                TraceScale::UnitsPerSlot(u) => {
                    let span = trace_span(&data.tasks[..], mapping, n_tasks).map_err(wrap)?;
                    ((span / u).ceil() as Time).max(1)
                }
            };
            let params = ScalingParams {
                n_tasks,
                n_bs: cell.n_bs,
                grid_size: cell.cfg.grid_size,
                t_max,
                mapping: mapping.clone(),
                slack: plan::trace_band(cell.slack),
                hard_ratio: cell.hard_ratio,
                seed: cell.seed,
                cfg: cell.cfg.clone(),
            };
            ingest_trace(&data.tasks[..], &data.locations[..], &params)
                .map(|(s, _)| s)
                .map_err(wrap)
        }
        _ => generate_synthetic(&plan.generator_params(cell)).map_err(wrap),
    }
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Runs every policy on every cell. Output order is plan order: axis value,
/// then seed, then the plan's policy order.
pub fn run_plan(plan: &ExperimentPlan) -> Result<ResultTable, HarnessError> {
    plan.validate()?;
    let trace = load_trace(plan)?;
    let cells = plan.cells();
    let per_cell = par_map(&cells, |cell| -> Result<Vec<ResultRow>, HarnessError> {
        let scenario = build_with(plan, cell, trace.as_ref())?;
        let label = cell.value.to_string();
        plan.policies
            .iter()
            .map(|&policy| {
                let t0 = Instant::now();
                let report = run(&scenario, policy).map_err(|source| HarnessError::Engine {
                    cell: format!("{}={label} seed={}", plan.axis.name(), cell.seed),
                    policy,
                    source,
                })?;
                let wall = t0.elapsed().as_secs_f64() * 1e3;
                Ok(ResultRow::from_report(
                    label.clone(),
                    &scenario,
                    &report,
                    wall,
                ))
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in per_cell {
        rows.extend(r?);
    }
    Ok(ResultTable {
        plan: plan.name.clone(),
        axis: plan.axis.name().to_string(),
        rows,
    })
}

/// Applies command-line style overrides of `Û^max` / `D̂^max` to a config.
pub fn override_caps(cfg: &mut VecsConfig, u_hat: Option<f64>, d_hat: Option<f64>) {
    if let Some(u) = u_hat {
        cfg.u_hat_max = u;
    }
    if let Some(d) = d_hat {
        cfg.d_hat_max = d;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_plan() -> ExperimentPlan {
        ExperimentPlan {
            name: "small".into(),
            axis: Axis::NTasks(vec![5, 10]),
            repetitions: 2,
            n_bs: 4,
            batches: 4,
            processing: (1, 10),
            ..Default::default()
        }
    }

    #[test]
    fn rows_follow_plan_order() {
        let t = run_plan(&small_plan()).unwrap();
        assert_eq!(t.rows.len(), 2 * 2 * 4);
        assert_eq!(t.rows[0].value, "5");
        assert_eq!(t.rows[0].policy, PolicyId::SelfishHolding);
        assert_eq!(t.rows[3].policy, PolicyId::BaruahBaseline);
        assert_eq!(t.rows[4].seed, 1);
        assert_eq!(t.rows[8].value, "10");
        assert_eq!(t.rows[8].n_tasks, 40);
        for r in &t.rows {
            assert!(r.drop_floor <= r.c_drop + 1e-9, "{r:?}");
        }
    }

    #[test]
    fn detail_csv_round_trips_and_aggregates_match() {
        let t = run_plan(&small_plan()).unwrap();
        let back = ResultTable::from_detail_csv(&t.detail_csv(), "small").unwrap();
        assert_eq!(back.detail_csv(), t.detail_csv());
        assert_eq!(back.aggregate_csv(), t.aggregate_csv());
        let a = t.mean("10", PolicyId::Nearest).unwrap();
        let manual: f64 = t
            .rows
            .iter()
            .filter(|r| r.value == "10" && r.policy == PolicyId::Nearest)
            .map(|r| r.c_total)
            .sum::<f64>()
            / 2.0;
        assert_eq!(a.c_total, manual);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let a = run_plan(&small_plan()).unwrap();
        let b = run_plan(&small_plan()).unwrap();
        assert_eq!(a.detail_csv(), b.detail_csv());
        assert_eq!(a.aggregate_csv(), b.aggregate_csv());
    }

    #[test]
    fn rejects_foreign_tables() {
        assert!(ResultTable::from_detail_csv("a,b\n1,2\n", "x").is_err());
    }
}
