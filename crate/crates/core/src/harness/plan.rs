//! Experiment plans: a sweep axis, a policy list and seeded repetitions over
//! a synthetic or trace-derived workload.
//!
//! Plan files are `key = value` lines; `config.<field>` lines override
//! `VecsConfig` fields by their key-value names.

use std::fmt;
use std::path::PathBuf;

use super::HarnessError;
use crate::model::{SlackClass, Time, VecsConfig};
use crate::policies::PolicyId;
use crate::workload::{GeneratorParams, SlackTarget, TraceMapping};

/// Where scenarios come from.
#[allow(clippy::large_enum_variant)] // one per plan; boxing buys nothing
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Synthetic,
    /// Task and location traces plus the column mapping.
    Trace {
        tasks: PathBuf,
        locations: PathBuf,
        mapping: TraceMapping,
        scale: TraceScale,
    },
}

/// How trace times map onto slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceScale {
    /// Every cell's times land in `[0, t_max]`.
    TMax(Time),
    /// Fixed resolution: `t_max` is the selected records' span divided by
    /// this many source units per slot, so `N` lengthens the trace window
    /// instead of compressing it.
    UnitsPerSlot(f64),
}

/// The swept parameter and its values.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    /// Tasks per batch `N`.
    NTasks(Vec<usize>),
    NBs(Vec<usize>),
    Slack(Vec<SlackTarget>),
    /// `hard:soft`.
    Ratio(Vec<(u32, u32)>),
    UHat(Vec<f64>),
    DHat(Vec<f64>),
    /// Every `(Û^max, D̂^max)` pair.
    Grid {
        u_hat: Vec<f64>,
        d_hat: Vec<f64>,
    },
}

/// One point on an axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisValue {
    NTasks(usize),
    NBs(usize),
    Slack(SlackTarget),
    Ratio(u32, u32),
    UHat(f64),
    DHat(f64),
    Grid(f64, f64),
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::NTasks(_) => "n_tasks",
            Axis::NBs(_) => "n_bs",
            Axis::Slack(_) => "slack",
            Axis::Ratio(_) => "hard_ratio",
            Axis::UHat(_) => "u_hat_max",
            Axis::DHat(_) => "d_hat_max",
            Axis::Grid { .. } => "u_hat_x_d_hat",
        }
    }

    pub fn values(&self) -> Vec<AxisValue> {
        match self {
            Axis::NTasks(v) => v.iter().map(|&n| AxisValue::NTasks(n)).collect(),
            Axis::NBs(v) => v.iter().map(|&m| AxisValue::NBs(m)).collect(),
            Axis::Slack(v) => v.iter().map(|&s| AxisValue::Slack(s)).collect(),
            Axis::Ratio(v) => v.iter().map(|&(h, s)| AxisValue::Ratio(h, s)).collect(),
            Axis::UHat(v) => v.iter().map(|&u| AxisValue::UHat(u)).collect(),
            Axis::DHat(v) => v.iter().map(|&d| AxisValue::DHat(d)).collect(),
            Axis::Grid { u_hat, d_hat } => u_hat
                .iter()
                .flat_map(|&u| d_hat.iter().map(move |&d| AxisValue::Grid(u, d)))
                .collect(),
        }
    }

    fn len(&self) -> usize {
        match self {
            Axis::NTasks(v) => v.len(),
            Axis::NBs(v) => v.len(),
            Axis::Slack(v) => v.len(),
            Axis::Ratio(v) => v.len(),
            Axis::UHat(v) | Axis::DHat(v) => v.len(),
            Axis::Grid { u_hat, d_hat } => u_hat.len() * d_hat.len(),
        }
    }

    /// Parses `values` for the axis called `name`.
    pub fn parse(name: &str, values: &str) -> Result<Axis, HarnessError> {
        let items: Vec<&str> = values
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        let bad = |v: &str| HarnessError::Plan(format!("bad {name} value `{v}`"));
        let floats = || -> Result<Vec<f64>, HarnessError> {
            items
                .iter()
                .map(|v| v.parse::<f64>().map_err(|_| bad(v)))
                .collect()
        };
        Ok(match name {
            "n_tasks" => Axis::NTasks(
                items
                    .iter()
                    .map(|v| v.parse().map_err(|_| bad(v)))
                    .collect::<Result<_, _>>()?,
            ),
            "n_bs" => Axis::NBs(
                items
                    .iter()
                    .map(|v| v.parse().map_err(|_| bad(v)))
                    .collect::<Result<_, _>>()?,
            ),
            "slack" => Axis::Slack(
                items
                    .iter()
                    .map(|v| v.parse().map_err(|_| bad(v)))
                    .collect::<Result<_, _>>()?,
            ),
            "hard_ratio" => Axis::Ratio(
                items
                    .iter()
                    .map(|v| parse_ratio(v).ok_or_else(|| bad(v)))
                    .collect::<Result<_, _>>()?,
            ),
            "u_hat_max" => Axis::UHat(floats()?),
            "d_hat_max" => Axis::DHat(floats()?),
            "u_hat_x_d_hat" => {
                let mut u_hat = Vec::new();
                let mut d_hat = Vec::new();
                for v in &items {
                    let (u, d) = v.split_once('x').ok_or_else(|| bad(v))?;
                    let u: f64 = u.trim().parse().map_err(|_| bad(v))?;
                    let d: f64 = d.trim().parse().map_err(|_| bad(v))?;
                    if !u_hat.contains(&u) {
                        u_hat.push(u);
                    }
                    if !d_hat.contains(&d) {
                        d_hat.push(d);
                    }
                }
                Axis::Grid { u_hat, d_hat }
            }
            other => return Err(HarnessError::Plan(format!("unknown axis `{other}`"))),
        })
    }

    fn values_text(&self) -> String {
        self.values()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::NTasks(n) => write!(f, "{n}"),
            AxisValue::NBs(m) => write!(f, "{m}"),
            AxisValue::Slack(s) => f.write_str(s.name()),
            AxisValue::Ratio(h, s) => write!(f, "{h}:{s}"),
            AxisValue::UHat(u) => write!(f, "{u}"),
            AxisValue::DHat(d) => write!(f, "{d}"),
            AxisValue::Grid(u, d) => write!(f, "{u}x{d}"),
        }
    }
}

pub(crate) fn parse_ratio(s: &str) -> Option<(u32, u32)> {
    let (h, soft) = s.trim().split_once(':')?;
    Some((h.trim().parse().ok()?, soft.trim().parse().ok()?))
}

/// A full experiment: every axis value × policy × repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub name: String,
    pub source: Source,
    pub axis: Axis,
    pub policies: Vec<PolicyId>,
    pub repetitions: u64,
    /// Repetition `r` uses seed `seed_base + r`.
    pub seed_base: u64,
    /// Tasks per batch `N`; a scenario holds `N · batches` tasks.
    pub n_tasks: usize,
    pub n_bs: usize,
    /// Number of batches over which tasks arrive.
    pub batches: u64,
    pub slack: SlackTarget,
    pub hard_ratio: (u32, u32),
    /// Inclusive range of synthetic minimum processing times.
    pub processing: (Time, Time),
    pub cfg: VecsConfig,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            name: "plan".into(),
            source: Source::Synthetic,
            axis: Axis::NTasks(vec![500]),
            policies: PolicyId::ALL.to_vec(),
            repetitions: 1,
            seed_base: 0,
            n_tasks: 500,
            n_bs: 50,
            batches: DEFAULT_BATCHES,
            slack: SlackTarget::Normal,
            hard_ratio: (1, 1),
            processing: DEFAULT_PROCESSING,
            cfg: VecsConfig::default(),
        }
    }
}

/// Batches of arrivals per synthetic scenario.
pub const DEFAULT_BATCHES: u64 = 20;
/// Synthetic minimum processing range; calibrated so that 50 base stations
/// saturate between `N = 350` and `N = 500` tasks per batch.
pub const DEFAULT_PROCESSING: (Time, Time) = (1, 40);

/// Scenario-building parameters for one axis value and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub value: AxisValue,
    pub seed: u64,
    pub n_tasks: usize,
    pub n_bs: usize,
    pub slack: SlackTarget,
    pub hard_ratio: (u32, u32),
    pub cfg: VecsConfig,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Plan(m));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.policies.is_empty() {
            return bad("policy list is empty".into());
        }
        if self.axis.len() == 0 {
            return bad(format!("axis {} has no values", self.axis.name()));
        }
        if self.batches == 0 {
            return bad("batches must be at least 1".into());
        }
        if let Source::Trace { scale, .. } = self.source {
            let ok = match scale {
                TraceScale::TMax(t) => t > 0,
                TraceScale::UnitsPerSlot(u) => u.is_finite() && u > 0.0,
            };
            if !ok {
                return bad("trace scale must be positive".into());
            }
        }
        if let (Source::Trace { .. }, Axis::Slack(v)) = (&self.source, &self.axis) {
            if v.contains(&SlackTarget::Mixed) {
                return bad("trace plans need a single slack band per value".into());
            }
        }
        for cell in self.cells() {
            if cell.n_tasks == 0 || cell.n_bs == 0 {
                return bad(format!("{}: n_tasks and n_bs must be positive", cell.value));
            }
            if cell.hard_ratio.0 == 0 || cell.hard_ratio.1 == 0 {
                return bad(format!("{}: ratio components must be positive", cell.value));
            }
            cell.cfg
                .validate()
                .map_err(|e| HarnessError::Plan(format!("{}: {e}", cell.value)))?;
            if self.source == Source::Synthetic {
                self.generator_params(&cell)
                    .validate()
                    .map_err(|e| HarnessError::Plan(format!("{}: {e}", cell.value)))?;
            }
        }
        Ok(())
    }

    /// All `(axis value, seed)` cells in output order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for value in self.axis.values() {
            for r in 0..self.repetitions {
                let mut cell = Cell {
                    value,
                    seed: self.seed_base + r,
                    n_tasks: self.n_tasks,
                    n_bs: self.n_bs,
                    slack: self.slack,
                    hard_ratio: self.hard_ratio,
                    cfg: self.cfg.clone(),
                };
                match value {
                    AxisValue::NTasks(n) => cell.n_tasks = n,
                    AxisValue::NBs(m) => cell.n_bs = m,
                    AxisValue::Slack(s) => cell.slack = s,
                    AxisValue::Ratio(h, s) => cell.hard_ratio = (h, s),
                    AxisValue::UHat(u) => cell.cfg.u_hat_max = u,
                    AxisValue::DHat(d) => cell.cfg.d_hat_max = d,
                    AxisValue::Grid(u, d) => {
                        cell.cfg.u_hat_max = u;
                        cell.cfg.d_hat_max = d;
                    }
                }
                out.push(cell);
            }
        }
        out
    }

    /// Total tasks in one scenario of `cell`.
    pub fn scenario_tasks(&self, cell: &Cell) -> usize {
        cell.n_tasks * self.batches as usize
    }

    pub fn generator_params(&self, cell: &Cell) -> GeneratorParams {
        GeneratorParams {
            n_tasks: self.scenario_tasks(cell),
            n_bs: cell.n_bs,
            n_avs: None,
            arrival_max: self.batches * cell.cfg.t_beta - 1,
            slack: cell.slack,
            hard_ratio: cell.hard_ratio,
            grid_size: cell.cfg.grid_size,
            processing: self.processing,
            seed: cell.seed,
            cfg: cell.cfg.clone(),
        }
    }

    /// Serialises to the plan-file format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("name", self.name.clone());
        match &self.source {
            Source::Synthetic => kv("source", "synthetic".into()),
            Source::Trace {
                tasks,
                locations,
                mapping,
                scale,
            } => {
                kv("source", "trace".into());
                kv("trace_tasks", tasks.display().to_string());
                kv("trace_locations", locations.display().to_string());
                match scale {
                    TraceScale::TMax(t) => kv("trace_t_max", t.to_string()),
                    TraceScale::UnitsPerSlot(u) => kv("trace_units_per_slot", u.to_string()),
                }
                kv("mapping.arrival", mapping.arrival.clone());
                kv("mapping.processing", mapping.processing.clone());
                kv(
                    "mapping.deadline",
                    mapping.deadline.clone().unwrap_or_else(|| "none".into()),
                );
                kv(
                    "mapping.flag",
                    mapping.flag.clone().unwrap_or_else(|| "none".into()),
                );
                kv("mapping.longitude", mapping.longitude.clone());
                kv("mapping.latitude", mapping.latitude.clone());
            }
        }
        kv("axis", self.axis.name().into());
        kv("values", self.axis.values_text());
        kv(
            "policies",
            self.policies
                .iter()
                .map(|p| p.name())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("repetitions", self.repetitions.to_string());
        kv("seed_base", self.seed_base.to_string());
        kv("n_tasks", self.n_tasks.to_string());
        kv("n_bs", self.n_bs.to_string());
        kv("batches", self.batches.to_string());
        kv("slack", self.slack.name().into());
        kv(
            "hard_ratio",
            format!("{}:{}", self.hard_ratio.0, self.hard_ratio.1),
        );
        kv(
            "processing",
            format!("{},{}", self.processing.0, self.processing.1),
        );
        for line in self.cfg.to_kv_text().lines() {
            if let Some((k, v)) = line.split_once('=') {
                kv(&format!("config.{}", k.trim()), v.trim().to_string());
            }
        }
        s
    }

    /// Parses the plan-file format. Unset keys keep their defaults; relative
    /// trace paths resolve against `base_dir`.
    pub fn from_text(text: &str, base_dir: &std::path::Path) -> Result<Self, HarnessError> {
        let mut plan = ExperimentPlan::default();
        let mut axis_name: Option<String> = None;
        let mut values: Option<String> = None;
        let mut source = "synthetic".to_string();
        let mut tasks = None;
        let mut locations = None;
        let mut scale = None;
        let mut mapping = TraceMapping::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| HarnessError::Plan(format!("plan line {}: {m}", i + 1));
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err("expected key = value".into()))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |v: &str| -> Result<u64, HarnessError> {
                v.parse()
                    .map_err(|_| err(format!("bad number `{v}` for {k}")))
            };
            let opt = |v: &str| (v != "none").then(|| v.to_string());
            match k {
                "name" => plan.name = v.to_string(),
                "source" => source = v.to_string(),
                "trace_tasks" => tasks = Some(base_dir.join(v)),
                "trace_locations" => locations = Some(base_dir.join(v)),
                "trace_t_max" => scale = Some(TraceScale::TMax(num(v)?)),
                "trace_units_per_slot" => {
                    scale = Some(TraceScale::UnitsPerSlot(
                        v.parse()
                            .map_err(|_| err(format!("bad number `{v}` for {k}")))?,
                    ))
                }
                "mapping.arrival" => mapping.arrival = v.to_string(),
                "mapping.processing" => mapping.processing = v.to_string(),
                "mapping.deadline" => mapping.deadline = opt(v),
                "mapping.flag" => mapping.flag = opt(v),
                "mapping.longitude" => mapping.longitude = v.to_string(),
                "mapping.latitude" => mapping.latitude = v.to_string(),
                "axis" => axis_name = Some(v.to_string()),
                "values" => values = Some(v.to_string()),
                "policies" => {
                    plan.policies = if v == "all" {
                        PolicyId::ALL.to_vec()
                    } else {
                        v.split(',')
                            .map(|p| p.parse().map_err(|e| err(format!("{e}"))))
                            .collect::<Result<_, _>>()?
                    }
                }
                "repetitions" => plan.repetitions = num(v)?,
                "seed_base" => plan.seed_base = num(v)?,
                "n_tasks" => plan.n_tasks = num(v)? as usize,
                "n_bs" => plan.n_bs = num(v)? as usize,
                "batches" => plan.batches = num(v)?,
                "slack" => plan.slack = v.parse().map_err(|e: String| err(e))?,
                "hard_ratio" => {
                    plan.hard_ratio =
                        parse_ratio(v).ok_or_else(|| err(format!("bad ratio `{v}`")))?
                }
                "processing" => {
                    let (lo, hi) = v
                        .split_once(',')
                        .ok_or_else(|| err("processing = lo,hi".into()))?;
                    plan.processing = (num(lo.trim())?, num(hi.trim())?);
                }
                _ => match k.strip_prefix("config.") {
                    Some(field) => plan.cfg.set(field, v).map_err(|e| err(format!("{e}")))?,
                    None => return Err(err(format!("unknown key `{k}`"))),
                },
            }
        }
        plan.source = match source.as_str() {
            "synthetic" => Source::Synthetic,
            "trace" => Source::Trace {
                tasks: tasks.ok_or_else(|| HarnessError::Plan("trace_tasks missing".into()))?,
                locations: locations
                    .ok_or_else(|| HarnessError::Plan("trace_locations missing".into()))?,
                mapping,
                scale: scale.ok_or_else(|| {
                    HarnessError::Plan("trace_t_max or trace_units_per_slot missing".into())
                })?,
            },
            other => return Err(HarnessError::Plan(format!("unknown source `{other}`"))),
        };
        let axis_name = axis_name.ok_or_else(|| HarnessError::Plan("axis missing".into()))?;
        let values = values.ok_or_else(|| HarnessError::Plan("values missing".into()))?;
        plan.axis = Axis::parse(&axis_name, &values)?;
        plan.validate()?;
        Ok(plan)
    }
}

/// Slack band for trace ingestion; `None` for `Mixed`, which plans reject.
/// The single band a trace slack target imposes; `Mixed` has none.
pub fn trace_band(s: SlackTarget) -> Option<SlackClass> {
    match s {
        SlackTarget::Tight => Some(SlackClass::Tight),
        SlackTarget::Normal => Some(SlackClass::Normal),
        SlackTarget::Loose => Some(SlackClass::Loose),
        SlackTarget::Mixed => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    #[test]
    fn plan_text_round_trip() {
        let plan = ExperimentPlan {
            name: "t".into(),
            axis: Axis::Ratio(vec![(1, 3), (3, 1)]),
            policies: vec![PolicyId::Nearest],
            repetitions: 3,
            ..Default::default()
        };
        let back = ExperimentPlan::from_text(&plan.to_text(), Path::new(".")).unwrap();
        assert_eq!(back, plan);
    }

    #[test]
    fn grid_axis_is_a_product() {
        let a = Axis::parse("u_hat_x_d_hat", "0.8x10,0.8x20,0.9x10,0.9x20").unwrap();
        assert_eq!(a.values().len(), 4);
        assert_eq!(a.values()[1].to_string(), "0.8x20");
    }

    #[test]
    fn cells_apply_axis_values() {
        let plan = ExperimentPlan {
            axis: Axis::DHat(vec![5.0, 50.0]),
            repetitions: 2,
            seed_base: 10,
            ..Default::default()
        };
        let cells = plan.cells();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[3].cfg.d_hat_max, 50.0);
        assert_eq!(cells[3].seed, 11);
    }

    #[test]
    fn rejects_bad_plans() {
        let dir = Path::new(".");
        assert!(
            ExperimentPlan::from_text("axis = n_tasks\nvalues = 10\nrepetitions = 0", dir).is_err()
        );
        assert!(ExperimentPlan::from_text("axis = colour\nvalues = red", dir).is_err());
        assert!(
            ExperimentPlan::from_text("axis = n_tasks\nvalues = 10\npolicies = fifo", dir).is_err()
        );
        assert!(ExperimentPlan::from_text("axis = n_tasks\nvalues = 10\nbogus = 1", dir).is_err());
        assert!(ExperimentPlan::from_text("axis = n_tasks", dir).is_err());
    }
}
