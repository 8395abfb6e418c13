//! `vecsched` command-line harness.
//!
//! Exit codes: 0 success, 1 usage error, 2 input/ingestion error,
//! 3 internal invariant violation.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vecsched::engine::{run, EngineError};
use vecsched::harness::{
    emit_plot_data, figure_plan, hyper_base_plan, hyperparameter_study, override_caps, run_plan,
    trace_band, ExperimentPlan, HarnessError, ResultTable, DEFAULT_BATCHES, DEFAULT_PROCESSING,
};
use vecsched::model::{ModelError, Time, VecsConfig};
use vecsched::policies::{PolicyError, PolicyId};
use vecsched::workload::{
    generate_synthetic, ingest_trace, read_scenario, write_scenario, GeneratorParams,
    ScalingParams, SlackTarget, TraceMapping, WorkloadError,
};

/// Datasets of the §V-D hyperparameter study (`N × M`).
const HYPER_DATASETS: [(usize, usize); 2] = [(1000, 100), (500, 100)];

#[derive(Parser)]
#[command(
    name = "vecsched",
    version,
    about = "Mixed-criticality task offloading simulator"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Generate a synthetic scenario file.
    Gen(GenArgs),
    /// Turn a task trace and a location trace into a scenario file.
    Ingest(IngestArgs),
    /// Simulate one scenario under one policy.
    Run(RunArgs),
    /// Run an experiment matrix from a plan file or a figure preset.
    Plan(PlanArgs),
    /// Emit plot-ready series from a detail table.
    PlotData(PlotArgs),
}

/// Config sources shared by every verb that builds or runs a scenario.
#[derive(Args)]
struct CfgArgs {
    /// Key-value config file mirroring `VecsConfig` field names.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Global-mode utilisation cap as a fraction of `U^max`.
    #[arg(long)]
    u_hat_max: Option<f64>,
    /// Global-mode offload radius.
    #[arg(long)]
    d_hat_max: Option<f64>,
}

#[derive(Args)]
struct GenArgs {
    /// Output scenario file; stdout when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tasks per batch.
    #[arg(long, default_value_t = 500)]
    n_tasks: usize,
    #[arg(long, default_value_t = 50)]
    n_bs: usize,
    /// Arrival batches; the scenario holds `n_tasks · batches` tasks.
    #[arg(long, default_value_t = DEFAULT_BATCHES)]
    batches: u64,
    /// Distinct vehicles; one per task when omitted.
    #[arg(long)]
    n_avs: Option<usize>,
    /// tight, normal, loose or mixed.
    #[arg(long, default_value = "normal")]
    slack: String,
    /// Hard:soft ratio, e.g. `2:1`.
    #[arg(long, default_value = "1:1")]
    hard_ratio: String,
    /// Inclusive processing-time range `lo,hi`.
    #[arg(long)]
    processing: Option<String>,
    #[command(flatten)]
    cfg: CfgArgs,
}

#[derive(Args)]
struct IngestArgs {
    /// Task trace CSV.
    #[arg(long)]
    tasks: PathBuf,
    /// Location trace CSV.
    #[arg(long)]
    locations: PathBuf,
    /// Column mapping file (`field = column` lines).
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Output scenario file; stdout when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace records to keep.
    #[arg(long, default_value_t = 500)]
    n_tasks: usize,
    #[arg(long, default_value_t = 100)]
    n_bs: usize,
    /// Scaled arrival window `[0, t_max]`.
    #[arg(long, default_value_t = 300)]
    t_max: Time,
    /// Redraw deadlines in this band (tight, normal, loose); keep trace deadlines when omitted.
    #[arg(long)]
    slack: Option<String>,
    /// Hard:soft ratio used when the mapping has no flag column.
    #[arg(long, default_value = "1:1")]
    hard_ratio: String,
    #[command(flatten)]
    cfg: CfgArgs,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    policy: String,
    /// Overrides the seed recorded in the scenario (labels the run only).
    #[arg(long)]
    seed: Option<u64>,
    /// Writes `report.txt` and `events.log` here; the report goes to stdout otherwise.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    cfg: CfgArgs,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long, conflicts_with = "figure", required_unless_present = "figure")]
    plan_file: Option<PathBuf>,
    /// Preset id: fig6..fig9, trace_tasks, trace_slack, trace_ratio, trace_variants, hyper.
    #[arg(long)]
    figure: Option<String>,
    #[arg(long)]
    out_dir: PathBuf,
    /// Overrides the plan's first seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the plan's repetitions.
    #[arg(long)]
    repetitions: Option<u64>,
    /// Restricts the plan to one policy.
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    u_hat_max: Option<f64>,
    #[arg(long)]
    d_hat_max: Option<f64>,
}

#[derive(Args)]
struct PlotArgs {
    /// `detail.csv` written by `plan`.
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    figure: String,
    #[arg(long)]
    out_dir: PathBuf,
}

/// An error with its exit code.
struct CliError {
    code: u8,
    msg: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

fn usage(msg: impl fmt::Display) -> CliError {
    CliError {
        code: 1,
        msg: msg.to_string(),
    }
}

fn input(msg: impl fmt::Display) -> CliError {
    CliError {
        code: 2,
        msg: msg.to_string(),
    }
}

fn engine_code(e: &EngineError) -> u8 {
    match e {
        EngineError::Scenario(_) => 2,
        EngineError::Policy(PolicyError::UnknownPolicy(_) | PolicyError::EmptyFavourites) => 1,
        EngineError::Invariant(_) | EngineError::Model(_) | EngineError::Policy(_) => 3,
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        CliError {
            code: engine_code(&e),
            msg: e.to_string(),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        let code = match &e {
            HarnessError::Plan(_) => 1,
            HarnessError::Engine { source, .. } => engine_code(source),
            HarnessError::Workload { .. } | HarnessError::Table(_) | HarnessError::Io(_) => 2,
        };
        CliError {
            code,
            msg: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, body: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, body).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, body: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write(p, body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn parse_ratio(s: &str) -> Result<(u32, u32), CliError> {
    let bad = || usage(format!("bad hard ratio `{s}` (expected e.g. 2:1)"));
    let (h, so) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        h.trim().parse().map_err(|_| bad())?,
        so.trim().parse().map_err(|_| bad())?,
    ))
}

fn parse_range(s: &str) -> Result<(Time, Time), CliError> {
    let bad = || usage(format!("bad range `{s}` (expected lo,hi)"));
    let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
    Ok((
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    ))
}

fn parse_policy(s: &str) -> Result<PolicyId, CliError> {
    s.parse().map_err(usage)
}

/// Applies `--config` lines onto `cfg`, then the cap flags, then validates.
fn apply_cfg(cfg: &mut VecsConfig, args: &CfgArgs) -> Result<(), CliError> {
    if let Some(path) = &args.config {
        let text = read(path)?;
        let from_file = |e: ModelError| input(format!("{}: {e}", path.display()));
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                input(format!(
                    "{}: line {}: expected `key = value`",
                    path.display(),
                    i + 1
                ))
            })?;
            cfg.set(k, v).map_err(from_file)?;
        }
        cfg.validate().map_err(from_file)?;
    }
    override_caps(cfg, args.u_hat_max, args.d_hat_max);
    cfg.validate().map_err(usage)
}

fn workload(e: WorkloadError) -> CliError {
    match e {
        WorkloadError::InvalidParams(_) => usage(e),
        _ => input(e),
    }
}

fn cmd_gen(a: GenArgs) -> Result<(), CliError> {
    let mut cfg = VecsConfig::default();
    apply_cfg(&mut cfg, &a.cfg)?;
    if a.batches == 0 {
        return Err(usage("--batches must be at least 1"));
    }
    let params = GeneratorParams {
        n_tasks: a.n_tasks * a.batches as usize,
        n_bs: a.n_bs,
        n_avs: a.n_avs,
        arrival_max: a.batches * cfg.t_beta - 1,
        slack: a.slack.parse::<SlackTarget>().map_err(usage)?,
        hard_ratio: parse_ratio(&a.hard_ratio)?,
        grid_size: cfg.grid_size,
        processing: match &a.processing {
            Some(s) => parse_range(s)?,
            None => DEFAULT_PROCESSING,
        },
        seed: a.seed,
        cfg,
    };
    let s = generate_synthetic(&params).map_err(workload)?;
    emit(a.scenario.as_deref(), &write_scenario(&s))?;
    eprintln!(
        "generated {} tasks on {} base stations",
        s.tasks.len(),
        s.n_bs()
    );
    Ok(())
}

fn cmd_ingest(a: IngestArgs) -> Result<(), CliError> {
    let mut cfg = VecsConfig::default();
    apply_cfg(&mut cfg, &a.cfg)?;
    let mapping = match &a.mapping {
        Some(p) => TraceMapping::from_kv_text(&read(p)?).map_err(input)?,
        None => TraceMapping::default(),
    };
    let slack = match &a.slack {
        Some(s) => Some(
            trace_band(s.parse::<SlackTarget>().map_err(usage)?)
                .ok_or_else(|| usage("trace ingestion needs a single slack band, not mixed"))?,
        ),
        None => None,
    };
    let params = ScalingParams {
        n_tasks: a.n_tasks,
        n_bs: a.n_bs,
        grid_size: cfg.grid_size,
        t_max: a.t_max,
        mapping,
        slack,
        hard_ratio: parse_ratio(&a.hard_ratio)?,
        seed: a.seed,
        cfg,
    };
    let tasks =
        fs::File::open(&a.tasks).map_err(|e| input(format!("{}: {e}", a.tasks.display())))?;
    let locs = fs::File::open(&a.locations)
        .map_err(|e| input(format!("{}: {e}", a.locations.display())))?;
    let (s, report) = ingest_trace(tasks, locs, &params).map_err(workload)?;
    emit(a.scenario.as_deref(), &write_scenario(&s))?;
    eprintln!(
        "ingested {} tasks ({} malformed task records, {} malformed location records, {} clamped, {} invalid dropped)",
        report.tasks_kept,
        report.malformed_task_records,
        report.malformed_location_records,
        report.clamped_processing,
        report.dropped_invalid
    );
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<(), CliError> {
    let policy = parse_policy(&a.policy)?;
    let mut scenario = read_scenario(&read(&a.scenario)?).map_err(input)?;
    apply_cfg(&mut scenario.cfg, &a.cfg)?;
    if let Some(seed) = a.seed {
        scenario.seed = seed;
    }
    let report = run(&scenario, policy)?;
    match &a.out_dir {
        Some(dir) => {
            write(&dir.join("report.txt"), &report.to_text())?;
            write(&dir.join("events.log"), &report.log.to_text())?;
            println!("c_total: {}", report.c_total());
        }
        None => print!("{}", report.to_text()),
    }
    Ok(())
}

fn cmd_plan(a: PlanArgs) -> Result<(), CliError> {
    let is_hyper = a.figure.as_deref() == Some("hyper");
    let mut plan = match (&a.plan_file, &a.figure) {
        (Some(path), _) => {
            let base = path.parent().unwrap_or(Path::new("."));
            ExperimentPlan::from_text(&read(path)?, base)?
        }
        (None, Some(id)) if id == "hyper" => hyper_base_plan(),
        (None, Some(id)) => figure_plan(id)?,
        (None, None) => return Err(usage("one of --plan-file or --figure is required")),
    };
    if let Some(seed) = a.seed {
        plan.seed_base = seed;
    }
    if let Some(r) = a.repetitions {
        plan.repetitions = r;
    }
    if let Some(p) = &a.policy {
        plan.policies = vec![parse_policy(p)?];
    }
    override_caps(&mut plan.cfg, a.u_hat_max, a.d_hat_max);
    plan.validate()?;
    write(&a.out_dir.join("plan.txt"), &plan.to_text())?;
    if is_hyper {
        for study in hyperparameter_study(&HYPER_DATASETS, &plan)? {
            let path = a.out_dir.join(study.file_name());
            write(&path, &study.to_csv())?;
            println!("{}", path.display());
        }
        return Ok(());
    }
    let table = run_plan(&plan)?;
    for p in table.write_to(&a.out_dir)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn cmd_plot(a: PlotArgs) -> Result<(), CliError> {
    let plan = a
        .table
        .parent()
        .and_then(|d| d.file_name())
        .map_or(String::new(), |n| n.to_string_lossy().into_owned());
    let table = ResultTable::from_detail_csv(&read(&a.table)?, &plan)?;
    for s in emit_plot_data(&table, &a.figure)? {
        let p = s.write_to(&a.out_dir)?;
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.verb {
        Verb::Gen(a) => cmd_gen(a),
        Verb::Ingest(a) => cmd_ingest(a),
        Verb::Run(a) => cmd_run(a),
        Verb::Plan(a) => cmd_plan(a),
        Verb::PlotData(a) => cmd_plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
