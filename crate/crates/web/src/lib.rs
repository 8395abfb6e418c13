//! wasm-bindgen bindings for an in-browser demo: generate a synthetic
//! scenario, run one or all policies on it, and read back reports and event
//! logs. Everything runs on the calling thread; no harness timing or file
//! I/O is involved, so the core crate is built without its `cli` and
//! `parallel` features.
//!
//! Each export is a thin wrapper over a plain Rust function (the `*_text`
//! and `compare_json` helpers) so the logic is testable natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use vecsched::engine::run;
use vecsched::harness::{DEFAULT_BATCHES, DEFAULT_PROCESSING};
use vecsched::model::VecsConfig;
use vecsched::policies::PolicyId;
use vecsched::workload::{
    generate_synthetic, read_scenario, write_scenario, GeneratorParams, SlackTarget,
};

/// Per-policy summary row returned by [`compare_json`].
#[derive(Debug, Serialize)]
pub struct PolicySummary {
    pub policy: &'static str,
    pub c_total: f64,
    pub c_drop: f64,
    pub c_dis: f64,
    pub c_e: f64,
    pub completed_hard: usize,
    pub completed_soft: usize,
    pub dropped_hard: usize,
    pub dropped_soft: usize,
    pub cloud: usize,
    pub local: usize,
    pub global: usize,
}

fn parse_ratio(s: &str) -> Result<(u32, u32), String> {
    let bad = || format!("bad hard ratio `{s}` (expected e.g. 2:1)");
    let (h, so) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        h.trim().parse().map_err(|_| bad())?,
        so.trim().parse().map_err(|_| bad())?,
    ))
}

/// Scenario file text for a synthetic workload of `n_tasks` per batch over
/// `batches` batches (0 selects the default).
pub fn generate_text(
    seed: u64,
    n_tasks: usize,
    n_bs: usize,
    batches: u64,
    slack: &str,
    hard_ratio: &str,
) -> Result<String, String> {
    let cfg = VecsConfig::default();
    let batches = if batches == 0 {
        DEFAULT_BATCHES
    } else {
        batches
    };
    let params = GeneratorParams {
        n_tasks: n_tasks * batches as usize,
        n_bs,
        n_avs: None,
        arrival_max: batches * cfg.t_beta - 1,
        slack: slack.parse::<SlackTarget>().map_err(|e| e.to_string())?,
        hard_ratio: parse_ratio(hard_ratio)?,
        grid_size: cfg.grid_size,
        processing: DEFAULT_PROCESSING,
        seed,
        cfg,
    };
    generate_synthetic(&params)
        .map(|s| write_scenario(&s))
        .map_err(|e| e.to_string())
}

fn run_text(scenario: &str, policy: &str) -> Result<vecsched::engine::RunReport, String> {
    let s = read_scenario(scenario).map_err(|e| e.to_string())?;
    let p: PolicyId = policy
        .parse()
        .map_err(|e: vecsched::policies::PolicyError| e.to_string())?;
    run(&s, p).map_err(|e| e.to_string())
}

/// The run report (`key: value` text) of `policy` on a scenario file.
pub fn report_text(scenario: &str, policy: &str) -> Result<String, String> {
    run_text(scenario, policy).map(|r| r.to_text())
}

/// The event log of `policy` on a scenario file.
pub fn log_text(scenario: &str, policy: &str) -> Result<String, String> {
    run_text(scenario, policy).map(|r| r.log.to_text())
}

/// Every policy on one scenario, as a JSON array of [`PolicySummary`].
pub fn compare_json(scenario: &str) -> Result<String, String> {
    let s = read_scenario(scenario).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for p in PolicyId::ALL {
        let r = run(&s, p).map_err(|e| e.to_string())?;
        let (l, c) = (&r.ledger, &r.counts);
        rows.push(PolicySummary {
            policy: p.name(),
            c_total: r.c_total(),
            c_drop: l.c_drop,
            c_dis: l.c_dis,
            c_e: l.c_e,
            completed_hard: c.completed_hard,
            completed_soft: c.completed_soft,
            dropped_hard: c.dropped_hard(),
            dropped_soft: c.dropped_soft(),
            cloud: c.cloud,
            local: c.local,
            global: c.global,
        });
    }
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

fn js(e: String) -> JsValue {
    JsValue::from_str(&e)
}

#[wasm_bindgen]
pub fn generate(
    seed: u64,
    n_tasks: usize,
    n_bs: usize,
    batches: u64,
    slack: &str,
    hard_ratio: &str,
) -> Result<String, JsValue> {
    generate_text(seed, n_tasks, n_bs, batches, slack, hard_ratio).map_err(js)
}

#[wasm_bindgen]
pub fn simulate(scenario: &str, policy: &str) -> Result<String, JsValue> {
    report_text(scenario, policy).map_err(js)
}

#[wasm_bindgen]
pub fn event_log(scenario: &str, policy: &str) -> Result<String, JsValue> {
    log_text(scenario, policy).map_err(js)
}

#[wasm_bindgen]
pub fn compare(scenario: &str) -> Result<String, JsValue> {
    compare_json(scenario).map_err(js)
}

/// Policy names accepted by [`simulate`] and [`event_log`].
#[wasm_bindgen]
pub fn policies() -> Vec<String> {
    PolicyId::ALL.iter().map(|p| p.name().to_string()).collect()
}
