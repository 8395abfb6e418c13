use std::fmt::Write as _;

use super::EventLog;
use crate::model::{CostLedger, OutcomeKind, Site, Time};
use crate::policies::PolicyId;

/// Task outcomes by class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutcomeCounts {
    pub completed_hard: usize,
    pub completed_soft: usize,
    pub evicted_hard: usize,
    pub evicted_soft: usize,
    pub unscheduled_hard: usize,
    pub unscheduled_soft: usize,
    /// Completed tasks that ran on the cloud (included in `completed_*`).
    pub cloud: usize,
    /// Allocations admitted in local mode.
    pub local: usize,
    /// Allocations placed by the central scheduler (including Alg. 5 placements).
    pub global: usize,
    /// Alg. 5 placements that used the greedy fallback.
    pub greedy_evictions: usize,
}

impl OutcomeCounts {
    pub fn dropped_hard(&self) -> usize {
        self.evicted_hard + self.unscheduled_hard
    }

    pub fn dropped_soft(&self) -> usize {
        self.evicted_soft + self.unscheduled_soft
    }

    pub(crate) fn tally(ledger: &CostLedger) -> Self {
        let mut c = OutcomeCounts::default();
        for o in ledger.outcomes.values() {
            let hard = o.flag.is_hard();
            match o.kind() {
                Ok(OutcomeKind::Completed) => {
                    if hard {
                        c.completed_hard += 1
                    } else {
                        c.completed_soft += 1
                    }
                    if o.scheduled_at == Some(Site::Cloud) {
                        c.cloud += 1;
                    }
                }
                Ok(OutcomeKind::Evicted) => {
                    if hard {
                        c.evicted_hard += 1
                    } else {
                        c.evicted_soft += 1
                    }
                }
                Ok(OutcomeKind::NeverScheduled) | Err(_) => {
                    if hard {
                        c.unscheduled_hard += 1
                    } else {
                        c.unscheduled_soft += 1
                    }
                }
            }
        }
        c
    }
}

/// Result of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub policy: PolicyId,
    pub seed: u64,
    pub horizon: Time,
    pub n_tasks: usize,
    pub n_bs: usize,
    pub ledger: CostLedger,
    pub counts: OutcomeCounts,
    /// `(boundary, max_j U_j(boundary))` after each batch was scheduled.
    pub batch_peak: Vec<(Time, f64)>,
    pub log: EventLog,
    /// Modelling assumptions that affect how the numbers should be read.
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn c_total(&self) -> f64 {
        self.ledger.total()
    }

    /// Structured `key: value` text.
    pub fn to_text(&self) -> String {
        let l = &self.ledger;
        let c = &self.counts;
        let mut s = String::new();
        let _ = writeln!(s, "policy: {}", self.policy);
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(s, "tasks: {}", self.n_tasks);
        let _ = writeln!(s, "base_stations: {}", self.n_bs);
        let _ = writeln!(s, "horizon: {}", self.horizon);
        let _ = writeln!(s, "c_drop: {}", l.c_drop);
        let _ = writeln!(s, "c_dis: {}", l.c_dis);
        let _ = writeln!(s, "c_e: {}", l.c_e);
        let _ = writeln!(s, "lambda_dis: {}", l.lambda_dis);
        let _ = writeln!(s, "lambda_e: {}", l.lambda_e);
        let _ = writeln!(s, "c_total: {}", l.total());
        let _ = writeln!(s, "completed_hard: {}", c.completed_hard);
        let _ = writeln!(s, "completed_soft: {}", c.completed_soft);
        let _ = writeln!(s, "dropped_hard: {}", c.dropped_hard());
        let _ = writeln!(s, "dropped_soft: {}", c.dropped_soft());
        let _ = writeln!(s, "evicted_soft: {}", c.evicted_soft);
        let _ = writeln!(s, "cloud: {}", c.cloud);
        let _ = writeln!(s, "local_admissions: {}", c.local);
        let _ = writeln!(s, "global_placements: {}", c.global);
        let _ = writeln!(s, "greedy_evictions: {}", c.greedy_evictions);
        s.push_str("batch_peak_utilisation:");
        for (t, u) in &self.batch_peak {
            let _ = write!(s, " {t}:{u}");
        }
        s.push('\n');
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}
