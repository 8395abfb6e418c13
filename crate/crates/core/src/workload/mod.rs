//! Scenario inputs: synthetic generation, trace ingestion and the scenario file format.

mod generator;
mod scenario_file;
mod trace;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{AvId, BsId, ModelError, Point, Task, Time, VecsConfig};

pub use generator::{generate_synthetic, split_hard_soft, GeneratorParams, SlackTarget};
pub use scenario_file::{read_scenario, write_scenario};
pub use trace::{ingest_trace, trace_span, IngestReport, ScalingParams, TraceMapping};

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("cannot satisfy slack band {band}: {reason}")]
    UnsatisfiableBand { band: String, reason: String },
    #[error("scenario file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("trace ingestion: {0}")]
    Ingest(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Complete simulation input.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub tasks: Vec<Task>,
    /// Indexed by `BsId`.
    pub bs_locations: Vec<Point>,
    /// Vehicle positions keyed by `(batch index, vehicle)`.
    pub av_locations: BTreeMap<(u64, AvId), Point>,
    pub cfg: VecsConfig,
    pub seed: u64,
}

impl Scenario {
    pub fn n_bs(&self) -> usize {
        self.bs_locations.len()
    }

    pub fn bs_location(&self, bs: BsId) -> Point {
        self.bs_locations[bs.0 as usize]
    }

    /// Batch index containing time `t`.
    pub fn batch_of(&self, t: Time) -> u64 {
        t / self.cfg.t_beta
    }

    /// Vehicle position at `batch`, falling back to its latest earlier entry.
    pub fn av_location(&self, av: AvId, batch: u64) -> Option<Point> {
        self.av_locations
            .range((0, av)..=(batch, av))
            .rev()
            .find(|((_, a), _)| *a == av)
            .map(|(_, p)| *p)
    }

    /// Position of the task's vehicle when it issued its request.
    pub fn request_location(&self, task: &Task) -> Point {
        let key = (self.batch_of(task.arrival), task.origin_av);
        match self.av_locations.get(&key) {
            Some(p) => *p,
            None => self
                .av_location(task.origin_av, key.0)
                .expect("validated scenario has a location for every request"),
        }
    }

    /// Latest deadline rounded up to a batch boundary, or the configured horizon if later.
    pub fn horizon(&self) -> Time {
        let last = self.tasks.iter().map(|t| t.deadline).max().unwrap_or(0);
        self.cfg.next_boundary(last.max(self.cfg.horizon))
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        self.cfg.validate()?;
        let m = self.cfg.grid_size;
        if let Some((i, p)) = self
            .bs_locations
            .iter()
            .enumerate()
            .find(|(_, p)| !p.within_grid(m))
        {
            return Err(WorkloadError::InvalidScenario(format!(
                "base station {i} at ({}, {}) outside grid [0, {m}]",
                p.x, p.y
            )));
        }
        if let Some(((b, av), p)) = self.av_locations.iter().find(|(_, p)| !p.within_grid(m)) {
            return Err(WorkloadError::InvalidScenario(format!(
                "vehicle {av} at batch {b} outside grid: ({}, {})",
                p.x, p.y
            )));
        }
        let mut seen = BTreeSet::new();
        for t in &self.tasks {
            t.validate()?;
            if !seen.insert(t.id) {
                return Err(WorkloadError::InvalidScenario(format!(
                    "duplicate task id {}",
                    t.id
                )));
            }
            let batch = self.batch_of(t.arrival);
            if !self.av_locations.contains_key(&(batch, t.origin_av)) {
                return Err(WorkloadError::InvalidScenario(format!(
                    "task {}: vehicle {} has no location for batch {batch}",
                    t.id, t.origin_av
                )));
            }
        }
        if self.bs_locations.is_empty() && !self.tasks.is_empty() {
            return Err(WorkloadError::InvalidScenario("no base stations".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Criticality;

    fn scenario() -> Scenario {
        let mut av = BTreeMap::new();
        av.insert((0, AvId(1)), Point::new(1, 1));
        av.insert((2, AvId(1)), Point::new(5, 5));
        av.insert((1, AvId(2)), Point::new(9, 9));
        Scenario {
            tasks: vec![Task::new(0, 1, 10, 3, Criticality::Hard, 1).unwrap()],
            bs_locations: vec![Point::new(0, 0)],
            av_locations: av,
            cfg: VecsConfig::default(),
            seed: 7,
        }
    }

    #[test]
    fn av_location_falls_back_to_latest_earlier_batch() {
        let s = scenario();
        assert_eq!(s.av_location(AvId(1), 0), Some(Point::new(1, 1)));
        assert_eq!(s.av_location(AvId(1), 1), Some(Point::new(1, 1)));
        assert_eq!(s.av_location(AvId(1), 7), Some(Point::new(5, 5)));
        assert_eq!(s.av_location(AvId(2), 0), None);
        assert_eq!(s.av_location(AvId(3), 9), None);
    }

    #[test]
    fn validation_catches_missing_vehicle_entry() {
        let mut s = scenario();
        s.validate().unwrap();
        s.tasks
            .push(Task::new(1, 4, 20, 2, Criticality::Soft, 2).unwrap());
        assert!(s.validate().is_ok());
        s.tasks
            .push(Task::new(2, 10, 20, 2, Criticality::Soft, 2).unwrap());
        assert!(s.validate().is_err());
    }

    #[test]
    fn validation_catches_off_grid_points() {
        let mut s = scenario();
        s.bs_locations.push(Point::new(101, 0));
        assert!(s.validate().is_err());
    }

    #[test]
    fn horizon_rounds_to_batch() {
        let s = scenario();
        assert_eq!(s.horizon(), 12);
    }
}
