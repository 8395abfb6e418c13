use std::fmt;

use super::ModelError;

/// Discrete simulation time, in whole time units.
pub type Time = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BsId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AvId(pub u64);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for BsId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for AvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Integer coordinate on the `m x m` city grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn within_grid(&self, m: i64) -> bool {
        (0..=m).contains(&self.x) && (0..=m).contains(&self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Criticality {
    Hard,
    Soft,
}

impl Criticality {
    pub fn is_hard(self) -> bool {
        matches!(self, Criticality::Hard)
    }

    /// Single-letter code used in scenario files.
    pub fn code(self) -> char {
        match self {
            Criticality::Hard => 'H',
            Criticality::Soft => 'S',
        }
    }

    pub fn from_code(c: &str) -> Option<Self> {
        match c {
            "H" | "h" => Some(Criticality::Hard),
            "S" | "s" => Some(Criticality::Soft),
            _ => None,
        }
    }
}

/// One offloaded computation request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub id: TaskId,
    pub arrival: Time,
    pub deadline: Time,
    /// Processing time when running on a full core.
    pub min_processing: Time,
    pub flag: Criticality,
    pub origin_av: AvId,
}

impl Task {
    pub fn new(
        id: u64,
        arrival: Time,
        deadline: Time,
        min_processing: Time,
        flag: Criticality,
        origin_av: u64,
    ) -> Result<Self, ModelError> {
        let task = Task {
            id: TaskId(id),
            arrival,
            deadline,
            min_processing,
            flag,
            origin_av: AvId(origin_av),
        };
        task.validate()?;
        Ok(task)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.arrival >= self.deadline {
            return Err(ModelError::InvalidTask {
                task: self.id,
                reason: format!(
                    "arrival {} not before deadline {}",
                    self.arrival, self.deadline
                ),
            });
        }
        if self.min_processing == 0 {
            return Err(ModelError::InvalidTask {
                task: self.id,
                reason: "processing time must be at least 1".into(),
            });
        }
        if self.min_processing > self.deadline - self.arrival {
            return Err(ModelError::InvalidTask {
                task: self.id,
                reason: format!(
                    "processing {} exceeds window {}",
                    self.min_processing,
                    self.deadline - self.arrival
                ),
            });
        }
        Ok(())
    }

    pub fn is_hard(&self) -> bool {
        self.flag.is_hard()
    }

    /// Slack ratio `(d - a) / p`.
    pub fn slack(&self) -> f64 {
        (self.deadline - self.arrival) as f64 / self.min_processing as f64
    }
}

/// Deadline slack bands used to classify workloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlackClass {
    Tight,
    Normal,
    Loose,
}

impl SlackClass {
    pub const TIGHT_BELOW: f64 = 1.5;
    pub const LOOSE_ABOVE: f64 = 3.0;

    pub fn of_ratio(mu: f64) -> Self {
        if mu < Self::TIGHT_BELOW {
            SlackClass::Tight
        } else if mu <= Self::LOOSE_ABOVE {
            SlackClass::Normal
        } else {
            SlackClass::Loose
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SlackClass::Tight => "tight",
            SlackClass::Normal => "normal",
            SlackClass::Loose => "loose",
        }
    }
}

impl fmt::Display for SlackClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SlackClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tight" => Ok(SlackClass::Tight),
            "normal" => Ok(SlackClass::Normal),
            "loose" => Ok(SlackClass::Loose),
            other => Err(format!("unknown slack class `{other}`")),
        }
    }
}

/// Classifies a task by its slack ratio.
pub fn slack_class(task: &Task) -> SlackClass {
    SlackClass::of_ratio(task.slack())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(a: Time, d: Time, p: Time) -> Task {
        Task::new(1, a, d, p, Criticality::Soft, 1).unwrap()
    }

    #[test]
    fn slack_bands() {
        assert_eq!(slack_class(&t(0, 10, 8)), SlackClass::Tight);
        assert_eq!(slack_class(&t(0, 10, 5)), SlackClass::Normal);
        assert_eq!(slack_class(&t(0, 40, 10)), SlackClass::Loose);
    }

    #[test]
    fn band_edges_are_normal() {
        assert_eq!(SlackClass::of_ratio(1.5), SlackClass::Normal);
        assert_eq!(SlackClass::of_ratio(3.0), SlackClass::Normal);
        assert_eq!(SlackClass::of_ratio(3.0001), SlackClass::Loose);
    }

    #[test]
    fn rejects_invalid_tasks() {
        assert!(Task::new(1, 5, 5, 1, Criticality::Hard, 0).is_err());
        assert!(Task::new(1, 0, 5, 6, Criticality::Hard, 0).is_err());
        assert!(Task::new(1, 0, 5, 0, Criticality::Hard, 0).is_err());
        assert!(Task::new(1, 0, 5, 5, Criticality::Hard, 0).is_ok());
    }
}
