use super::task::{BsId, TaskId, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AllocState {
    Reserved,
    Executing,
    Completed,
    Dropped,
}

/// A task's reservation on one base station over `[start, finish)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub task: TaskId,
    pub bs: BsId,
    pub u: f64,
    pub start: Time,
    pub stretched: Time,
    pub finish: Time,
    /// When the reservation stops holding capacity: `finish`, or the
    /// eviction time for a dropped allocation.
    pub end: Time,
    pub state: AllocState,
}

impl Allocation {
    pub fn new(task: TaskId, bs: BsId, u: f64, start: Time, stretched: Time) -> Self {
        Allocation {
            task,
            bs,
            u,
            start,
            stretched,
            finish: start + stretched,
            end: start + stretched,
            state: AllocState::Reserved,
        }
    }

    /// Whether the reservation still holds capacity at slot `t`.
    pub fn active_at(&self, t: Time) -> bool {
        self.start <= t && t < self.end
    }

    pub fn is_live(&self) -> bool {
        matches!(self.state, AllocState::Reserved | AllocState::Executing)
    }
}
