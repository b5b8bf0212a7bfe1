//! The agent/environment interaction contract.
//!
//! An environment is wrapped by a [`Driver`]: `reset` starts an instance and
//! returns the first [`Observation`], `step` consumes one free-text
//! [`Action`] and always answers with another observation, and `state`
//! exposes the hidden configuration the metrics are computed from.
//!
//! Observations and actions carry no optional attributes. Extra per-step
//! information the harness needs (progress, repetition counts, flags) lives
//! on [`StepRecord`] instead.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envs::sudoku::Grid;
use crate::envs::EnvSpec;

/// Environment feedback for one step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub output: String,
    pub done: bool,
}

impl Observation {
    pub fn new(output: impl Into<String>, done: bool) -> Self {
        Self {
            output: output.into(),
            done,
        }
    }

    pub fn pending(output: impl Into<String>) -> Self {
        Self::new(output, false)
    }
}

/// Raw agent output. Any text is a valid action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub action_value: String,
}

impl Action {
    pub fn new(action_value: impl Into<String>) -> Self {
        Self {
            action_value: action_value.into(),
        }
    }
}

impl From<&str> for Action {
    fn from(value: &str) -> Self {
        Self::new(value)
    }
}

impl From<String> for Action {
    fn from(value: String) -> Self {
        Self::new(value)
    }
}

/// Benchmark-specific hidden state snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnvState {
    /// Last accepted guess, empty before the first valid one.
    Mastermind(String),
    /// Current board.
    Sudoku(Grid),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DriverError {
    #[error("reset() called twice on the same driver")]
    AlreadyReset,
    #[error("step() called before reset()")]
    NotReset,
    #[error("step() called after the task was completed")]
    AlreadyDone,
}

/// Unified interface around one environment instance.
///
/// Malformed actions are never errors: they produce a corrective observation
/// and still consume a step. Errors are reserved for lifecycle misuse.
pub trait Driver: Send {
    fn reset(&mut self) -> Result<Observation, DriverError>;

    fn step(&mut self, action: &Action) -> Result<Observation, DriverError>;

    /// Snapshot of the hidden state. Never mutates the environment.
    fn state(&self) -> EnvState;
}

/// Lifecycle bookkeeping shared by the concrete drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub(crate) enum Lifecycle {
    #[default]
    Fresh,
    Running,
    Finished,
}

impl Lifecycle {
    pub(crate) fn begin(&mut self) -> Result<(), DriverError> {
        match self {
            Lifecycle::Fresh => {
                *self = Lifecycle::Running;
                Ok(())
            }
            _ => Err(DriverError::AlreadyReset),
        }
    }

    pub(crate) fn check_step(&self) -> Result<(), DriverError> {
        match self {
            Lifecycle::Fresh => Err(DriverError::NotReset),
            Lifecycle::Running => Ok(()),
            Lifecycle::Finished => Err(DriverError::AlreadyDone),
        }
    }

    pub(crate) fn observe(&mut self, obs: Observation) -> Observation {
        if obs.done {
            *self = Lifecycle::Finished;
        }
        obs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    Mastermind,
    Sudoku,
}

impl Benchmark {
    pub fn as_str(self) -> &'static str {
        match self {
            Benchmark::Mastermind => "mastermind",
            Benchmark::Sudoku => "sudoku",
        }
    }
}

impl std::fmt::Display for Benchmark {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Out-of-band markers attached to a step by the agent layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepFlag {
    /// The memory wrapper ran out of retries and let a duplicate through.
    RepeatedForced,
    /// The agent could not produce an action (transport failure); the run stops here.
    Aborted,
    /// A solver agent lost track of the game (no consistent candidate left).
    AgentFailure,
}

/// One executed step of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step_index: usize,
    pub action_value: String,
    pub observation_output: String,
    pub done: bool,
    /// Milestones reached after this step.
    pub progress_raw: usize,
    /// Repeated actions among steps `1..=step_index`.
    pub repetitions_raw: usize,
    pub wall_time_ms: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<StepFlag>,
}

impl StepRecord {
    pub fn has_flag(&self, flag: StepFlag) -> bool {
        self.flags.contains(&flag)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrajectoryError {
    #[error("step {found} found where step {expected} was expected")]
    NonConsecutive { expected: usize, found: usize },
    #[error("repetition count decreases at step {0}")]
    RepetitionsDecrease(usize),
    #[error("step {0} claims more repetitions than previous steps")]
    TooManyRepetitions(usize),
    #[error("{len} records exceed the step cap {max_steps}")]
    TooLong { len: usize, max_steps: usize },
    #[error("success flag disagrees with the final record")]
    SuccessMismatch,
    #[error("benchmark field disagrees with the environment spec")]
    BenchmarkMismatch,
}

/// Full record of one benchmark instance, sufficient for replay.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub run_id: String,
    pub benchmark: Benchmark,
    pub instance_id: u64,
    pub seed: u64,
    pub max_steps: usize,
    /// Secret code, or `givens solution` for Sudoku.
    pub truth_descriptor: String,
    pub env: EnvSpec,
    pub milestone_count: usize,
    pub agent: String,
    /// Similarity resolution used for `repetitions_raw`.
    pub theta: f64,
    pub records: Vec<StepRecord>,
    pub success: bool,
}

impl Trajectory {
    pub fn actions(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.action_value.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_aborted(&self) -> bool {
        self.records.iter().any(|r| r.has_flag(StepFlag::Aborted))
    }

    /// Recomputes `success` from the final record.
    pub fn refresh_success(&mut self) {
        self.success = self.records.last().is_some_and(|r| r.done);
    }

    pub fn validate(&self) -> Result<(), TrajectoryError> {
        if self.env.benchmark() != self.benchmark {
            return Err(TrajectoryError::BenchmarkMismatch);
        }
        if self.records.len() > self.max_steps {
            return Err(TrajectoryError::TooLong {
                len: self.records.len(),
                max_steps: self.max_steps,
            });
        }
        let mut prev_reps = 0;
        for (i, r) in self.records.iter().enumerate() {
            if r.step_index != i + 1 {
                return Err(TrajectoryError::NonConsecutive {
                    expected: i + 1,
                    found: r.step_index,
                });
            }
            if r.repetitions_raw < prev_reps {
                return Err(TrajectoryError::RepetitionsDecrease(r.step_index));
            }
            if r.repetitions_raw > r.step_index - 1 {
                return Err(TrajectoryError::TooManyRepetitions(r.step_index));
            }
            prev_reps = r.repetitions_raw;
        }
        if self.success != self.records.last().is_some_and(|r| r.done) {
            return Err(TrajectoryError::SuccessMismatch);
        }
        Ok(())
    }

    /// Equality ignoring wall-clock timings.
    pub fn same_interaction(&self, other: &Trajectory) -> bool {
        let strip = |t: &Trajectory| {
            let mut t = t.clone();
            t.records.iter_mut().for_each(|r| r.wall_time_ms = 0);
            t
        };
        strip(self) == strip(other)
    }
}
