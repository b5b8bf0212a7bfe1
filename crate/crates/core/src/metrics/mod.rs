//! Progress rate and repetition rate.
//!
//! Progress counts reached milestones in the environment's hidden state.
//! Repetition counts actions whose Levenshtein ratio to some earlier action
//! reaches the resolution `theta`. Both are turned into per-step curves in
//! `[0, 1]` and averaged across runs by [`aggregate`].

mod aggregate;
mod curves;
mod progress;
mod repetition;
mod similarity;

pub use aggregate::{aggregate, AggregateOptions, InstanceRow, RunReport};
pub use curves::{
    progress_rate_curve, progress_rates, repetition_rate_curve, repetition_rates, MetricCurve, Normalization,
};
pub use progress::{get_progress_mastermind, get_progress_sudoku, MilestoneSet};
pub use repetition::{cumulative_repetitions, get_repetitions, repeated_flags, RepetitionTracker, SimilarityParams};
pub use similarity::{indel_distance, levenshtein_ratio};

use thiserror::Error;

use crate::driver::Benchmark;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("state has {state} characters but there are {milestones} milestones")]
    LengthMismatch { state: usize, milestones: usize },
    #[error("environment state does not match the milestone kind")]
    StateMismatch,
    #[error("theta {0} outside [0, 1]")]
    InvalidTheta(f64),
    #[error("no trajectories to aggregate")]
    NoTrajectories,
    #[error("cannot aggregate {0} and {1} trajectories together")]
    MixedBenchmarks(Benchmark, Benchmark),
}
