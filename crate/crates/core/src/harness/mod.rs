//! Running benchmarks, persisting trajectories and recomputing reports.
//!
//! A run directory looks like
//!
//! ```text
//! out/
//!   config.json
//!   trajectories/instance_00000.jsonl
//!   summary.csv  instances.csv  curves.csv  repetition_map.csv
//! ```
//!
//! Reports are always recomputed from the JSONL files, never from state
//! kept in memory during the run.

mod config;
mod persist;
mod replay;
mod report;
mod runner;

pub use config::{build_agent, default_system_prompt, AgentKind, AgentSpec, RunConfig};
pub use persist::{
    load_config, load_run, read_trajectory, trajectory_path, write_config, write_trajectory, TrajectoryWriter,
    CONFIG_FILE, FORMAT_VERSION, TRAJECTORY_DIR,
};
pub use replay::{replay, ReplayVerdict};
pub use report::{report, write_report, ReportOptions, CURVES_CSV, INSTANCES_CSV, REPETITION_MAP_CSV, SUMMARY_CSV};
pub use runner::{
    extend_runtime, plan_instances, run, run_instance, run_plan, ExtendOutcome, InstancePlan, RunOutcome,
    EXTEND_SUMMARY_CSV,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::agents::AgentError;
use crate::driver::{Benchmark, DriverError, TrajectoryError};
use crate::envs::EnvError;
use crate::metrics::MetricsError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("the {agent} agent cannot play {benchmark}")]
    IncompatibleAgent { agent: &'static str, benchmark: Benchmark },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: missing trajectory file", path.display())]
    MissingTrajectory { path: PathBuf },
    #[error("{}:{line}: {reason}", path.display())]
    Corrupt { path: PathBuf, line: usize, reason: String },
    #[error("{}: invalid trajectory: {source}", path.display())]
    InvalidTrajectory { path: PathBuf, source: TrajectoryError },
    #[error("{}: {what} is {found}, this build uses {expected}", path.display())]
    VersionMismatch {
        path: PathBuf,
        what: &'static str,
        expected: String,
        found: String,
    },
    #[error("{}: stored repetitions disagree with the recomputed value at step {step} ({stored} vs {recomputed})", path.display())]
    RepetitionMismatch {
        path: PathBuf,
        step: usize,
        stored: usize,
        recomputed: usize,
    },
    #[error("instance {instance} panicked: {message}")]
    WorkerPanic { instance: u64, message: String },
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }
}
