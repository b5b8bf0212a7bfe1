//! Benchmarking LLM agents on multi-step puzzles.
//!
//! Environments ([`envs`]) expose a text-only [`Driver`]. Agents ([`agents`])
//! answer with free text. The [`harness`] plays instances, stores every step as
//! JSONL and recomputes success rate, progress rate and repetition rate
//! ([`metrics`]) from those files.
//!
//! The metric layer is generic over the float type; [`Report`] and
//! [`Curve`] are the `f64` instantiations the harness uses.

pub mod agents;
pub mod driver;
pub mod envs;
pub mod harness;
pub mod metrics;
pub mod scalar;

pub use driver::{Action, Benchmark, Driver, EnvState, Observation, StepFlag, StepRecord, Trajectory};
pub use envs::{EnvSpec, ENV_VERSION};
pub use harness::{HarnessError, RunConfig};
pub use scalar::Scalar;

pub type Report = metrics::RunReport<f64>;
pub type Curve = metrics::MetricCurve<f64>;
pub type Similarity = metrics::SimilarityParams<f64>;
