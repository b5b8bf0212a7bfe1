//! Closed-box environments.

pub mod mastermind;
pub mod sudoku;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::driver::{Benchmark, Driver};
use crate::metrics::MilestoneSet;
use mastermind::{MastermindConfig, MastermindDriver};
use sudoku::{SudokuConfig, SudokuDriver, SudokuInstance};

/// Bumped whenever observation wording or environment rules change, so old
/// trajectories are not replayed against different behavior.
pub const ENV_VERSION: &str = "envs-1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("guess has {guess} digits but the code has {truth}")]
    LengthMismatch { guess: usize, truth: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid truth: {0}")]
    InvalidTruth(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

/// Which environment to build, with its parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "benchmark", rename_all = "snake_case")]
pub enum EnvSpec {
    Mastermind(MastermindConfig),
    Sudoku(SudokuConfig),
}

impl EnvSpec {
    pub fn benchmark(&self) -> Benchmark {
        match self {
            EnvSpec::Mastermind(_) => Benchmark::Mastermind,
            EnvSpec::Sudoku(_) => Benchmark::Sudoku,
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        match self {
            EnvSpec::Mastermind(cfg) => cfg.validate(),
            EnvSpec::Sudoku(cfg) if cfg.target_empty > sudoku::MAX_TARGET_EMPTY => Err(EnvError::InvalidConfig(
                format!("target_empty {} exceeds 64", cfg.target_empty),
            )),
            EnvSpec::Sudoku(_) => Ok(()),
        }
    }

    /// Deterministic truth descriptor for an instance seed.
    pub fn truth_for_seed(&self, seed: u64) -> Result<String, EnvError> {
        match self {
            EnvSpec::Mastermind(cfg) => {
                cfg.validate()?;
                Ok(cfg.truth_from_seed(seed))
            }
            EnvSpec::Sudoku(cfg) => Ok(sudoku::generate(seed, cfg.target_empty)?.to_line()),
        }
    }

    /// Fresh driver for the instance named by `truth`.
    pub fn driver(&self, truth: &str) -> Result<Box<dyn Driver>, EnvError> {
        Ok(match self {
            EnvSpec::Mastermind(cfg) => Box::new(MastermindDriver::new(cfg.clone(), truth)?),
            EnvSpec::Sudoku(_) => Box::new(SudokuDriver::new(self.sudoku_instance(truth)?)),
        })
    }

    pub fn sudoku_instance(&self, truth: &str) -> Result<SudokuInstance, EnvError> {
        let inst = SudokuInstance::from_line(truth)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn milestones(&self, truth: &str) -> Result<MilestoneSet, EnvError> {
        match self {
            EnvSpec::Mastermind(cfg) => {
                cfg.validate_code(truth)?;
                Ok(MilestoneSet::mastermind(truth))
            }
            EnvSpec::Sudoku(_) => Ok(MilestoneSet::sudoku(&self.sudoku_instance(truth)?)),
        }
    }
}
