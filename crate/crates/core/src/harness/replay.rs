use std::path::Path;

use super::persist::read_trajectory;
use super::HarnessError;
use crate::driver::Action;

/// Outcome of re-executing a stored trajectory against a fresh driver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplayVerdict {
    Match {
        steps: usize,
    },
    Diverged {
        step: usize,
        field: &'static str,
        recorded: String,
        replayed: String,
    },
}

impl ReplayVerdict {
    pub fn is_match(&self) -> bool {
        matches!(self, ReplayVerdict::Match { .. })
    }
}

/// Feeds the recorded actions back into a new driver and compares every
/// observation byte for byte, plus the `done` flag and raw progress.
pub fn replay(path: &Path) -> Result<ReplayVerdict, HarnessError> {
    let t = read_trajectory(path)?;
    let mut driver = t.env.driver(&t.truth_descriptor)?;
    let milestones = t.env.milestones(&t.truth_descriptor)?;
    driver.reset()?;
    for record in &t.records {
        let obs = driver.step(&Action::new(record.action_value.clone()))?;
        let progress = milestones.progress(&driver.state())?;
        let diverged = |field, recorded: String, replayed: String| ReplayVerdict::Diverged {
            step: record.step_index,
            field,
            recorded,
            replayed,
        };
        if obs.output != record.observation_output {
            return Ok(diverged(
                "observation_output",
                record.observation_output.clone(),
                obs.output,
            ));
        }
        if obs.done != record.done {
            return Ok(diverged("done", record.done.to_string(), obs.done.to_string()));
        }
        if progress != record.progress_raw {
            return Ok(diverged(
                "progress_raw",
                record.progress_raw.to_string(),
                progress.to_string(),
            ));
        }
    }
    Ok(ReplayVerdict::Match { steps: t.len() })
}
