//! Milestone-based progress scoring.

use super::MetricsError;
use crate::driver::EnvState;
use crate::envs::sudoku::{Grid, SudokuInstance};

/// Intermediate states whose attainment measures partial completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MilestoneSet {
    /// One milestone per position of the secret code.
    MastermindDigits(String),
    /// One milestone per initially-empty cell: `(cell index, solution value)`.
    SudokuCells(Vec<(usize, u8)>),
}

impl MilestoneSet {
    pub fn mastermind(truth: &str) -> Self {
        MilestoneSet::MastermindDigits(truth.to_string())
    }

    pub fn sudoku(instance: &SudokuInstance) -> Self {
        let cells = instance
            .givens
            .cells()
            .iter()
            .zip(instance.solution.cells())
            .enumerate()
            .filter(|(_, (&g, _))| g == 0)
            .map(|(idx, (_, &s))| (idx, s))
            .collect();
        MilestoneSet::SudokuCells(cells)
    }

    /// `|M|`. Zero only for a Sudoku without empty cells.
    pub fn count(&self) -> usize {
        match self {
            MilestoneSet::MastermindDigits(code) => code.chars().count(),
            MilestoneSet::SudokuCells(cells) => cells.len(),
        }
    }

    /// Milestones reached in `state`.
    pub fn progress(&self, state: &EnvState) -> Result<usize, MetricsError> {
        match (self, state) {
            (MilestoneSet::MastermindDigits(code), EnvState::Mastermind(guess)) => get_progress_mastermind(guess, code),
            (MilestoneSet::SudokuCells(cells), EnvState::Sudoku(grid)) => {
                Ok(cells.iter().filter(|&&(idx, v)| grid.cells()[idx] == v).count())
            }
            _ => Err(MetricsError::StateMismatch),
        }
    }
}

/// Positions where the current guess matches the secret code.
/// An empty state (no valid guess yet) has reached nothing.
pub fn get_progress_mastermind(state: &str, milestones: &str) -> Result<usize, MetricsError> {
    if state.is_empty() {
        return Ok(0);
    }
    if state.chars().count() != milestones.chars().count() {
        return Err(MetricsError::LengthMismatch {
            state: state.chars().count(),
            milestones: milestones.chars().count(),
        });
    }
    Ok(state.chars().zip(milestones.chars()).filter(|(a, b)| a == b).count())
}

/// Initially-empty cells currently holding their solution value.
pub fn get_progress_sudoku(grid: &Grid, instance: &SudokuInstance) -> usize {
    grid.cells()
        .iter()
        .zip(instance.givens.cells())
        .zip(instance.solution.cells())
        .filter(|((&cur, &given), &sol)| given == 0 && cur == sol)
        .count()
}
