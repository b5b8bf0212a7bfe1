//! Per-step progress-rate and repetition-rate curves.

use serde::{Deserialize, Serialize};

use super::repetition::{cumulative_repetitions, SimilarityParams};
use crate::driver::Trajectory;
use crate::scalar::Scalar;

/// Denominator used for the repetition rate at step `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `repeats_t / (T - 1)` with `T` the final trajectory length.
    #[default]
    #[serde(rename = "final")]
    FinalT,
    /// `repeats_t / (t - 1)`, with `RR_1 = 0`.
    #[serde(rename = "current")]
    CurrentT,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricCurve<F> {
    pub values: Vec<F>,
    /// Set for repetition-rate curves.
    pub normalization: Option<Normalization>,
}

impl<F: Scalar> MetricCurve<F> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> Option<F> {
        self.values.last().copied()
    }

    /// Value at 1-indexed `step`, holding the final value past the end.
    /// An empty curve reads as zero everywhere.
    pub fn value_at(&self, step: usize) -> F {
        match self.values.len() {
            0 => F::zero(),
            n => self.values[step.clamp(1, n) - 1],
        }
    }

    /// Curve padded to `len` steps by carrying the final value forward.
    pub fn carried_forward(&self, len: usize) -> Vec<F> {
        (1..=len).map(|t| self.value_at(t)).collect()
    }

    /// Running maximum. Not one of the standard metrics: it reads a
    /// Mastermind progress curve as "best guess so far".
    pub fn best_so_far(&self) -> MetricCurve<F> {
        let mut best = F::neg_infinity();
        MetricCurve {
            values: self
                .values
                .iter()
                .map(|&v| {
                    best = best.max(v);
                    best
                })
                .collect(),
            normalization: self.normalization,
        }
    }
}

/// `PR_t = progress_t / |M|`, clamped into `[0, 1]`.
/// With no milestones every step reads as complete.
pub fn progress_rates<F: Scalar>(progress_raw: &[usize], milestone_count: usize) -> MetricCurve<F> {
    let values = progress_raw
        .iter()
        .map(|&p| {
            if milestone_count == 0 {
                F::one()
            } else {
                F::ratio(p, milestone_count).clamp_unit()
            }
        })
        .collect();
    MetricCurve {
        values,
        normalization: None,
    }
}

pub fn progress_rate_curve<F: Scalar>(trajectory: &Trajectory, milestone_count: usize) -> MetricCurve<F> {
    let raw: Vec<usize> = trajectory.records.iter().map(|r| r.progress_raw).collect();
    progress_rates(&raw, milestone_count)
}

/// Repetition rates from cumulative repeat counts.
pub fn repetition_rates<F: Scalar>(repeats: &[usize], normalization: Normalization) -> MetricCurve<F> {
    let total = repeats.len();
    let values = repeats
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let den = match normalization {
                Normalization::FinalT => total.saturating_sub(1),
                Normalization::CurrentT => i,
            };
            F::ratio(r, den).clamp_unit()
        })
        .collect();
    MetricCurve {
        values,
        normalization: Some(normalization),
    }
}

pub fn repetition_rate_curve<F: Scalar>(
    trajectory: &Trajectory,
    params: SimilarityParams<F>,
    normalization: Normalization,
) -> MetricCurve<F> {
    let repeats = cumulative_repetitions(&trajectory.actions(), params);
    repetition_rates(&repeats, normalization)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn progress_examples() {
        let c = progress_rates::<f64>(&[0, 1, 2, 4], 4);
        assert_eq!(c.values, [0.0, 0.25, 0.5, 1.0]);
        assert_eq!(progress_rates::<f64>(&[2], 4).values, [0.5]);
        assert_eq!(progress_rates::<f64>(&[8], 40).values, [0.2]);
        assert_eq!(progress_rates::<f64>(&[0, 0], 0).values, [1.0, 1.0]);
    }

    #[test]
    fn repetition_examples() {
        let repeats = [0, 0, 1, 1];
        let fin = repetition_rates::<f64>(&repeats, Normalization::FinalT);
        assert_eq!(fin.values, [0.0, 0.0, 1.0 / 3.0, 1.0 / 3.0]);
        assert!((fin.last().unwrap() - 0.33).abs() < 0.005);
        let cur = repetition_rates::<f64>(&repeats, Normalization::CurrentT);
        assert_eq!(cur.values, [0.0, 0.0, 0.5, 1.0 / 3.0]);
        assert_eq!(repetition_rates::<f64>(&[0], Normalization::FinalT).values, [0.0]);
        assert_eq!(
            repetition_rates::<f64>(&[0, 0, 0], Normalization::CurrentT).values,
            [0.0; 3]
        );
    }

    #[test]
    fn carry_forward_and_best() {
        let c = MetricCurve {
            values: vec![0.25f64, 0.0, 0.5],
            normalization: None,
        };
        assert_eq!(c.carried_forward(5), [0.25, 0.0, 0.5, 0.5, 0.5]);
        assert_eq!(c.value_at(0), 0.25);
        assert_eq!(c.best_so_far().values, [0.25, 0.25, 0.5]);
        let empty = MetricCurve::<f64> {
            values: vec![],
            normalization: None,
        };
        assert_eq!(empty.carried_forward(2), [0.0, 0.0]);
    }

    #[test]
    fn single_milestone_is_success_indicator() {
        // |M| = 1 with the milestone "code fully matched": PR equals done.
        let done = [false, false, true];
        let raw: Vec<usize> = done.iter().map(|&d| d as usize).collect();
        let pr = progress_rates::<f64>(&raw, 1);
        let success: Vec<f64> = done.iter().map(|&d| if d { 1.0 } else { 0.0 }).collect();
        assert_eq!(pr.values, success);
    }
}
