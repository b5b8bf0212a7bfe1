//! Repeated-action counting.
//!
//! An action is repeated when its similarity to at least one earlier action
//! (any earlier action, not only earlier unique ones) reaches the
//! resolution `theta`.

use std::collections::HashSet;

use super::similarity::levenshtein_ratio;
use super::MetricsError;
use crate::scalar::Scalar;

/// Similarity resolution, `0 <= theta <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityParams<F> {
    theta: F,
}

impl<F: Scalar> SimilarityParams<F> {
    pub fn new(theta: F) -> Result<Self, MetricsError> {
        if theta >= F::zero() && theta <= F::one() {
            Ok(Self { theta })
        } else {
            Err(MetricsError::InvalidTheta(theta.to_f64().unwrap_or(f64::NAN)))
        }
    }

    pub fn theta(&self) -> F {
        self.theta
    }
}

impl<F: Scalar> Default for SimilarityParams<F> {
    fn default() -> Self {
        Self { theta: F::one() }
    }
}

/// Classifies actions one at a time.
#[derive(Debug, Clone)]
pub struct RepetitionTracker<F> {
    params: SimilarityParams<F>,
    history: Vec<String>,
    exact: HashSet<String>,
    repeats: usize,
}

impl<F: Scalar> RepetitionTracker<F> {
    pub fn new(params: SimilarityParams<F>) -> Self {
        Self {
            params,
            history: Vec::new(),
            exact: HashSet::new(),
            repeats: 0,
        }
    }

    /// Records `action` and reports whether it repeats an earlier one.
    pub fn push(&mut self, action: &str) -> bool {
        let theta = self.params.theta;
        // ratio reaches 1 only for identical strings
        let repeated = if theta >= F::one() {
            self.exact.contains(action)
        } else {
            self.history
                .iter()
                .any(|prev| levenshtein_ratio::<F>(action, prev) >= theta)
        };
        if repeated {
            self.repeats += 1;
        }
        self.history.push(action.to_string());
        self.exact.insert(action.to_string());
        repeated
    }

    /// Repeated actions seen so far.
    pub fn repeats(&self) -> usize {
        self.repeats
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }
}

/// Per-action repeated flags.
pub fn repeated_flags<F: Scalar, S: AsRef<str>>(actions: &[S], params: SimilarityParams<F>) -> Vec<bool> {
    let mut tracker = RepetitionTracker::new(params);
    actions.iter().map(|a| tracker.push(a.as_ref())).collect()
}

/// Cumulative repeated-action counts after each step.
pub fn cumulative_repetitions<F: Scalar, S: AsRef<str>>(actions: &[S], params: SimilarityParams<F>) -> Vec<usize> {
    let mut tracker = RepetitionTracker::new(params);
    actions
        .iter()
        .map(|a| {
            tracker.push(a.as_ref());
            tracker.repeats()
        })
        .collect()
}

/// Number of repeated actions in the list: `len(actions) - |unique|`.
pub fn get_repetitions<F: Scalar, S: AsRef<str>>(actions: &[S], params: SimilarityParams<F>) -> usize {
    repeated_flags(actions, params).iter().filter(|&&r| r).count()
}
