//! Cross-run aggregation: success rate, steps, PR_N and RR_N.

use serde::{Deserialize, Serialize};

use super::curves::{progress_rate_curve, repetition_rate_curve, Normalization};
use super::repetition::SimilarityParams;
use super::MetricsError;
use crate::driver::{Benchmark, StepFlag, Trajectory};
use crate::scalar::{order_free_mean, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateOptions<F> {
    pub similarity: SimilarityParams<F>,
    pub normalization: Normalization,
    /// Step `N` for `PR_N`/`RR_N`; defaults to the step cap.
    pub at_step: Option<usize>,
}

impl<F: Scalar> Default for AggregateOptions<F> {
    fn default() -> Self {
        Self {
            similarity: SimilarityParams::default(),
            normalization: Normalization::FinalT,
            at_step: None,
        }
    }
}

/// Per-instance summary row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRow<F> {
    pub instance_id: u64,
    pub success: bool,
    pub aborted: bool,
    /// Executed steps.
    pub steps: usize,
    pub pr_final: F,
    pub rr_final: F,
    pub forced_repeats: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport<F> {
    pub benchmark: Benchmark,
    pub instances: usize,
    pub successes: usize,
    pub aborted: usize,
    /// Success rate.
    pub sr: F,
    /// Mean steps, failed runs counted at the step cap.
    pub mean_steps: F,
    /// Mean steps over successful runs only.
    pub steps_to_success: Option<F>,
    /// The `N` in `PR_N`/`RR_N`.
    pub at_step: usize,
    pub pr_final: F,
    pub rr_final: F,
    pub mean_pr_curve: Vec<F>,
    pub mean_rr_curve: Vec<F>,
    pub rows: Vec<InstanceRow<F>>,
}

/// Averages trajectories of one benchmark.
///
/// Runs that stop early keep their final PR/RR for every later step, so the
/// mean curves cover the whole horizon. Means are independent of input order.
pub fn aggregate<F: Scalar>(
    trajectories: &[Trajectory],
    options: &AggregateOptions<F>,
) -> Result<RunReport<F>, MetricsError> {
    let first = trajectories.first().ok_or(MetricsError::NoTrajectories)?;
    if let Some(other) = trajectories.iter().find(|t| t.benchmark != first.benchmark) {
        return Err(MetricsError::MixedBenchmarks(first.benchmark, other.benchmark));
    }
    let horizon = trajectories.iter().map(|t| t.max_steps).max().unwrap_or(0).max(1);
    let at_step = options.at_step.unwrap_or(horizon).max(1);
    let curve_len = horizon.max(at_step);

    let mut pr_curves = Vec::with_capacity(trajectories.len());
    let mut rr_curves = Vec::with_capacity(trajectories.len());
    let mut rows = Vec::with_capacity(trajectories.len());
    for t in trajectories {
        let pr = progress_rate_curve::<F>(t, t.milestone_count).carried_forward(curve_len);
        let rr = repetition_rate_curve(t, options.similarity, options.normalization).carried_forward(curve_len);
        rows.push(InstanceRow {
            instance_id: t.instance_id,
            success: t.success,
            aborted: t.is_aborted(),
            steps: t.len(),
            pr_final: pr[at_step - 1],
            rr_final: rr[at_step - 1],
            forced_repeats: t
                .records
                .iter()
                .filter(|r| r.has_flag(StepFlag::RepeatedForced))
                .count(),
        });
        pr_curves.push(pr);
        rr_curves.push(rr);
    }

    let column_mean = |curves: &[Vec<F>], step: usize| {
        let column: Vec<F> = curves.iter().map(|c| c[step]).collect();
        order_free_mean(&column)
    };
    let mean_pr_curve: Vec<F> = (0..curve_len).map(|i| column_mean(&pr_curves, i)).collect();
    let mean_rr_curve: Vec<F> = (0..curve_len).map(|i| column_mean(&rr_curves, i)).collect();

    let successes = trajectories.iter().filter(|t| t.success).count();
    let steps: Vec<F> = trajectories
        .iter()
        .map(|t| F::from_count(if t.success { t.len() } else { t.max_steps }))
        .collect();
    let success_steps: Vec<F> = trajectories
        .iter()
        .filter(|t| t.success)
        .map(|t| F::from_count(t.len()))
        .collect();

    rows.sort_by_key(|r| r.instance_id);
    Ok(RunReport {
        benchmark: first.benchmark,
        instances: trajectories.len(),
        successes,
        aborted: rows.iter().filter(|r| r.aborted).count(),
        sr: F::ratio(successes, trajectories.len()),
        mean_steps: order_free_mean(&steps),
        steps_to_success: (!success_steps.is_empty()).then(|| order_free_mean(&success_steps)),
        at_step,
        pr_final: mean_pr_curve[at_step - 1],
        rr_final: mean_rr_curve[at_step - 1],
        mean_pr_curve,
        mean_rr_curve,
        rows,
    })
}
