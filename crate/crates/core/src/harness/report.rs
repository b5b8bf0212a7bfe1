use std::fmt::Write as _;
use std::path::Path;

use super::persist::{load_run, trajectory_path};
use super::{HarnessError, RunConfig};
use crate::driver::Trajectory;
use crate::metrics::{aggregate, cumulative_repetitions, repeated_flags, AggregateOptions, RunReport};

pub const SUMMARY_CSV: &str = "summary.csv";
pub const INSTANCES_CSV: &str = "instances.csv";
pub const CURVES_CSV: &str = "curves.csv";
pub const REPETITION_MAP_CSV: &str = "repetition_map.csv";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReportOptions {
    /// Step N at which PR_N and RR_N are read; defaults to the step cap.
    pub at_step: Option<usize>,
}

/// Checks the stored repetition counts against a fresh computation.
fn check_repetitions(run_dir: &Path, config: &RunConfig, t: &Trajectory) -> Result<(), HarnessError> {
    let recomputed = cumulative_repetitions(&t.actions(), config.similarity());
    for (record, &expected) in t.records.iter().zip(&recomputed) {
        if record.repetitions_raw != expected {
            return Err(HarnessError::RepetitionMismatch {
                path: trajectory_path(run_dir, t.instance_id),
                step: record.step_index,
                stored: record.repetitions_raw,
                recomputed: expected,
            });
        }
    }
    Ok(())
}

/// Recomputes every metric from the JSONL files in `run_dir` and rewrites
/// the CSV reports next to them.
pub fn report(run_dir: &Path, options: &ReportOptions) -> Result<RunReport<f64>, HarnessError> {
    let (config, trajectories) = load_run(run_dir)?;
    for t in &trajectories {
        check_repetitions(run_dir, &config, t)?;
    }
    let report = aggregate(
        &trajectories,
        &AggregateOptions {
            similarity: config.similarity(),
            normalization: config.rr_normalization,
            at_step: options.at_step,
        },
    )?;
    write_report(run_dir, &config, &report, &trajectories)?;
    Ok(report)
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

pub fn write_report(
    run_dir: &Path,
    config: &RunConfig,
    report: &RunReport<f64>,
    trajectories: &[Trajectory],
) -> Result<(), HarnessError> {
    let mut summary =
        String::from("benchmark,agent,instances,max_steps,at_step,SR,Steps,PR_N,RR_N,steps_to_success,aborted\n");
    writeln!(
        summary,
        "{},{},{},{},{},{},{},{},{},{},{}",
        report.benchmark,
        config.agent.label(),
        report.instances,
        config.max_steps,
        report.at_step,
        f6(report.sr),
        f6(report.mean_steps),
        f6(report.pr_final),
        f6(report.rr_final),
        report.steps_to_success.map(f6).unwrap_or_default(),
        report.aborted,
    )
    .unwrap();

    let mut instances = String::from("instance,success,aborted,steps,PR_N,RR_N,forced_repeats\n");
    for row in &report.rows {
        writeln!(
            instances,
            "{},{},{},{},{},{},{}",
            row.instance_id,
            row.success as u8,
            row.aborted as u8,
            row.steps,
            f6(row.pr_final),
            f6(row.rr_final),
            row.forced_repeats
        )
        .unwrap();
    }

    let mut curves = String::from("step,mean_PR,mean_RR\n");
    for (i, (pr, rr)) in report.mean_pr_curve.iter().zip(&report.mean_rr_curve).enumerate() {
        writeln!(curves, "{},{},{}", i + 1, f6(*pr), f6(*rr)).unwrap();
    }

    let mut map = String::from("instance,step,is_repeated\n");
    for t in trajectories {
        for (i, repeated) in repeated_flags(&t.actions(), config.similarity())
            .into_iter()
            .enumerate()
        {
            writeln!(map, "{},{},{}", t.instance_id, i + 1, repeated as u8).unwrap();
        }
    }

    for (name, body) in [
        (SUMMARY_CSV, summary),
        (INSTANCES_CSV, instances),
        (CURVES_CSV, curves),
        (REPETITION_MAP_CSV, map),
    ] {
        let path = run_dir.join(name);
        std::fs::write(&path, body).map_err(HarnessError::io(&path))?;
    }
    Ok(())
}
