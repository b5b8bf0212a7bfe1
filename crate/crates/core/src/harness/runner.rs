use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use super::persist::{load_config, trajectory_path, write_config, TrajectoryWriter};
use super::report::{report, ReportOptions};
use super::{build_agent, HarnessError, RunConfig};
use crate::agents::History;
use crate::driver::{Action, StepFlag, StepRecord, Trajectory};
use crate::metrics::{RepetitionTracker, RunReport};

/// One instance to play: which id it is filed under, the seed its agent is
/// derived from and the hidden truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstancePlan {
    pub instance_id: u64,
    pub seed: u64,
    pub truth_descriptor: String,
}

/// Instance `i` uses seed `config.seed ^ i` for both its truth and its agent.
pub fn plan_instances(config: &RunConfig) -> Result<Vec<InstancePlan>, HarnessError> {
    (0..config.instances as u64)
        .map(|i| {
            let seed = config.instance_seed(i);
            Ok(InstancePlan {
                instance_id: i,
                seed,
                truth_descriptor: config.env.truth_for_seed(seed)?,
            })
        })
        .collect()
}

/// Plays one instance, streaming its trajectory into the run directory.
pub fn run_instance(config: &RunConfig, plan: &InstancePlan) -> Result<Trajectory, HarnessError> {
    let truth = &plan.truth_descriptor;
    let mut driver = config.env.driver(truth)?;
    let milestones = config.env.milestones(truth)?;
    let mut agent = build_agent(&config.agent, &config.env, truth, plan.seed)?;

    let mut trajectory = Trajectory {
        run_id: config.run_id(),
        benchmark: config.env.benchmark(),
        instance_id: plan.instance_id,
        seed: plan.seed,
        max_steps: config.max_steps,
        truth_descriptor: truth.clone(),
        env: config.env.clone(),
        milestone_count: milestones.count(),
        agent: config.agent.label(),
        theta: config.theta,
        records: Vec::new(),
        success: false,
    };
    let mut writer = TrajectoryWriter::create(trajectory_path(&config.output_dir, plan.instance_id), &trajectory)?;

    let first = driver.reset()?;
    let mut done = first.done;
    let mut history = History::new(first.output);
    let mut repeats = RepetitionTracker::new(config.similarity());
    while !done && trajectory.records.len() < config.max_steps {
        let started = Instant::now();
        let reply = agent.next_action(history.latest(), &history);
        let observation = driver.step(&Action::new(reply.action.clone()))?;
        let progress_raw = milestones.progress(&driver.state())?;
        repeats.push(&reply.action);
        let record = StepRecord {
            step_index: trajectory.records.len() + 1,
            action_value: reply.action,
            observation_output: observation.output,
            done: observation.done,
            progress_raw,
            repetitions_raw: repeats.repeats(),
            wall_time_ms: started.elapsed().as_millis() as u64,
            flags: reply.flag.into_iter().collect(),
        };
        writer.append(&record)?;
        history.push(record.action_value.clone(), record.observation_output.clone());
        done = record.done;
        let aborted = record.has_flag(StepFlag::Aborted);
        trajectory.records.push(record);
        if aborted {
            log::warn!("instance {} aborted at step {}", plan.instance_id, trajectory.len());
            break;
        }
    }
    trajectory.refresh_success();
    log::info!(
        "instance {}: {} after {} steps",
        plan.instance_id,
        if trajectory.success { "solved" } else { "unsolved" },
        trajectory.len()
    );
    Ok(trajectory)
}

/// Plays `plans` with up to `config.parallelism` worker threads and writes
/// `config.json`. Plan ids must be `0..plans.len()`.
///
/// Each instance owns its driver, agent and RNG streams, so the result does
/// not depend on the thread count.
pub fn run_plan(config: &RunConfig, plans: &[InstancePlan]) -> Result<Vec<Trajectory>, HarnessError> {
    let mut ids: Vec<u64> = plans.iter().map(|p| p.instance_id).collect();
    ids.sort_unstable();
    if plans.is_empty() || ids.iter().enumerate().any(|(i, &id)| id != i as u64) {
        return Err(HarnessError::InvalidConfig(
            "instance ids must be 0..n without gaps".into(),
        ));
    }
    let mut config = config.clone();
    config.instances = plans.len();
    config.validate()?;
    write_config(&config.output_dir, &config)?;

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<Trajectory, HarnessError>>>> =
        Mutex::new((0..plans.len()).map(|_| None).collect());
    let workers = config.parallelism.min(plans.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(plan) = plans.get(i) else { break };
                let result = catch_unwind(AssertUnwindSafe(|| run_instance(&config, plan))).unwrap_or_else(|payload| {
                    let message = payload
                        .downcast_ref::<&str>()
                        .map(|s| s.to_string())
                        .or_else(|| payload.downcast_ref::<String>().cloned())
                        .unwrap_or_default();
                    Err(HarnessError::WorkerPanic {
                        instance: plan.instance_id,
                        message,
                    })
                });
                slots.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(result);
            });
        }
    });

    let mut trajectories = slots
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .map(|slot| slot.expect("every plan is claimed by a worker"))
        .collect::<Result<Vec<_>, _>>()?;
    trajectories.sort_by_key(|t| t.instance_id);
    Ok(trajectories)
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trajectories: Vec<Trajectory>,
    /// Recomputed from the files on disk.
    pub report: RunReport<f64>,
}

/// Plans, plays and reports a whole run.
pub fn run(config: &RunConfig) -> Result<RunOutcome, HarnessError> {
    config.validate()?;
    let plans = plan_instances(config)?;
    let trajectories = run_plan(config, &plans)?;
    let report = report(&config.output_dir, &ReportOptions::default())?;
    Ok(RunOutcome { trajectories, report })
}

#[derive(Debug, Clone)]
pub struct ExtendOutcome {
    pub base_max_steps: usize,
    pub extended_max_steps: usize,
    pub base: RunReport<f64>,
    pub extended: RunReport<f64>,
    pub delta_sr: f64,
    pub delta_pr: f64,
    pub delta_rr: f64,
}

pub const EXTEND_SUMMARY_CSV: &str = "extend_summary.csv";

/// Re-runs the configuration stored in `base_dir` with a larger step cap
/// into `base_dir/extend_<T>/` and compares the two reports.
pub fn extend_runtime(base_dir: &Path, new_max_steps: usize) -> Result<ExtendOutcome, HarnessError> {
    let base_config = load_config(base_dir)?;
    if new_max_steps <= base_config.max_steps {
        return Err(HarnessError::InvalidConfig(format!(
            "new step cap {new_max_steps} must exceed the original {}",
            base_config.max_steps
        )));
    }
    let base = report(base_dir, &ReportOptions::default())?;
    let mut config = base_config.clone();
    config.max_steps = new_max_steps;
    config.output_dir = base_dir.join(format!("extend_{new_max_steps}"));
    let extended = run(&config)?.report;

    let outcome = ExtendOutcome {
        base_max_steps: base_config.max_steps,
        extended_max_steps: new_max_steps,
        delta_sr: extended.sr - base.sr,
        delta_pr: extended.pr_final - base.pr_final,
        delta_rr: extended.rr_final - base.rr_final,
        base,
        extended,
    };
    let path = config.output_dir.join(EXTEND_SUMMARY_CSV);
    let csv = format!(
        "base_max_steps,extended_max_steps,SR_base,SR_extended,delta_SR,PR_base,PR_extended,delta_PR,RR_base,RR_extended,delta_RR\n\
         {},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
        outcome.base_max_steps,
        outcome.extended_max_steps,
        outcome.base.sr,
        outcome.extended.sr,
        outcome.delta_sr,
        outcome.base.pr_final,
        outcome.extended.pr_final,
        outcome.delta_pr,
        outcome.base.rr_final,
        outcome.extended.rr_final,
        outcome.delta_rr,
    );
    std::fs::write(&path, csv).map_err(HarnessError::io(&path))?;
    Ok(outcome)
}
