use std::path::{Path, PathBuf};

use quest_core::envs::mastermind::MastermindConfig;
use quest_core::envs::sudoku::SudokuConfig;
use quest_core::harness::{
    self, extend_runtime, plan_instances, read_trajectory, replay, run, run_plan, trajectory_path, write_config,
    write_trajectory, AgentKind, AgentSpec, HarnessError, ReplayVerdict, ReportOptions, RunConfig,
};
use quest_core::metrics::{cumulative_repetitions, Normalization};
use quest_core::{Action, Benchmark, EnvSpec, StepRecord, Trajectory};

fn tiny_mastermind() -> EnvSpec {
    EnvSpec::Mastermind(MastermindConfig::with_digits(3, 3))
}

fn config(env: EnvSpec, kind: AgentKind, out: &Path) -> RunConfig {
    RunConfig {
        instances: 6,
        max_steps: 30,
        seed: 11,
        ..RunConfig::new(env, AgentSpec::new(kind), out)
    }
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/report_fixture")
}

/// Steps a real driver so observations are genuine; progress and
/// repetition counts are the hand-derived values behind the golden CSVs.
fn fixture_trajectory(id: u64, truth: &str, actions: &[&str], progress: &[usize], reps: &[usize]) -> Trajectory {
    let env = tiny_mastermind();
    let mut driver = env.driver(truth).unwrap();
    driver.reset().unwrap();
    let records = actions
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let obs = driver.step(&Action::from(*a)).unwrap();
            StepRecord {
                step_index: i + 1,
                action_value: a.to_string(),
                observation_output: obs.output,
                done: obs.done,
                progress_raw: progress[i],
                repetitions_raw: reps[i],
                wall_time_ms: 0,
                flags: vec![],
            }
        })
        .collect();
    let mut t = Trajectory {
        run_id: "fixture".into(),
        benchmark: Benchmark::Mastermind,
        instance_id: id,
        seed: id,
        max_steps: 4,
        truth_descriptor: truth.into(),
        env,
        milestone_count: 3,
        agent: "random".into(),
        theta: 1.0,
        records,
        success: false,
    };
    t.refresh_success();
    t
}

fn write_fixture_run(dir: &Path) {
    let mut cfg = RunConfig::new(tiny_mastermind(), AgentSpec::new(AgentKind::Random), dir);
    cfg.instances = 2;
    cfg.max_steps = 4;
    write_config(dir, &cfg).unwrap();
    let runs = [
        fixture_trajectory(0, "012", &["000", "000", "012"], &[1, 1, 3], &[0, 1, 1]),
        fixture_trajectory(1, "012", &["111", "222", "111", "111"], &[1, 1, 1, 1], &[0, 0, 1, 2]),
    ];
    for t in &runs {
        write_trajectory(&trajectory_path(dir, t.instance_id), t).unwrap();
    }
}

#[test]
fn report_matches_hand_computed_golden_csvs() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture_run(dir.path());
    let report = harness::report(dir.path(), &ReportOptions::default()).unwrap();
    assert_eq!(report.successes, 1);
    assert_eq!(report.mean_pr_curve.len(), 4);
    for name in ["summary.csv", "instances.csv", "curves.csv", "repetition_map.csv"] {
        let got = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let want = std::fs::read_to_string(golden_dir().join(name)).unwrap();
        assert_eq!(got, want, "{name}");
    }
    // Fixture observations come from the real driver, so they replay.
    for i in 0..2 {
        assert!(replay(&trajectory_path(dir.path(), i)).unwrap().is_match());
    }
}

#[test]
fn report_at_earlier_step() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture_run(dir.path());
    let r = harness::report(dir.path(), &ReportOptions { at_step: Some(2) }).unwrap();
    assert_eq!(r.at_step, 2);
    assert!((r.pr_final - 1.0 / 3.0).abs() < 1e-12);
    assert!((r.rr_final - 0.25).abs() < 1e-12);
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().starts_with("mastermind,random,2,4,2,"));
}

#[test]
fn stored_repetitions_are_checked() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture_run(dir.path());
    let path = trajectory_path(dir.path(), 1);
    let mut t = read_trajectory(&path).unwrap();
    t.records[3].repetitions_raw = 1;
    write_trajectory(&path, &t).unwrap();
    let err = harness::report(dir.path(), &ReportOptions::default()).unwrap_err();
    assert!(
        matches!(
            err,
            HarnessError::RepetitionMismatch {
                step: 4,
                stored: 1,
                recomputed: 2,
                ..
            }
        ),
        "{err}"
    );
    assert!(err.to_string().contains("instance_00001.jsonl"));
}

#[test]
fn missing_and_corrupt_files_are_named() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture_run(dir.path());
    let path = trajectory_path(dir.path(), 1);
    let text = std::fs::read_to_string(&path).unwrap();

    std::fs::write(&path, text.replacen("\"step_index\":2", "\"step_index\":\"two\"", 1)).unwrap();
    let err = harness::report(dir.path(), &ReportOptions::default()).unwrap_err();
    assert!(matches!(err, HarnessError::Corrupt { line: 3, .. }), "{err}");
    assert!(err.to_string().contains("instance_00001.jsonl:3"));

    std::fs::remove_file(&path).unwrap();
    let err = harness::report(dir.path(), &ReportOptions::default()).unwrap_err();
    assert!(matches!(err, HarnessError::MissingTrajectory { .. }));
    assert!(err.to_string().contains("instance_00001.jsonl"));
}

#[test]
fn runs_are_reproducible_and_thread_count_free() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg_a = config(tiny_mastermind(), AgentKind::Random, a.path());
    let cfg_b = RunConfig {
        parallelism: 4,
        ..config(tiny_mastermind(), AgentKind::Random, b.path())
    };
    let ra = run(&cfg_a).unwrap();
    let rb = run(&cfg_b).unwrap();
    assert_eq!(ra.trajectories.len(), 6);
    for (x, y) in ra.trajectories.iter().zip(&rb.trajectories) {
        assert!(x.same_interaction(y));
    }
    assert_eq!(ra.report, rb.report);
    for name in ["summary.csv", "instances.csv", "curves.csv", "repetition_map.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn run_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        rr_normalization: Normalization::CurrentT,
        theta: 0.6,
        ..config(tiny_mastermind(), AgentKind::Random, dir.path())
    };
    let out = run(&cfg).unwrap();
    let r = &out.report;
    assert_eq!(r.successes as f64, r.sr * r.instances as f64);
    assert!(r.mean_steps >= 1.0 && r.mean_steps <= cfg.max_steps as f64);
    assert_eq!(r.mean_pr_curve.len(), cfg.max_steps);
    assert_eq!(r.mean_rr_curve.len(), cfg.max_steps);
    for t in &out.trajectories {
        let stored: Vec<usize> = t.records.iter().map(|s| s.repetitions_raw).collect();
        assert_eq!(stored, cumulative_repetitions(&t.actions(), cfg.similarity()));
        assert_eq!(t.theta, 0.6);
    }
    let reloaded = harness::report(dir.path(), &ReportOptions::default()).unwrap();
    assert_eq!(&reloaded, r);
}

#[test]
fn instance_seeds_are_stable_when_adding_instances() {
    let dir = tempfile::tempdir().unwrap();
    let small = config(tiny_mastermind(), AgentKind::Random, dir.path());
    let large = RunConfig {
        instances: 12,
        ..small.clone()
    };
    let a = plan_instances(&small).unwrap();
    let b = plan_instances(&large).unwrap();
    assert_eq!(a[..], b[..6]);
    assert_eq!(a[3].seed, 11 ^ 3);
}

#[test]
fn replay_detects_tampering_and_version_changes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(tiny_mastermind(), AgentKind::Random, dir.path());
    let out = run(&cfg).unwrap();
    let t = out
        .trajectories
        .iter()
        .find(|t| t.len() >= 3)
        .expect("a run of 3+ steps");
    let path = trajectory_path(dir.path(), t.instance_id);
    assert_eq!(replay(&path).unwrap(), ReplayVerdict::Match { steps: t.len() });

    let mut tampered = t.clone();
    tampered.records[2].observation_output.push('!');
    write_trajectory(&path, &tampered).unwrap();
    match replay(&path).unwrap() {
        ReplayVerdict::Diverged { step, field, .. } => {
            assert_eq!(step, 3);
            assert_eq!(field, "observation_output");
        }
        other => panic!("expected divergence, got {other:?}"),
    }

    write_trajectory(&path, t).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replacen(quest_core::ENV_VERSION, "envs-0", 1)).unwrap();
    assert!(matches!(
        replay(&path),
        Err(HarnessError::VersionMismatch {
            what: "env_version",
            ..
        })
    ));
}

#[test]
fn extension_keeps_prefixes_and_solved_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        max_steps: 10,
        ..config(tiny_mastermind(), AgentKind::Random, dir.path())
    };
    let base = run(&cfg).unwrap();
    let ext = extend_runtime(dir.path(), 40).unwrap();
    assert_eq!(ext.extended.instances, 6);
    let ext_dir = dir.path().join("extend_40");
    assert!(ext_dir.join("extend_summary.csv").exists());
    for b in &base.trajectories {
        let e = read_trajectory(&trajectory_path(&ext_dir, b.instance_id)).unwrap();
        let strip = |r: &StepRecord| (r.action_value.clone(), r.observation_output.clone(), r.done);
        let prefix: Vec<_> = e.records.iter().take(b.len()).map(strip).collect();
        assert_eq!(prefix, b.records.iter().map(strip).collect::<Vec<_>>());
        if b.success {
            assert_eq!(e.len(), b.len());
        }
    }
    assert!(ext.delta_sr >= 0.0);
    assert!(matches!(
        extend_runtime(dir.path(), 10),
        Err(HarnessError::InvalidConfig(_))
    ));
}

#[test]
fn solvers_have_zero_extension_delta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        EnvSpec::Sudoku(SudokuConfig { target_empty: 20 }),
        AgentKind::Oracle,
        dir.path(),
    );
    let out = run(&cfg).unwrap();
    assert_eq!(out.report.sr, 1.0);
    assert_eq!(out.report.pr_final, 1.0);
    let ext = extend_runtime(dir.path(), 60).unwrap();
    assert_eq!(ext.delta_sr, 0.0);
    assert_eq!(ext.delta_pr, 0.0);
    assert_eq!(ext.base.mean_steps, ext.extended.mean_steps);
}

#[test]
fn explicit_plans_and_bad_ids() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(tiny_mastermind(), AgentKind::Consistent, dir.path());
    let plans: Vec<_> = ["222", "012", "100"]
        .iter()
        .enumerate()
        .map(|(i, truth)| harness::InstancePlan {
            instance_id: i as u64,
            seed: i as u64,
            truth_descriptor: truth.to_string(),
        })
        .collect();
    let ts = run_plan(&cfg, &plans).unwrap();
    assert!(ts.iter().all(|t| t.success));
    assert_eq!(ts[1].truth_descriptor, "012");
    // config.json reflects the plan size so reports find every file.
    let r = harness::report(dir.path(), &ReportOptions::default()).unwrap();
    assert_eq!(r.instances, 3);

    let mut gap = plans.clone();
    gap[2].instance_id = 7;
    assert!(matches!(run_plan(&cfg, &gap), Err(HarnessError::InvalidConfig(_))));
}

#[test]
fn incompatible_agent_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        EnvSpec::Sudoku(SudokuConfig { target_empty: 20 }),
        AgentKind::Consistent,
        dir.path(),
    );
    assert!(matches!(run(&cfg), Err(HarnessError::IncompatibleAgent { .. })));
}
