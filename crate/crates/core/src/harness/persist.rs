use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{HarnessError, RunConfig};
use crate::driver::{Benchmark, StepRecord, Trajectory};
use crate::envs::{EnvSpec, ENV_VERSION};

pub const FORMAT_VERSION: u32 = 1;
pub const CONFIG_FILE: &str = "config.json";
pub const TRAJECTORY_DIR: &str = "trajectories";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    env_version: String,
    run_id: String,
    benchmark: Benchmark,
    instance_id: u64,
    seed: u64,
    max_steps: usize,
    truth_descriptor: String,
    env: EnvSpec,
    milestone_count: usize,
    agent: String,
    theta: f64,
}

impl Header {
    fn of(t: &Trajectory) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            env_version: ENV_VERSION.to_string(),
            run_id: t.run_id.clone(),
            benchmark: t.benchmark,
            instance_id: t.instance_id,
            seed: t.seed,
            max_steps: t.max_steps,
            truth_descriptor: t.truth_descriptor.clone(),
            env: t.env.clone(),
            milestone_count: t.milestone_count,
            agent: t.agent.clone(),
            theta: t.theta,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Header(Header),
    Step(StepRecord),
}

pub fn trajectory_path(run_dir: &Path, instance_id: u64) -> PathBuf {
    run_dir
        .join(TRAJECTORY_DIR)
        .join(format!("instance_{instance_id:05}.jsonl"))
}

/// Streams one trajectory to disk, flushing after every line so an
/// interrupted run leaves readable prefixes behind.
pub struct TrajectoryWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl TrajectoryWriter {
    /// Creates the file and writes the header from `t` (its records are ignored).
    pub fn create(path: impl Into<PathBuf>, t: &Trajectory) -> Result<Self, HarnessError> {
        let path = path.into();
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(HarnessError::io(parent))?;
        }
        let file = File::create(&path).map_err(HarnessError::io(&path))?;
        let mut writer = Self {
            path,
            out: BufWriter::new(file),
        };
        writer.write_line(&Line::Header(Header::of(t)))?;
        Ok(writer)
    }

    pub fn append(&mut self, record: &StepRecord) -> Result<(), HarnessError> {
        // Serializing a borrowed record avoids cloning the observation text.
        #[derive(Serialize)]
        struct StepLine<'a> {
            #[serde(rename = "type")]
            kind: &'static str,
            #[serde(flatten)]
            record: &'a StepRecord,
        }
        self.write_line(&StepLine { kind: "step", record })
    }

    fn write_line<T: Serialize>(&mut self, line: &T) -> Result<(), HarnessError> {
        let io = HarnessError::io(&self.path);
        serde_json::to_writer(&mut self.out, line)
            .map_err(std::io::Error::from)
            .and_then(|_| self.out.write_all(b"\n"))
            .and_then(|_| self.out.flush())
            .map_err(io)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn corrupt(path: &Path, line: usize, reason: impl Into<String>) -> HarnessError {
    HarnessError::Corrupt {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn check_versions(path: &Path, header: &Value) -> Result<(), HarnessError> {
    let format = header.get("format_version").and_then(Value::as_u64);
    if format != Some(FORMAT_VERSION as u64) {
        return Err(HarnessError::VersionMismatch {
            path: path.to_path_buf(),
            what: "format_version",
            expected: FORMAT_VERSION.to_string(),
            found: format.map_or_else(|| "missing".into(), |v| v.to_string()),
        });
    }
    let env = header.get("env_version").and_then(Value::as_str);
    if env != Some(ENV_VERSION) {
        return Err(HarnessError::VersionMismatch {
            path: path.to_path_buf(),
            what: "env_version",
            expected: ENV_VERSION.into(),
            found: env.unwrap_or("missing").into(),
        });
    }
    Ok(())
}

/// Loads and validates one JSONL trajectory.
pub fn read_trajectory(path: &Path) -> Result<Trajectory, HarnessError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(HarnessError::MissingTrajectory { path: path.into() })
        }
        Err(e) => return Err(HarnessError::io(path)(e)),
    };
    let mut lines = BufReader::new(file).lines().enumerate();

    let (_, first) = lines.next().ok_or_else(|| corrupt(path, 1, "empty file"))?;
    let first = first.map_err(HarnessError::io(path))?;
    let raw: Value = serde_json::from_str(&first).map_err(|e| corrupt(path, 1, e.to_string()))?;
    if raw.get("type").and_then(Value::as_str) != Some("header") {
        return Err(corrupt(path, 1, "first line is not a header"));
    }
    check_versions(path, &raw)?;
    let header = match serde_json::from_value::<Line>(raw) {
        Ok(Line::Header(h)) => h,
        Ok(Line::Step(_)) => unreachable!("type checked above"),
        Err(e) => return Err(corrupt(path, 1, e.to_string())),
    };

    let mut records = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(HarnessError::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Line>(&line) {
            Ok(Line::Step(r)) => records.push(r),
            Ok(Line::Header(_)) => return Err(corrupt(path, i + 1, "unexpected second header")),
            Err(e) => return Err(corrupt(path, i + 1, e.to_string())),
        }
    }

    let mut t = Trajectory {
        run_id: header.run_id,
        benchmark: header.benchmark,
        instance_id: header.instance_id,
        seed: header.seed,
        max_steps: header.max_steps,
        truth_descriptor: header.truth_descriptor,
        env: header.env,
        milestone_count: header.milestone_count,
        agent: header.agent,
        theta: header.theta,
        records,
        success: false,
    };
    t.refresh_success();
    t.validate().map_err(|source| HarnessError::InvalidTrajectory {
        path: path.into(),
        source,
    })?;
    Ok(t)
}

/// Writes a whole trajectory at once.
pub fn write_trajectory(path: &Path, t: &Trajectory) -> Result<(), HarnessError> {
    let mut w = TrajectoryWriter::create(path, t)?;
    t.records.iter().try_for_each(|r| w.append(r))
}

pub fn write_config(run_dir: &Path, config: &RunConfig) -> Result<(), HarnessError> {
    std::fs::create_dir_all(run_dir).map_err(HarnessError::io(run_dir))?;
    let path = run_dir.join(CONFIG_FILE);
    let json = serde_json::to_string_pretty(config).expect("config serializes");
    std::fs::write(&path, json + "\n").map_err(HarnessError::io(&path))
}

/// Reads `config.json`; `output_dir` is replaced by `run_dir` so moved
/// directories keep working.
pub fn load_config(run_dir: &Path) -> Result<RunConfig, HarnessError> {
    let path = run_dir.join(CONFIG_FILE);
    let text = std::fs::read_to_string(&path).map_err(HarnessError::io(&path))?;
    let mut config: RunConfig = serde_json::from_str(&text).map_err(|e| corrupt(&path, e.line(), e.to_string()))?;
    config.output_dir = run_dir.to_path_buf();
    Ok(config)
}

/// Config plus every trajectory the config promises, in instance order.
pub fn load_run(run_dir: &Path) -> Result<(RunConfig, Vec<Trajectory>), HarnessError> {
    let config = load_config(run_dir)?;
    let trajectories = (0..config.instances as u64)
        .map(|i| read_trajectory(&trajectory_path(run_dir, i)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((config, trajectories))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::StepFlag;
    use crate::envs::mastermind::MastermindConfig;

    fn sample() -> Trajectory {
        let rec = |i: usize, action: &str, reps: usize, done: bool, flags: Vec<StepFlag>| StepRecord {
            step_index: i,
            action_value: action.into(),
            observation_output: format!("obs \"{i}\"\nline"),
            done,
            progress_raw: i,
            repetitions_raw: reps,
            wall_time_ms: 3,
            flags,
        };
        Trajectory {
            run_id: "r".into(),
            benchmark: Benchmark::Mastermind,
            instance_id: 7,
            seed: 99,
            max_steps: 10,
            truth_descriptor: "012".into(),
            env: EnvSpec::Mastermind(MastermindConfig::with_digits(3, 3)),
            milestone_count: 3,
            agent: "random".into(),
            theta: 1.0,
            records: vec![
                rec(1, "000", 0, false, vec![]),
                rec(2, "000", 1, false, vec![StepFlag::RepeatedForced]),
                rec(3, "012", 1, true, vec![]),
            ],
            success: true,
        }
    }

    #[test]
    fn roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let t = sample();
        write_trajectory(&path, &t).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("{\"type\":\"header\""));
        assert!(text.lines().nth(1).unwrap().starts_with("{\"type\":\"step\""));
        assert_eq!(read_trajectory(&path).unwrap(), t);
    }

    #[test]
    fn errors_name_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gone.jsonl");
        let err = read_trajectory(&path).unwrap_err();
        assert!(matches!(err, HarnessError::MissingTrajectory { .. }));
        assert!(err.to_string().contains("gone.jsonl"));

        write_trajectory(&path, &sample()).unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("{not json\n");
        std::fs::write(&path, &text).unwrap();
        let err = read_trajectory(&path).unwrap_err();
        assert!(matches!(err, HarnessError::Corrupt { line: 5, .. }), "{err}");
        assert!(err.to_string().contains("gone.jsonl:5"));
    }

    #[test]
    fn version_checks() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        write_trajectory(&path, &sample()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replace(ENV_VERSION, "envs-0")).unwrap();
        assert!(matches!(
            read_trajectory(&path),
            Err(HarnessError::VersionMismatch {
                what: "env_version",
                ..
            })
        ));
        std::fs::write(&path, text.replace("\"format_version\":1", "\"format_version\":9")).unwrap();
        assert!(matches!(
            read_trajectory(&path),
            Err(HarnessError::VersionMismatch {
                what: "format_version",
                ..
            })
        ));
    }

    #[test]
    fn rejects_inconsistent_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let mut t = sample();
        t.records[2].repetitions_raw = 0;
        write_trajectory(&path, &t).unwrap();
        assert!(matches!(
            read_trajectory(&path),
            Err(HarnessError::InvalidTrajectory { .. })
        ));
    }
}
