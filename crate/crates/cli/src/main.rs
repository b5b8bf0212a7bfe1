use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use quest_core::envs::mastermind::MastermindConfig;
use quest_core::envs::sudoku::SudokuConfig;
use quest_core::harness::{self, AgentKind, AgentSpec, ReplayVerdict, ReportOptions, RunConfig};
use quest_core::metrics::Normalization;
use quest_core::{EnvSpec, Report};

#[derive(Parser)]
#[command(name = "quest", version, about = "Run and score agents on Mastermind and Sudoku")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a batch of instances and write trajectories plus reports.
    Run(RunArgs),
    /// Recompute metrics from a run directory.
    Report {
        dir: PathBuf,
        /// Read PR and RR at this step instead of the step cap.
        #[arg(long)]
        at_step: Option<usize>,
    },
    /// Re-execute one trajectory file and compare every observation.
    Replay { file: PathBuf },
    /// Re-run a stored configuration with a larger step cap.
    Extend {
        dir: PathBuf,
        #[arg(long)]
        max_steps: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchmarkArg {
    Mastermind,
    Sudoku,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AgentArg {
    Random,
    Consistent,
    Oracle,
    Stutter,
    Llm,
}

impl From<AgentArg> for AgentKind {
    fn from(a: AgentArg) -> Self {
        match a {
            AgentArg::Random => AgentKind::Random,
            AgentArg::Consistent => AgentKind::Consistent,
            AgentArg::Oracle => AgentKind::Oracle,
            AgentArg::Stutter => AgentKind::Stutter,
            AgentArg::Llm => AgentKind::Llm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Final,
    Current,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    benchmark: BenchmarkArg,
    #[arg(long, value_enum)]
    agent: AgentArg,
    #[arg(long, default_value_t = 15)]
    instances: usize,
    #[arg(long, default_value_t = 60)]
    max_steps: usize,
    /// Similarity resolution for repetition detection, in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, value_enum, default_value = "final")]
    rr_norm: NormArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    #[arg(long)]
    out: PathBuf,

    /// Mastermind code length.
    #[arg(long, default_value_t = 4)]
    code_length: usize,
    /// Mastermind digits 0..N-1.
    #[arg(long, default_value_t = 10)]
    alphabet_size: usize,
    /// Draw Mastermind codes without repeated digits.
    #[arg(long)]
    no_repeats: bool,
    /// Sudoku empty-cell target.
    #[arg(long, default_value_t = 40)]
    empty_cells: usize,

    /// Wrap the agent in the memory de-duplication layer.
    #[arg(long)]
    memory: bool,
    #[arg(long, default_value_t = 5)]
    retry_budget: usize,
    #[arg(long, default_value_t = 2)]
    stutter_period: usize,
    /// Agent the stutter agent delegates to.
    #[arg(long, value_enum, default_value = "random")]
    stutter_inner: AgentArg,
    #[arg(long, default_value = "gpt-4")]
    model: String,
    #[arg(long)]
    system_prompt: Option<String>,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        let env = match self.benchmark {
            BenchmarkArg::Mastermind => {
                let mut cfg = MastermindConfig::with_digits(self.code_length, self.alphabet_size);
                cfg.allow_repeats = !self.no_repeats;
                EnvSpec::Mastermind(cfg)
            }
            BenchmarkArg::Sudoku => EnvSpec::Sudoku(SudokuConfig {
                target_empty: self.empty_cells,
            }),
        };
        let agent = AgentSpec {
            kind: self.agent.into(),
            memory: self.memory,
            retry_budget: self.retry_budget,
            stutter_period: self.stutter_period,
            stutter_inner: self.stutter_inner.into(),
            llm_model: self.model.clone(),
            llm_system_prompt: self.system_prompt.clone(),
            ..AgentSpec::default()
        };
        RunConfig {
            instances: self.instances,
            max_steps: self.max_steps,
            theta: self.theta,
            rr_normalization: match self.rr_norm {
                NormArg::Final => Normalization::FinalT,
                NormArg::Current => Normalization::CurrentT,
            },
            seed: self.seed,
            parallelism: self.parallelism,
            ..RunConfig::new(env, agent, &self.out)
        }
    }
}

fn print_report(r: &Report) {
    println!("benchmark        {}", r.benchmark);
    println!(
        "instances        {} ({} solved, {} aborted)",
        r.instances, r.successes, r.aborted
    );
    println!("SR               {:.4}", r.sr);
    println!("Steps            {:.2}", r.mean_steps);
    match r.steps_to_success {
        Some(s) => println!("steps to success {s:.2}"),
        None => println!("steps to success -"),
    }
    println!("PR_{:<13} {:.4}", r.at_step, r.pr_final);
    println!("RR_{:<13} {:.4}", r.at_step, r.rr_final);
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => {
            let config = args.config();
            let outcome = harness::run(&config).context("run failed")?;
            print_report(&outcome.report);
            println!("written to {}", config.output_dir.display());
        }
        Command::Report { dir, at_step } => {
            let report = harness::report(&dir, &ReportOptions { at_step })
                .with_context(|| format!("cannot report on {}", dir.display()))?;
            print_report(&report);
        }
        Command::Replay { file } => {
            match harness::replay(&file).with_context(|| format!("cannot replay {}", file.display()))? {
                ReplayVerdict::Match { steps } => println!("PASS: {steps} steps reproduced"),
                ReplayVerdict::Diverged {
                    step,
                    field,
                    recorded,
                    replayed,
                } => {
                    println!("FAIL: step {step} {field} differs");
                    println!("recorded: {recorded:?}");
                    println!("replayed: {replayed:?}");
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
        Command::Extend { dir, max_steps } => {
            let o =
                harness::extend_runtime(&dir, max_steps).with_context(|| format!("cannot extend {}", dir.display()))?;
            println!("step cap         {} -> {}", o.base_max_steps, o.extended_max_steps);
            println!(
                "SR               {:.4} -> {:.4} (delta {:+.4})",
                o.base.sr, o.extended.sr, o.delta_sr
            );
            println!(
                "PR               {:.4} -> {:.4} (delta {:+.4})",
                o.base.pr_final, o.extended.pr_final, o.delta_pr
            );
            println!(
                "RR               {:.4} -> {:.4} (delta {:+.4})",
                o.base.rr_final, o.extended.rr_final, o.delta_rr
            );
            println!("written to {}", dir.join(format!("extend_{max_steps}")).display());
        }
    }
    Ok(ExitCode::SUCCESS)
}
