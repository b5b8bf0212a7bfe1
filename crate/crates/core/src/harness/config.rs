use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agents::{
    ActionGrammar, Agent, ConsistentMastermindAgent, HttpLlmAgent, LlmConfig, MemoryBuffer, MemoryDedup, RandomAgent,
    StutterAgent, SudokuOracleAgent, DEFAULT_RETRY_BUDGET,
};
use crate::envs::mastermind::MastermindConfig;
use crate::envs::EnvSpec;
use crate::metrics::{Normalization, SimilarityParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Random,
    Consistent,
    Oracle,
    Stutter,
    Llm,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Random => "random",
            AgentKind::Consistent => "consistent",
            AgentKind::Oracle => "oracle",
            AgentKind::Stutter => "stutter",
            AgentKind::Llm => "llm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentSpec {
    pub kind: AgentKind,
    /// Wrap in the memory de-duplication layer.
    pub memory: bool,
    pub retry_budget: usize,
    pub stutter_period: usize,
    /// Agent the stutter wrapper delegates to.
    pub stutter_inner: AgentKind,
    pub llm_model: String,
    /// Overrides the per-benchmark default prompt.
    pub llm_system_prompt: Option<String>,
    /// Full chat-completions URL; falls back to `AGENTQUEST_API_BASE`.
    pub llm_endpoint: Option<String>,
    pub llm_max_retries: u32,
    pub llm_initial_backoff_ms: u64,
}

impl Default for AgentSpec {
    fn default() -> Self {
        Self {
            kind: AgentKind::Random,
            memory: false,
            retry_budget: DEFAULT_RETRY_BUDGET,
            stutter_period: 2,
            stutter_inner: AgentKind::Random,
            llm_model: "gpt-4".into(),
            llm_system_prompt: None,
            llm_endpoint: None,
            llm_max_retries: 3,
            llm_initial_backoff_ms: 500,
        }
    }
}

impl AgentSpec {
    pub fn new(kind: AgentKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    /// Short name recorded in trajectory headers, e.g. `memory(stutter(random))`.
    pub fn label(&self) -> String {
        let base = match self.kind {
            AgentKind::Stutter => format!("stutter{}({})", self.stutter_period, self.stutter_inner.as_str()),
            other => other.as_str().to_string(),
        };
        if self.memory {
            format!("memory({base})")
        } else {
            base
        }
    }
}

pub fn default_system_prompt(env: &EnvSpec) -> String {
    match env {
        EnvSpec::Mastermind(cfg) => format!(
            "You are playing Mastermind. Find the secret {n}-digit code made of the digits {alphabet}. \
             After each guess you are told how many digits are correct and in the correct position, and how \
             many are correct but in the wrong position. Reply with your next guess only, as {n} digits.",
            n = cfg.code_length,
            alphabet = cfg.alphabet
        ),
        EnvSpec::Sudoku(_) => "You are solving a 9x9 Sudoku. Reply with exactly one placement per message, \
                               written as \"row col value\" with 1-indexed row and column."
            .to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub env: EnvSpec,
    pub agent: AgentSpec,
    pub instances: usize,
    pub max_steps: usize,
    pub theta: f64,
    pub rr_normalization: Normalization,
    pub seed: u64,
    pub parallelism: usize,
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// 15 instances, 60 steps, theta 1, final-T normalization.
    pub fn new(env: EnvSpec, agent: AgentSpec, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            env,
            agent,
            instances: 15,
            max_steps: 60,
            theta: 1.0,
            rr_normalization: Normalization::FinalT,
            seed: 0,
            parallelism: 1,
            output_dir: output_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::InvalidConfig(msg));
        self.env.validate()?;
        if self.instances == 0 {
            return bad("instances must be at least 1".into());
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1".into());
        }
        SimilarityParams::new(self.theta)?;
        if self.agent.memory && self.agent.retry_budget == 0 {
            return bad("retry_budget must be at least 1".into());
        }
        if self.agent.kind == AgentKind::Stutter {
            if self.agent.stutter_period < 2 {
                return bad("stutter_period must be at least 2".into());
            }
            if self.agent.stutter_inner == AgentKind::Stutter {
                return bad("stutter agent cannot wrap another stutter agent".into());
            }
        }
        Ok(())
    }

    pub fn similarity(&self) -> SimilarityParams<f64> {
        SimilarityParams::new(self.theta).expect("validated theta")
    }

    /// Seed for instance `i`.
    pub fn instance_seed(&self, instance: u64) -> u64 {
        self.seed ^ instance
    }

    pub fn run_id(&self) -> String {
        format!("{}-{}-seed{}", self.env.benchmark(), self.agent.label(), self.seed)
    }
}

/// Agent RNG stream, kept apart from the stream that drew the instance.
fn agent_seed(instance_seed: u64) -> u64 {
    instance_seed.wrapping_add(0x9E37_79B9_7F4A_7C15)
}

fn mastermind_config(env: &EnvSpec, kind: AgentKind) -> Result<&MastermindConfig, HarnessError> {
    match env {
        EnvSpec::Mastermind(cfg) => Ok(cfg),
        _ => Err(HarnessError::IncompatibleAgent {
            agent: kind.as_str(),
            benchmark: env.benchmark(),
        }),
    }
}

fn build_kind(
    kind: AgentKind,
    spec: &AgentSpec,
    env: &EnvSpec,
    truth: &str,
    instance_seed: u64,
) -> Result<Box<dyn Agent>, HarnessError> {
    Ok(match kind {
        AgentKind::Random => {
            let grammar = match env {
                EnvSpec::Mastermind(cfg) => ActionGrammar::mastermind(cfg),
                EnvSpec::Sudoku(_) => ActionGrammar::Sudoku,
            };
            Box::new(RandomAgent::new(grammar, agent_seed(instance_seed)))
        }
        AgentKind::Consistent => Box::new(ConsistentMastermindAgent::new(mastermind_config(env, kind)?)?),
        AgentKind::Oracle => match env {
            EnvSpec::Sudoku(_) => Box::new(SudokuOracleAgent::new(&env.sudoku_instance(truth)?)),
            _ => {
                return Err(HarnessError::IncompatibleAgent {
                    agent: kind.as_str(),
                    benchmark: env.benchmark(),
                })
            }
        },
        AgentKind::Stutter => {
            let inner = build_kind(spec.stutter_inner, spec, env, truth, instance_seed)?;
            Box::new(StutterAgent::new(inner, spec.stutter_period)?)
        }
        AgentKind::Llm => {
            let prompt = spec
                .llm_system_prompt
                .clone()
                .unwrap_or_else(|| default_system_prompt(env));
            let mut config = match &spec.llm_endpoint {
                Some(url) => {
                    let mut c = LlmConfig::new(url.clone(), spec.llm_model.clone(), prompt);
                    c.api_key = std::env::var(crate::agents::ENV_API_KEY).ok().filter(|k| !k.is_empty());
                    c
                }
                None => LlmConfig::from_env(spec.llm_model.clone(), prompt)?,
            };
            config.max_retries = spec.llm_max_retries;
            config.initial_backoff = std::time::Duration::from_millis(spec.llm_initial_backoff_ms);
            Box::new(HttpLlmAgent::new(config)?)
        }
    })
}

/// Fresh agent for one instance.
pub fn build_agent(
    spec: &AgentSpec,
    env: &EnvSpec,
    truth: &str,
    instance_seed: u64,
) -> Result<Box<dyn Agent>, HarnessError> {
    let agent = build_kind(spec.kind, spec, env, truth, instance_seed)?;
    Ok(if spec.memory {
        Box::new(MemoryDedup::new(agent, MemoryBuffer::new(spec.retry_budget)?))
    } else {
        agent
    })
}
