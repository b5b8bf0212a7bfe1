//! Agents: scripted baselines, oracle solvers, the memory wrapper and the
//! chat-completion backed LLM agent.
//!
//! Every agent answers through the same text channel the environments read.
//! Solver agents parse observation text instead of peeking at hidden state,
//! except [`SudokuOracleAgent`], which is handed the solution.

mod llm;
mod memory;
mod scripted;

pub use llm::{
    build_messages, chat_url, ChatMessage, ChatRequest, HttpLlmAgent, LlmConfig, ABORT_SENTINEL, ENV_API_BASE,
    ENV_API_KEY,
};
pub use memory::{MemoryBuffer, MemoryDedup, DEFAULT_RETRY_BUDGET};
pub use scripted::{
    ActionGrammar, ConsistentMastermindAgent, RandomAgent, ScriptedAgent, StutterAgent, SudokuOracleAgent,
    NO_CANDIDATE_ACTION,
};

use thiserror::Error;

use crate::driver::StepFlag;

/// One past exchange: the action taken and the observation it produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    pub action: String,
    pub observation: String,
}

/// Everything an agent has seen in the current episode.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct History {
    /// Observation returned by `reset`.
    pub initial: String,
    pub turns: Vec<Turn>,
}

impl History {
    pub fn new(initial: impl Into<String>) -> Self {
        Self {
            initial: initial.into(),
            turns: Vec::new(),
        }
    }

    pub fn push(&mut self, action: impl Into<String>, observation: impl Into<String>) {
        self.turns.push(Turn {
            action: action.into(),
            observation: observation.into(),
        });
    }

    /// Most recent observation.
    pub fn latest(&self) -> &str {
        self.turns
            .last()
            .map_or(self.initial.as_str(), |t| t.observation.as_str())
    }
}

/// An agent's answer for one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub action: String,
    pub flag: Option<StepFlag>,
}

impl Reply {
    pub fn flagged(action: impl Into<String>, flag: StepFlag) -> Self {
        Self {
            action: action.into(),
            flag: Some(flag),
        }
    }
}

impl<S: Into<String>> From<S> for Reply {
    fn from(action: S) -> Self {
        Self {
            action: action.into(),
            flag: None,
        }
    }
}

/// Maps the latest observation (plus history) to a free-text action.
///
/// `observation` is normally `history.latest()`, but wrappers may pass an
/// augmented prompt instead.
pub trait Agent: Send {
    fn next_action(&mut self, observation: &str, history: &History) -> Reply;
}

impl<A: Agent + ?Sized> Agent for Box<A> {
    fn next_action(&mut self, observation: &str, history: &History) -> Reply {
        (**self).next_action(observation, history)
    }
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid agent parameter: {0}")]
    InvalidParameter(String),
    #[error("missing environment variable {0}")]
    MissingEnv(&'static str),
    #[error("http client: {0}")]
    Http(#[from] reqwest::Error),
}
