//! Chat-completion backed agent.
//!
//! Each call sends the whole conversation: the system prompt, then the
//! observations as `user` messages alternating with the agent's earlier
//! actions as `assistant` messages, ending with the current observation.
//! The assistant's reply text is used verbatim as the action.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Agent, AgentError, History, Reply};
use crate::driver::StepFlag;

pub const ENV_API_BASE: &str = "AGENTQUEST_API_BASE";
pub const ENV_API_KEY: &str = "AGENTQUEST_API_KEY";

/// Action emitted when the endpoint stays unavailable after all retries.
pub const ABORT_SENTINEL: &str = "<no response from chat completion endpoint>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlmConfig {
    /// Full URL the requests are POSTed to.
    pub endpoint: String,
    pub model: String,
    pub system_prompt: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub initial_backoff: Duration,
    pub max_backoff: Duration,
}

impl LlmConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, system_prompt: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            system_prompt: system_prompt.into(),
            api_key: None,
            timeout: Duration::from_secs(60),
            max_retries: 3,
            initial_backoff: Duration::from_millis(500),
            max_backoff: Duration::from_secs(8),
        }
    }

    /// Reads the base URL and key from `AGENTQUEST_API_BASE` and
    /// `AGENTQUEST_API_KEY`; requests go to `<base>/chat/completions`.
    pub fn from_env(model: impl Into<String>, system_prompt: impl Into<String>) -> Result<Self, AgentError> {
        let base = std::env::var(ENV_API_BASE).map_err(|_| AgentError::MissingEnv(ENV_API_BASE))?;
        let mut config = Self::new(chat_url(&base), model, system_prompt);
        config.api_key = std::env::var(ENV_API_KEY).ok().filter(|k| !k.is_empty());
        Ok(config)
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let factor = 2u32.saturating_pow(attempt);
        self.initial_backoff.saturating_mul(factor).min(self.max_backoff)
    }
}

/// `<base>/chat/completions`, tolerating a trailing slash.
pub fn chat_url(base: &str) -> String {
    format!("{}/chat/completions", base.trim_end_matches('/'))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    fn new(role: &str, content: &str) -> Self {
        Self {
            role: role.into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
}

/// Role-tagged message list for one call; `observation` replaces the most
/// recent observation from the history.
pub fn build_messages(system_prompt: &str, observation: &str, history: &History) -> Vec<ChatMessage> {
    let mut messages = vec![ChatMessage::new("system", system_prompt)];
    let mut shown = history.initial.as_str();
    for turn in &history.turns {
        messages.push(ChatMessage::new("user", shown));
        messages.push(ChatMessage::new("assistant", &turn.action));
        shown = &turn.observation;
    }
    messages.push(ChatMessage::new("user", observation));
    messages
}

#[derive(Debug)]
enum CallError {
    Transport(reqwest::Error),
    Status(u16),
    Malformed,
}

impl std::fmt::Display for CallError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CallError::Transport(e) => write!(f, "transport error: {e}"),
            CallError::Status(s) => write!(f, "HTTP status {s}"),
            CallError::Malformed => f.write_str("response lacks choices[0].message.content"),
        }
    }
}

pub struct HttpLlmAgent {
    config: LlmConfig,
    client: reqwest::blocking::Client,
}

impl HttpLlmAgent {
    pub fn new(config: LlmConfig) -> Result<Self, AgentError> {
        let client = reqwest::blocking::Client::builder().timeout(config.timeout).build()?;
        Ok(Self { config, client })
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    fn call(&self, request: &ChatRequest) -> Result<String, CallError> {
        let mut builder = self.client.post(&self.config.endpoint).json(request);
        if let Some(key) = &self.config.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(CallError::Transport)?;
        let status = response.status();
        if !status.is_success() {
            return Err(CallError::Status(status.as_u16()));
        }
        let body: Value = response.json().map_err(CallError::Transport)?;
        body.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or(CallError::Malformed)
    }

    /// Sends one request with bounded exponential backoff.
    pub fn complete(&self, request: &ChatRequest) -> Option<String> {
        for attempt in 0..=self.config.max_retries {
            match self.call(request) {
                Ok(text) => return Some(text),
                Err(e) => {
                    log::warn!(
                        "chat completion attempt {}/{} failed: {e}",
                        attempt + 1,
                        self.config.max_retries + 1
                    );
                    if attempt < self.config.max_retries {
                        std::thread::sleep(self.config.backoff(attempt));
                    }
                }
            }
        }
        None
    }
}

impl Agent for HttpLlmAgent {
    fn next_action(&mut self, observation: &str, history: &History) -> Reply {
        let request = ChatRequest {
            model: self.config.model.clone(),
            messages: build_messages(&self.config.system_prompt, observation, history),
        };
        match self.complete(&request) {
            Some(text) => text.into(),
            None => Reply::flagged(ABORT_SENTINEL, StepFlag::Aborted),
        }
    }
}
