use super::{Agent, AgentError, History, Reply};
use crate::driver::StepFlag;

pub const DEFAULT_RETRY_BUDGET: usize = 5;

/// Actions already emitted through a [`MemoryDedup`] wrapper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryBuffer {
    past_actions: Vec<String>,
    retry_budget: usize,
}

impl MemoryBuffer {
    pub fn new(retry_budget: usize) -> Result<Self, AgentError> {
        if retry_budget == 0 {
            return Err(AgentError::InvalidParameter("retry budget must be at least 1".into()));
        }
        Ok(Self {
            past_actions: Vec::new(),
            retry_budget,
        })
    }

    pub fn past_actions(&self) -> &[String] {
        &self.past_actions
    }

    pub fn retry_budget(&self) -> usize {
        self.retry_budget
    }

    pub fn contains(&self, action: &str) -> bool {
        self.past_actions.iter().any(|a| a == action)
    }
}

impl Default for MemoryBuffer {
    fn default() -> Self {
        Self {
            past_actions: Vec::new(),
            retry_budget: DEFAULT_RETRY_BUDGET,
        }
    }
}

/// Prompt suffix used when re-asking the inner agent.
pub fn retry_prompt(observation: &str, duplicate: &str) -> String {
    format!("{observation}\n\nYou already tried {duplicate}; provide a new action.")
}

/// Re-prompts the inner agent whenever it proposes an action that exactly
/// matches one it already emitted.
///
/// After `retry_budget` re-prompts the last proposal goes through and the
/// step is flagged [`StepFlag::RepeatedForced`].
pub struct MemoryDedup<A> {
    inner: A,
    buffer: MemoryBuffer,
}

impl<A: Agent> MemoryDedup<A> {
    pub fn new(inner: A, buffer: MemoryBuffer) -> Self {
        Self { inner, buffer }
    }

    pub fn buffer(&self) -> &MemoryBuffer {
        &self.buffer
    }
}

impl<A: Agent> Agent for MemoryDedup<A> {
    fn next_action(&mut self, observation: &str, history: &History) -> Reply {
        let mut reply = self.inner.next_action(observation, history);
        for _ in 0..self.buffer.retry_budget {
            if !self.buffer.contains(&reply.action) || reply.flag == Some(StepFlag::Aborted) {
                break;
            }
            let prompt = retry_prompt(observation, &reply.action);
            reply = self.inner.next_action(&prompt, history);
        }
        if self.buffer.contains(&reply.action) {
            if reply.flag.is_none() {
                reply.flag = Some(StepFlag::RepeatedForced);
            }
        } else {
            self.buffer.past_actions.push(reply.action.clone());
        }
        reply
    }
}
