//! Numeric Mastermind: guess a digit code, get exact/misplaced counts back.

use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::EnvError;
use crate::driver::{Action, Driver, DriverError, EnvState, Lifecycle, Observation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MastermindConfig {
    pub code_length: usize,
    /// Allowed digits, e.g. `"0123456789"`.
    pub alphabet: String,
    /// Whether drawn secret codes may repeat a digit.
    pub allow_repeats: bool,
}

impl Default for MastermindConfig {
    fn default() -> Self {
        Self {
            code_length: 4,
            alphabet: "0123456789".into(),
            allow_repeats: true,
        }
    }
}

impl MastermindConfig {
    /// Config over the first `size` digits (`0..size`).
    pub fn with_digits(code_length: usize, size: usize) -> Self {
        Self {
            code_length,
            alphabet: ('0'..='9').take(size).collect(),
            allow_repeats: true,
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if self.code_length == 0 {
            return Err(EnvError::InvalidConfig("code length must be positive".into()));
        }
        if self.alphabet.is_empty() || !self.alphabet.chars().all(|c| c.is_ascii_digit()) {
            return Err(EnvError::InvalidConfig(format!(
                "alphabet {:?} must be a non-empty set of digits",
                self.alphabet
            )));
        }
        let mut seen = [false; 10];
        for b in self.alphabet.bytes() {
            let d = (b - b'0') as usize;
            if seen[d] {
                return Err(EnvError::InvalidConfig(format!(
                    "alphabet {:?} repeats a digit",
                    self.alphabet
                )));
            }
            seen[d] = true;
        }
        if !self.allow_repeats && self.code_length > self.alphabet.len() {
            return Err(EnvError::InvalidConfig(
                "code longer than alphabet requires repeats".into(),
            ));
        }
        Ok(())
    }

    /// Alphabet digits in ascending order.
    pub fn sorted_alphabet(&self) -> Vec<u8> {
        let mut digits: Vec<u8> = self.alphabet.bytes().collect();
        digits.sort_unstable();
        digits
    }

    pub fn validate_code(&self, code: &str) -> Result<(), EnvError> {
        if code.len() != self.code_length || !code.bytes().all(|b| self.alphabet.as_bytes().contains(&b)) {
            return Err(EnvError::InvalidTruth(format!(
                "{code:?} is not a {}-digit code over {:?}",
                self.code_length, self.alphabet
            )));
        }
        Ok(())
    }

    /// Draws a secret code uniformly from the configured space.
    pub fn draw_truth<R: Rng>(&self, rng: &mut R) -> String {
        let digits = self.sorted_alphabet();
        if self.allow_repeats {
            (0..self.code_length)
                .map(|_| digits[rng.random_range(0..digits.len())] as char)
                .collect()
        } else {
            let mut pool = digits;
            pool.shuffle(rng);
            pool[..self.code_length].iter().map(|&b| b as char).collect()
        }
    }

    pub fn truth_from_seed(&self, seed: u64) -> String {
        self.draw_truth(&mut ChaCha8Rng::seed_from_u64(seed))
    }
}

/// Response to one guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Feedback {
    /// Right digit, right position.
    pub exact: usize,
    /// Right digit, wrong position.
    pub misplaced: usize,
}

/// Scores `guess` against `truth` with the multiset rule.
pub fn feedback(guess: &str, truth: &str) -> Result<Feedback, EnvError> {
    if guess.len() != truth.len() {
        return Err(EnvError::LengthMismatch {
            guess: guess.len(),
            truth: truth.len(),
        });
    }
    let exact = guess.bytes().zip(truth.bytes()).filter(|(g, t)| g == t).count();
    let digits_only = guess.bytes().chain(truth.bytes()).all(|b| b.is_ascii_digit());
    let common = if digits_only {
        let mut counts = [[0usize; 10]; 2];
        for (g, t) in guess.bytes().zip(truth.bytes()) {
            counts[0][(g - b'0') as usize] += 1;
            counts[1][(t - b'0') as usize] += 1;
        }
        (0..10).map(|d| counts[0][d].min(counts[1][d])).sum()
    } else {
        let mut remaining: Vec<u8> = truth.bytes().collect();
        guess
            .bytes()
            .filter(|g| match remaining.iter().position(|t| t == g) {
                Some(i) => {
                    remaining.swap_remove(i);
                    true
                }
                None => false,
            })
            .count()
    };
    Ok(Feedback {
        exact,
        misplaced: common - exact,
    })
}

/// First maximal run of ASCII digits whose length is exactly `code_length`.
pub fn parse_guess(text: &str, code_length: usize) -> Option<String> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i - start == code_length {
                return Some(text[start..i].to_string());
            }
        } else {
            i += 1;
        }
    }
    None
}

pub fn start_message(code_length: usize) -> String {
    format!("Start guessing the {code_length} digits code.")
}

pub fn feedback_message(fb: Feedback) -> String {
    format!(
        "Your guess has {} correct numbers in the wrong position and {} correct numbers in the correct position. Keep guessing...",
        fb.misplaced, fb.exact
    )
}

pub fn success_message(code: &str) -> String {
    format!("Congratulations! {code} is the secret code.")
}

pub fn parse_failure_message(code_length: usize) -> String {
    format!("Provide a {code_length} digit code.")
}

fn alphabet_message(alphabet: &str) -> String {
    format!("Use only the digits {alphabet}.")
}

/// Reads `(misplaced, exact)` back out of a feedback observation.
pub fn parse_feedback_message(text: &str) -> Option<Feedback> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r"has (\d+) correct numbers in the wrong position and (\d+) correct numbers in the correct position")
            .expect("valid regex")
    });
    let caps = re.captures(text)?;
    Some(Feedback {
        misplaced: caps[1].parse().ok()?,
        exact: caps[2].parse().ok()?,
    })
}

#[derive(Debug, Clone)]
pub struct MastermindDriver {
    config: MastermindConfig,
    truth: String,
    last_guess: String,
    lifecycle: Lifecycle,
}

impl MastermindDriver {
    pub fn new(config: MastermindConfig, truth: impl Into<String>) -> Result<Self, EnvError> {
        config.validate()?;
        let truth = truth.into();
        config.validate_code(&truth)?;
        Ok(Self {
            config,
            truth,
            last_guess: String::new(),
            lifecycle: Lifecycle::default(),
        })
    }

    pub fn from_seed(config: MastermindConfig, seed: u64) -> Result<Self, EnvError> {
        config.validate()?;
        let truth = config.truth_from_seed(seed);
        Self::new(config, truth)
    }

    pub fn truth(&self) -> &str {
        &self.truth
    }

    pub fn config(&self) -> &MastermindConfig {
        &self.config
    }
}

impl Driver for MastermindDriver {
    fn reset(&mut self) -> Result<Observation, DriverError> {
        self.lifecycle.begin()?;
        self.last_guess.clear();
        Ok(Observation::pending(start_message(self.config.code_length)))
    }

    fn step(&mut self, action: &Action) -> Result<Observation, DriverError> {
        self.lifecycle.check_step()?;
        let Some(guess) = parse_guess(&action.action_value, self.config.code_length) else {
            return Ok(Observation::pending(parse_failure_message(self.config.code_length)));
        };
        if self.config.validate_code(&guess).is_err() {
            return Ok(Observation::pending(alphabet_message(&self.config.alphabet)));
        }
        let fb = feedback(&guess, &self.truth).expect("parser guarantees code length");
        self.last_guess = guess;
        let obs = if fb.exact == self.config.code_length {
            Observation::new(success_message(&self.truth), true)
        } else {
            Observation::pending(feedback_message(fb))
        };
        Ok(self.lifecycle.observe(obs))
    }

    fn state(&self) -> EnvState {
        EnvState::Mastermind(self.last_guess.clone())
    }
}
