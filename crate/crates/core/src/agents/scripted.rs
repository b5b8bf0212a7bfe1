use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Agent, AgentError, History, Reply};
use crate::driver::StepFlag;
use crate::envs::mastermind::{feedback, parse_feedback_message, parse_guess, MastermindConfig};
use crate::envs::sudoku::{SudokuInstance, CELLS, SIDE};

/// Replays a fixed list of actions, then keeps repeating the last one.
#[derive(Debug, Clone)]
pub struct ScriptedAgent {
    actions: Vec<String>,
    next: usize,
}

impl ScriptedAgent {
    pub fn new<S: Into<String>>(actions: impl IntoIterator<Item = S>) -> Self {
        Self {
            actions: actions.into_iter().map(Into::into).collect(),
            next: 0,
        }
    }
}

impl Agent for ScriptedAgent {
    fn next_action(&mut self, _observation: &str, _history: &History) -> Reply {
        let idx = self.next.min(self.actions.len().saturating_sub(1));
        self.next += 1;
        self.actions.get(idx).cloned().unwrap_or_default().into()
    }
}

/// What a syntactically valid action looks like.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionGrammar {
    Mastermind {
        alphabet: Vec<u8>,
        code_length: usize,
    },
    /// `row col value`, each in 1..=9.
    Sudoku,
}

impl ActionGrammar {
    pub fn mastermind(config: &MastermindConfig) -> Self {
        ActionGrammar::Mastermind {
            alphabet: config.sorted_alphabet(),
            code_length: config.code_length,
        }
    }
}

/// Uniformly random valid actions from a seeded stream.
#[derive(Debug, Clone)]
pub struct RandomAgent {
    grammar: ActionGrammar,
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new(grammar: ActionGrammar, seed: u64) -> Self {
        Self {
            grammar,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Agent for RandomAgent {
    fn next_action(&mut self, _observation: &str, _history: &History) -> Reply {
        match &self.grammar {
            ActionGrammar::Mastermind { alphabet, code_length } => (0..*code_length)
                .map(|_| alphabet[self.rng.random_range(0..alphabet.len())] as char)
                .collect::<String>()
                .into(),
            ActionGrammar::Sudoku => {
                let mut draw = || self.rng.random_range(1..=9u8);
                format!("{} {} {}", draw(), draw(), draw()).into()
            }
        }
    }
}

/// Emitted when no code is consistent with the feedback seen so far.
pub const NO_CANDIDATE_ACTION: &str = "no consistent code remains";

/// Mastermind solver that always plays the smallest code consistent with
/// every (guess, feedback) pair in the history.
#[derive(Debug, Clone)]
pub struct ConsistentMastermindAgent {
    code_length: usize,
    candidates: Vec<String>,
    processed: usize,
    emitted: HashSet<String>,
}

impl ConsistentMastermindAgent {
    pub fn new(config: &MastermindConfig) -> Result<Self, AgentError> {
        config
            .validate()
            .map_err(|e| AgentError::InvalidParameter(e.to_string()))?;
        let digits = config.sorted_alphabet();
        let mut codes = vec![String::new()];
        for _ in 0..config.code_length {
            codes = codes
                .into_iter()
                .flat_map(|prefix| {
                    digits
                        .iter()
                        .filter(|d| config.allow_repeats || !prefix.as_bytes().contains(d))
                        .map(|&d| format!("{prefix}{}", d as char))
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        Ok(Self {
            code_length: config.code_length,
            candidates: codes,
            processed: 0,
            emitted: HashSet::new(),
        })
    }

    /// Remaining consistent codes, in ascending order.
    pub fn candidates(&self) -> &[String] {
        &self.candidates
    }

    fn absorb(&mut self, history: &History) {
        for turn in history.turns.iter().skip(self.processed) {
            let guess = parse_guess(&turn.action, self.code_length);
            let fb = parse_feedback_message(&turn.observation);
            if let (Some(guess), Some(fb)) = (guess, fb) {
                self.candidates.retain(|c| feedback(&guess, c).is_ok_and(|f| f == fb));
            }
        }
        self.processed = history.turns.len();
    }
}

impl Agent for ConsistentMastermindAgent {
    fn next_action(&mut self, _observation: &str, history: &History) -> Reply {
        self.absorb(history);
        match self.candidates.iter().find(|c| !self.emitted.contains(*c)) {
            Some(code) => {
                self.emitted.insert(code.clone());
                code.clone().into()
            }
            None => Reply::flagged(NO_CANDIDATE_ACTION, StepFlag::AgentFailure),
        }
    }
}

/// White-box Sudoku player: fills the empty cells in row-major order.
#[derive(Debug, Clone)]
pub struct SudokuOracleAgent {
    placements: Vec<String>,
    next: usize,
}

impl SudokuOracleAgent {
    pub fn new(instance: &SudokuInstance) -> Self {
        let placements = (0..CELLS)
            .filter(|&idx| instance.givens.cells()[idx] == 0)
            .map(|idx| {
                format!(
                    "{} {} {}",
                    idx / SIDE + 1,
                    idx % SIDE + 1,
                    instance.solution.cells()[idx]
                )
            })
            .collect();
        Self { placements, next: 0 }
    }
}

impl Agent for SudokuOracleAgent {
    fn next_action(&mut self, _observation: &str, _history: &History) -> Reply {
        let idx = self.next.min(self.placements.len().saturating_sub(1));
        self.next += 1;
        self.placements
            .get(idx)
            .cloned()
            .unwrap_or_else(|| "1 1 1".into())
            .into()
    }
}

/// Repeats its previous action, delegating to `inner` only on calls
/// 1, 1 + period, 1 + 2 * period, ...
pub struct StutterAgent<A> {
    inner: A,
    period: usize,
    calls: usize,
    last: Option<String>,
}

impl<A: Agent> StutterAgent<A> {
    pub fn new(inner: A, period: usize) -> Result<Self, AgentError> {
        if period < 2 {
            return Err(AgentError::InvalidParameter(format!(
                "stutter period must be at least 2, got {period}"
            )));
        }
        Ok(Self {
            inner,
            period,
            calls: 0,
            last: None,
        })
    }
}

impl<A: Agent> Agent for StutterAgent<A> {
    fn next_action(&mut self, observation: &str, history: &History) -> Reply {
        let call = self.calls;
        self.calls += 1;
        match &self.last {
            Some(last) if !call.is_multiple_of(self.period) => last.clone().into(),
            _ => {
                let reply = self.inner.next_action(observation, history);
                self.last = Some(reply.action.clone());
                reply
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{Driver, EnvState};
    use crate::envs::mastermind::MastermindDriver;
    use crate::metrics::{get_repetitions, SimilarityParams};

    /// Plays `agent` against `driver` until done or `max_steps`.
    fn play(driver: &mut dyn Driver, agent: &mut dyn Agent, max_steps: usize) -> (Vec<String>, bool) {
        let mut history = History::new(driver.reset().unwrap().output);
        let mut actions = Vec::new();
        for _ in 0..max_steps {
            let reply = agent.next_action(history.latest(), &history);
            let obs = driver.step(&reply.action.as_str().into()).unwrap();
            actions.push(reply.action.clone());
            history.push(reply.action, obs.output);
            if obs.done {
                return (actions, true);
            }
        }
        (actions, false)
    }

    #[test]
    fn scripted_replays_then_holds() {
        let mut a = ScriptedAgent::new(["1", "2"]);
        let h = History::default();
        let out: Vec<String> = (0..4).map(|_| a.next_action("", &h).action).collect();
        assert_eq!(out, ["1", "2", "2", "2"]);
    }

    #[test]
    fn random_is_seeded() {
        let g = ActionGrammar::mastermind(&MastermindConfig::default());
        let h = History::default();
        let mut a = RandomAgent::new(g.clone(), 3);
        let mut b = RandomAgent::new(g, 3);
        let xs: Vec<String> = (0..20).map(|_| a.next_action("", &h).action).collect();
        let ys: Vec<String> = (0..20).map(|_| b.next_action("", &h).action).collect();
        assert_eq!(xs, ys);
        assert!(xs.iter().all(|x| x.len() == 4 && x.bytes().all(|b| b.is_ascii_digit())));

        let mut s = RandomAgent::new(ActionGrammar::Sudoku, 1);
        let p = s.next_action("", &h).action;
        assert!(crate::envs::sudoku::parse_placement(&p).is_ok());
    }

    #[test]
    fn random_pigeonhole_repeats() {
        let cfg = MastermindConfig::with_digits(2, 2);
        let mut a = RandomAgent::new(ActionGrammar::mastermind(&cfg), 0);
        let h = History::default();
        let xs: Vec<String> = (0..60).map(|_| a.next_action("", &h).action).collect();
        assert!(get_repetitions(&xs, SimilarityParams::<f64>::default()) >= 56);
    }

    #[test]
    fn random_repeats_on_default_mastermind() {
        // 60 uniform draws from 10^4 codes collide with probability ~0.16;
        // 10 of seeds 0..64 do, the first being seed 4.
        let draws = |seed| {
            let mut a = RandomAgent::new(ActionGrammar::mastermind(&MastermindConfig::default()), seed);
            (0..60)
                .map(|_| a.next_action("", &History::default()).action)
                .collect::<Vec<_>>()
        };
        let params = SimilarityParams::<f64>::default();
        assert_eq!(get_repetitions(&draws(4), params), 1);
        let colliding = (0..64).filter(|&s| get_repetitions(&draws(s), params) > 0).count();
        assert_eq!(colliding, 10);
    }

    #[test]
    fn consistent_agent_solves_and_stays_sound() {
        let cfg = MastermindConfig::default();
        let truth = "5618";
        let mut driver = MastermindDriver::new(cfg.clone(), truth).unwrap();
        let mut agent = ConsistentMastermindAgent::new(&cfg).unwrap();
        let mut history = History::new(driver.reset().unwrap().output);
        let mut sizes = vec![agent.candidates().len()];
        let mut solved = false;
        for _ in 0..60 {
            let reply = agent.next_action(history.latest(), &history);
            assert!(reply.flag.is_none());
            let obs = driver.step(&reply.action.as_str().into()).unwrap();
            history.push(reply.action, obs.output.clone());
            if obs.done {
                solved = true;
                break;
            }
            agent.absorb(&history);
            assert!(agent.candidates().iter().any(|c| c == truth));
            sizes.push(agent.candidates().len());
        }
        assert!(solved);
        assert!(sizes.windows(2).all(|w| w[1] < w[0]), "{sizes:?}");
        let (actions, _) = {
            let mut d = MastermindDriver::new(cfg.clone(), truth).unwrap();
            play(&mut d, &mut ConsistentMastermindAgent::new(&cfg).unwrap(), 60)
        };
        assert_eq!(get_repetitions(&actions, SimilarityParams::<f64>::default()), 0);
    }

    #[test]
    fn consistent_agent_flags_contradictions() {
        let cfg = MastermindConfig::with_digits(2, 2);
        let mut agent = ConsistentMastermindAgent::new(&cfg).unwrap();
        let mut h = History::new("start");
        // "00" with 0 exact and 0 misplaced rules out 0; "11" likewise rules out 1.
        h.push("00", "Your guess has 0 correct numbers in the wrong position and 0 correct numbers in the correct position. Keep guessing...");
        h.push("11", "Your guess has 0 correct numbers in the wrong position and 0 correct numbers in the correct position. Keep guessing...");
        let reply = agent.next_action(h.latest(), &h);
        assert_eq!(reply.action, NO_CANDIDATE_ACTION);
        assert_eq!(reply.flag, Some(StepFlag::AgentFailure));
    }

    #[test]
    fn consistent_agent_without_repeats() {
        let cfg = MastermindConfig {
            allow_repeats: false,
            ..MastermindConfig::with_digits(3, 4)
        };
        let agent = ConsistentMastermindAgent::new(&cfg).unwrap();
        assert_eq!(agent.candidates().len(), 24);
        assert_eq!(agent.candidates()[0], "012");
    }

    #[test]
    fn sudoku_oracle_fills_in_order() {
        let inst = crate::envs::sudoku::generate(8, 3).unwrap();
        assert_eq!(inst.empty_count(), 3);
        let milestones = crate::metrics::MilestoneSet::sudoku(&inst);
        let mut d = crate::envs::sudoku::SudokuDriver::new(inst.clone());
        let mut agent = SudokuOracleAgent::new(&inst);
        let mut h = History::new(d.reset().unwrap().output);
        let mut pr = vec![];
        loop {
            let reply = agent.next_action(h.latest(), &h);
            let obs = d.step(&reply.action.as_str().into()).unwrap();
            pr.push(milestones.progress(&d.state()).unwrap());
            h.push(reply.action, obs.output);
            if obs.done {
                break;
            }
        }
        assert_eq!(pr, [1, 2, 3]);
        assert!(matches!(d.state(), EnvState::Sudoku(g) if g == inst.solution));
    }

    #[test]
    fn stutter_schedule() {
        let inner = ScriptedAgent::new((0..100).map(|i| format!("a{i}")));
        let mut s = StutterAgent::new(inner, 3).unwrap();
        let h = History::default();
        let out: Vec<String> = (0..7).map(|_| s.next_action("", &h).action).collect();
        assert_eq!(out, ["a0", "a0", "a0", "a1", "a1", "a1", "a2"]);
        assert!(StutterAgent::new(ScriptedAgent::new(["x"]), 1).is_err());
    }

    #[test]
    fn stutter_repetition_counts() {
        let params = SimilarityParams::<f64>::default();
        let h = History::default();
        // period 2 over 60 steps: 30 novel emissions, 30 repeats.
        let mut s = StutterAgent::new(ScriptedAgent::new((0..100).map(|i| format!("a{i}"))), 2).unwrap();
        let xs: Vec<String> = (0..60).map(|_| s.next_action("", &h).action).collect();
        let reps = get_repetitions(&xs, params);
        assert_eq!(reps, 30);
        assert!((reps as f64 / 59.0 - 0.5).abs() <= 0.02);

        // Period beyond the horizon: one novel action, everything else repeats.
        let mut s = StutterAgent::new(ScriptedAgent::new((0..100).map(|i| format!("a{i}"))), 1000).unwrap();
        let xs: Vec<String> = (0..60).map(|_| s.next_action("", &h).action).collect();
        assert_eq!(get_repetitions(&xs, params), 59);
    }
}
