//! 9x9 Sudoku: instance generation, solution counting and the driver.

use std::fmt;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::EnvError;
use crate::driver::{Action, Driver, DriverError, EnvState, Lifecycle, Observation};

pub const SIDE: usize = 9;
pub const CELLS: usize = SIDE * SIDE;
pub const MAX_TARGET_EMPTY: usize = 64;

/// Row-major board, `0` marks an empty cell.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid([u8; CELLS]);

impl Default for Grid {
    fn default() -> Self {
        Grid([0; CELLS])
    }
}

fn box_of(idx: usize) -> usize {
    (idx / SIDE / 3) * 3 + (idx % SIDE) / 3
}

impl Grid {
    pub fn from_cells(cells: [u8; CELLS]) -> Result<Self, EnvError> {
        if let Some(v) = cells.iter().find(|&&v| v > 9) {
            return Err(EnvError::InvalidGrid(format!("cell value {v} out of range")));
        }
        Ok(Grid(cells))
    }

    /// Parses 81 characters, `1`-`9` for values and `.` or `0` for empty.
    pub fn parse(text: &str) -> Result<Self, EnvError> {
        let text = text.trim();
        if text.chars().count() != CELLS {
            return Err(EnvError::InvalidGrid(format!(
                "expected {CELLS} cells, found {}",
                text.chars().count()
            )));
        }
        let mut cells = [0u8; CELLS];
        for (slot, ch) in cells.iter_mut().zip(text.chars()) {
            *slot = match ch {
                '.' | '0' => 0,
                '1'..='9' => ch as u8 - b'0',
                other => return Err(EnvError::InvalidGrid(format!("unexpected character {other:?}"))),
            };
        }
        Ok(Grid(cells))
    }

    pub fn cells(&self) -> &[u8; CELLS] {
        &self.0
    }

    /// Zero-indexed access.
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.0[row * SIDE + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.0[row * SIDE + col] = value;
    }

    pub fn empty_count(&self) -> usize {
        self.0.iter().filter(|&&v| v == 0).count()
    }

    pub fn is_full(&self) -> bool {
        self.0.iter().all(|&v| v != 0)
    }

    /// No filled value repeats within a row, column or box.
    pub fn is_consistent(&self) -> bool {
        let mut rows = [0u16; SIDE];
        let mut cols = [0u16; SIDE];
        let mut boxes = [0u16; SIDE];
        for (idx, &v) in self.0.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let bit = 1u16 << v;
            let (r, c, b) = (idx / SIDE, idx % SIDE, box_of(idx));
            if rows[r] & bit != 0 || cols[c] & bit != 0 || boxes[b] & bit != 0 {
                return false;
            }
            rows[r] |= bit;
            cols[c] |= bit;
            boxes[b] |= bit;
        }
        true
    }

    pub fn is_solved(&self) -> bool {
        self.is_full() && self.is_consistent()
    }

    /// Human-readable board with `.` for empty cells and box separators.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in 0..SIDE {
            if r > 0 && r % 3 == 0 {
                out.push_str("------+-------+------\n");
            }
            for c in 0..SIDE {
                if c > 0 && c % 3 == 0 {
                    out.push_str("| ");
                }
                match self.get(r, c) {
                    0 => out.push('.'),
                    v => out.push((b'0' + v) as char),
                }
                if c + 1 < SIDE {
                    out.push(' ');
                }
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &v in &self.0 {
            let ch = if v == 0 { '.' } else { (b'0' + v) as char };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid({self})")
    }
}

struct Counter {
    cells: [u8; CELLS],
    rows: [u16; SIDE],
    cols: [u16; SIDE],
    boxes: [u16; SIDE],
}

const ALL_DIGITS: u16 = 0b11_1111_1110;

impl Counter {
    fn new(grid: &Grid) -> Option<Self> {
        let mut c = Counter {
            cells: grid.0,
            rows: [0; SIDE],
            cols: [0; SIDE],
            boxes: [0; SIDE],
        };
        for (idx, &v) in grid.0.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let bit = 1u16 << v;
            let (r, col, b) = (idx / SIDE, idx % SIDE, box_of(idx));
            if (c.rows[r] | c.cols[col] | c.boxes[b]) & bit != 0 {
                return None;
            }
            c.rows[r] |= bit;
            c.cols[col] |= bit;
            c.boxes[b] |= bit;
        }
        Some(c)
    }

    fn candidates(&self, idx: usize) -> u16 {
        ALL_DIGITS & !(self.rows[idx / SIDE] | self.cols[idx % SIDE] | self.boxes[box_of(idx)])
    }

    fn place(&mut self, idx: usize, v: u8) {
        let bit = 1u16 << v;
        self.cells[idx] = v;
        self.rows[idx / SIDE] |= bit;
        self.cols[idx % SIDE] |= bit;
        self.boxes[box_of(idx)] |= bit;
    }

    fn unplace(&mut self, idx: usize, v: u8) {
        let bit = !(1u16 << v);
        self.cells[idx] = 0;
        self.rows[idx / SIDE] &= bit;
        self.cols[idx % SIDE] &= bit;
        self.boxes[box_of(idx)] &= bit;
    }

    /// Empty cell with the fewest candidates, or `None` when full.
    fn most_constrained(&self) -> Option<(usize, u16)> {
        let mut best: Option<(usize, u16)> = None;
        for idx in 0..CELLS {
            if self.cells[idx] != 0 {
                continue;
            }
            let cand = self.candidates(idx);
            let n = cand.count_ones();
            if best.is_none_or(|(_, b)| n < b.count_ones()) {
                best = Some((idx, cand));
                if n <= 1 {
                    break;
                }
            }
        }
        best
    }

    fn count(&mut self, cap: usize, found: &mut usize) {
        let Some((idx, cand)) = self.most_constrained() else {
            *found += 1;
            return;
        };
        for v in 1..=9u8 {
            if cand & (1 << v) == 0 {
                continue;
            }
            self.place(idx, v);
            self.count(cap, found);
            self.unplace(idx, v);
            if *found >= cap {
                return;
            }
        }
    }

    fn fill_random(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let Some(idx) = (0..CELLS).find(|&i| self.cells[i] == 0) else {
            return true;
        };
        let cand = self.candidates(idx);
        let mut digits: Vec<u8> = (1..=9).filter(|v| cand & (1 << v) != 0).collect();
        digits.shuffle(rng);
        for v in digits {
            self.place(idx, v);
            if self.fill_random(rng) {
                return true;
            }
            self.unplace(idx, v);
        }
        false
    }
}

/// Number of valid completions of `grid`, stopping once `cap` is reached.
///
/// A grid whose filled cells already conflict has zero completions.
pub fn count_solutions(grid: &Grid, cap: usize) -> usize {
    if cap == 0 {
        return 0;
    }
    let Some(mut counter) = Counter::new(grid) else {
        return 0;
    };
    let mut found = 0;
    counter.count(cap, &mut found);
    found
}

/// Puzzle plus its unique completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SudokuInstance {
    pub givens: Grid,
    pub solution: Grid,
}

impl SudokuInstance {
    pub fn empty_count(&self) -> usize {
        self.givens.empty_count()
    }

    pub fn is_given(&self, row: usize, col: usize) -> bool {
        self.givens.get(row, col) != 0
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if !self.solution.is_solved() {
            return Err(EnvError::InvalidInstance(
                "solution is not a valid completed grid".into(),
            ));
        }
        let agrees = self
            .givens
            .cells()
            .iter()
            .zip(self.solution.cells())
            .all(|(&g, &s)| g == 0 || g == s);
        if !agrees {
            return Err(EnvError::InvalidInstance("solution disagrees with a given".into()));
        }
        if count_solutions(&self.givens, 2) != 1 {
            return Err(EnvError::InvalidInstance(
                "givens do not admit a unique completion".into(),
            ));
        }
        Ok(())
    }

    /// `"<givens> <solution>"`, 81 characters each.
    pub fn to_line(&self) -> String {
        format!("{} {}", self.givens, self.solution)
    }

    pub fn from_line(line: &str) -> Result<Self, EnvError> {
        let mut parts = line.split_whitespace();
        let (Some(g), Some(s), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(EnvError::InvalidInstance(format!(
                "expected \"givens solution\", got {line:?}"
            )));
        };
        Ok(Self {
            givens: Grid::parse(g)?,
            solution: Grid::parse(s)?,
        })
    }
}

/// Parses a fixture file: one `givens solution` pair per non-blank line.
/// Lines starting with `#` are comments.
pub fn parse_fixtures(text: &str) -> Result<Vec<SudokuInstance>, EnvError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(SudokuInstance::from_line)
        .collect()
}

/// Bundled fixture instances.
pub fn bundled_fixtures() -> Vec<SudokuInstance> {
    parse_fixtures(include_str!("../../fixtures/sudoku.txt")).expect("bundled fixtures parse")
}

/// Seeded puzzle generator.
///
/// Builds a random full grid, then clears cells in a seeded order, skipping
/// any removal that would admit a second completion. Stops at
/// `target_empty` removals or when the order is exhausted.
pub fn generate(seed: u64, target_empty: usize) -> Result<SudokuInstance, EnvError> {
    if target_empty > MAX_TARGET_EMPTY {
        return Err(EnvError::InvalidConfig(format!(
            "target_empty {target_empty} exceeds {MAX_TARGET_EMPTY}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counter = Counter::new(&Grid::default()).expect("empty grid is consistent");
    let filled = counter.fill_random(&mut rng);
    debug_assert!(filled);
    let solution = Grid(counter.cells);

    let mut order: Vec<usize> = (0..CELLS).collect();
    order.shuffle(&mut rng);
    let mut givens = solution;
    let mut removed = 0;
    for idx in order {
        if removed == target_empty {
            break;
        }
        let value = givens.0[idx];
        givens.0[idx] = 0;
        if count_solutions(&givens, 2) == 1 {
            removed += 1;
        } else {
            givens.0[idx] = value;
        }
    }
    Ok(SudokuInstance { givens, solution })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SudokuConfig {
    /// Cells the generator tries to clear.
    pub target_empty: usize,
}

impl Default for SudokuConfig {
    fn default() -> Self {
        Self { target_empty: 40 }
    }
}

/// A parsed `row col value` placement, 1-indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub row: usize,
    pub col: usize,
    pub value: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlacementError {
    TooFewNumbers,
    OutOfRange,
}

/// Takes the first three integers in the text as row, column and value.
pub fn parse_placement(text: &str) -> Result<Placement, PlacementError> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"\d+").expect("valid regex"));
    let nums: Vec<&str> = re.find_iter(text).take(3).map(|m| m.as_str()).collect();
    if nums.len() < 3 {
        return Err(PlacementError::TooFewNumbers);
    }
    let parse = |s: &str| s.parse::<usize>().ok().filter(|n| (1..=9).contains(n));
    match (parse(nums[0]), parse(nums[1]), parse(nums[2])) {
        (Some(row), Some(col), Some(value)) => Ok(Placement {
            row,
            col,
            value: value as u8,
        }),
        _ => Err(PlacementError::OutOfRange),
    }
}

const FORMAT_HINT: &str =
    "Answer with \"row col value\", three integers between 1 and 9 (rows and columns are 1-indexed).";

#[derive(Debug, Clone)]
pub struct SudokuDriver {
    instance: SudokuInstance,
    grid: Grid,
    lifecycle: Lifecycle,
}

impl SudokuDriver {
    pub fn new(instance: SudokuInstance) -> Self {
        let grid = instance.givens;
        Self {
            instance,
            grid,
            lifecycle: Lifecycle::default(),
        }
    }

    pub fn instance(&self) -> &SudokuInstance {
        &self.instance
    }

    fn board_report(&self, headline: &str) -> String {
        format!(
            "{headline}\n{}Empty cells remaining: {}",
            self.grid.render(),
            self.grid.empty_count()
        )
    }

    fn finish(&mut self, headline: String) -> Observation {
        let obs = if self.grid.is_solved() {
            Observation::new(self.board_report("Puzzle solved!"), true)
        } else if self.grid.is_full() {
            Observation::pending(
                self.board_report("The grid is complete but invalid: some row, column or box repeats a digit."),
            )
        } else {
            Observation::pending(self.board_report(&headline))
        };
        self.lifecycle.observe(obs)
    }
}

impl Driver for SudokuDriver {
    fn reset(&mut self) -> Result<Observation, DriverError> {
        self.lifecycle.begin()?;
        self.grid = self.instance.givens;
        Ok(Observation::pending(self.board_report(&format!(
            "Fill every empty cell (.) so that each row, column and 3x3 box contains the digits 1-9 exactly once. {FORMAT_HINT}"
        ))))
    }

    fn step(&mut self, action: &Action) -> Result<Observation, DriverError> {
        self.lifecycle.check_step()?;
        let headline = match parse_placement(&action.action_value) {
            Err(PlacementError::TooFewNumbers) => format!("Could not read a placement. {FORMAT_HINT}"),
            Err(PlacementError::OutOfRange) => format!("Placement out of range. {FORMAT_HINT}"),
            Ok(p) if self.instance.is_given(p.row - 1, p.col - 1) => {
                format!("Cell ({},{}) is a fixed clue and cannot be changed.", p.row, p.col)
            }
            Ok(p) => {
                self.grid.set(p.row - 1, p.col - 1, p.value);
                format!("Placed {} at ({},{}).", p.value, p.row, p.col)
            }
        };
        Ok(self.finish(headline))
    }

    fn state(&self) -> EnvState {
        EnvState::Sudoku(self.grid)
    }
}
