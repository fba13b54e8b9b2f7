//! Exhaustive outcome oracle for the global move dynamic.
//!
//! A position is a multiset of piles plus a bound `r` on the next removal.
//! Taking `s` stones from one pile leaves the bound `lambda * s`, with
//! `lambda = 2` for Fibonacci nim and `lambda = 1` for power-of-two nim.
//!
//! Raising the bound only adds options, so the P positions for a fixed pile
//! multiset form a down-set in the bound. The solver therefore memoizes one
//! number per multiset: the smallest take `s` that reaches a P position (the
//! *winning threshold*), or nothing when no take does. Then
//! `(piles; r)` is N exactly when the threshold exists and is `<= r`, and a
//! successor `(piles'; lambda * s)` is P exactly when its own threshold is
//! absent or exceeds `lambda * s`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::fib::ExtNat;

/// Memo size used when no budget is configured.
pub const DEFAULT_STATE_BUDGET: usize = 50_000_000;

/// Environment variable overriding the memo budget in the binaries.
pub const BUDGET_ENV: &str = "FIBNIM_STATE_BUDGET";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("state budget of {budget} memo entries exceeded")]
    BudgetExceeded { budget: usize },
    #[error("search cap {cap} is below the largest pile {max_pile}")]
    CapBelowMaxPile { cap: u64, max_pile: u64 },
    #[error("no legal move: the game is over")]
    GameOver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dynamic {
    /// Next bound is twice the previous take.
    Fibonacci,
    /// Next bound equals the previous take.
    PowerOfTwo,
}

impl Dynamic {
    pub fn multiplier(self) -> u64 {
        match self {
            Dynamic::Fibonacci => 2,
            Dynamic::PowerOfTwo => 1,
        }
    }

    pub fn from_multiplier(lambda: u64) -> Option<Self> {
        match lambda {
            2 => Some(Dynamic::Fibonacci),
            1 => Some(Dynamic::PowerOfTwo),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    /// The player to move wins.
    N,
    /// The player who just moved wins.
    P,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::N => "N",
            Outcome::P => "P",
        })
    }
}

/// Piles (kept sorted ascending) with the current move bound.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Position {
    piles: Vec<u64>,
    bound: ExtNat,
    dynamic: Dynamic,
}

/// Remove `take` stones from the pile at `pile` (an index into the sorted
/// pile list).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub pile: usize,
    pub take: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("pile index {index} out of range for {piles} piles")]
    NoSuchPile { index: usize, piles: usize },
    #[error("take must be at least 1")]
    ZeroTake,
    #[error("take {take} exceeds the limit {limit} (bound {bound}, pile {pile_size})")]
    TooMany {
        take: u64,
        limit: u64,
        bound: ExtNat,
        pile_size: u64,
    },
}

impl Position {
    pub fn new(mut piles: Vec<u64>, bound: ExtNat, dynamic: Dynamic) -> Self {
        piles.sort_unstable();
        Self {
            piles,
            bound,
            dynamic,
        }
    }

    pub fn fibonacci(piles: impl Into<Vec<u64>>, bound: impl Into<ExtNat>) -> Self {
        Self::new(piles.into(), bound.into(), Dynamic::Fibonacci)
    }

    pub fn power_of_two(piles: impl Into<Vec<u64>>, bound: impl Into<ExtNat>) -> Self {
        Self::new(piles.into(), bound.into(), Dynamic::PowerOfTwo)
    }

    /// One-pile game with the first move forbidden from emptying the pile.
    pub fn classic(n: u64) -> Self {
        Self::fibonacci(vec![n], n.saturating_sub(1))
    }

    pub fn piles(&self) -> &[u64] {
        &self.piles
    }

    pub fn bound(&self) -> ExtNat {
        self.bound
    }

    pub fn dynamic(&self) -> Dynamic {
        self.dynamic
    }

    pub fn max_pile(&self) -> u64 {
        self.piles.last().copied().unwrap_or(0)
    }

    /// Largest take allowed from any pile.
    pub fn effective_bound(&self) -> u64 {
        self.bound.clamp_to(self.max_pile())
    }

    /// Same option set with the bound clamped to the largest pile.
    pub fn canonical(&self) -> Position {
        Position {
            piles: self.piles.clone(),
            bound: ExtNat::Finite(self.effective_bound()),
            dynamic: self.dynamic,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.effective_bound() == 0
    }

    /// One move per distinct pile size: equal piles give identical successors.
    /// The move names the first pile of each size.
    pub fn legal_moves(&self) -> Vec<Move> {
        let cap = self.effective_bound();
        let mut moves = Vec::new();
        for (i, &size) in self.piles.iter().enumerate() {
            if i > 0 && self.piles[i - 1] == size {
                continue;
            }
            moves.extend((1..=cap.min(size)).map(|take| Move { pile: i, take }));
        }
        moves
    }

    pub fn check_move(&self, mv: Move) -> Result<(), MoveError> {
        let pile_size = *self.piles.get(mv.pile).ok_or(MoveError::NoSuchPile {
            index: mv.pile,
            piles: self.piles.len(),
        })?;
        if mv.take == 0 {
            return Err(MoveError::ZeroTake);
        }
        let limit = self.bound.clamp_to(pile_size);
        if mv.take > limit {
            return Err(MoveError::TooMany {
                take: mv.take,
                limit,
                bound: self.bound,
                pile_size,
            });
        }
        Ok(())
    }

    pub fn apply(&self, mv: Move) -> Result<Position, MoveError> {
        self.check_move(mv)?;
        let mut piles = self.piles.clone();
        piles[mv.pile] -= mv.take;
        Ok(Position::new(
            piles,
            ExtNat::Finite(self.dynamic.multiplier() * mv.take),
            self.dynamic,
        ))
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, p) in self.piles.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ";{})", self.bound)
    }
}

/// Smallest winning take, if any.
pub type Threshold = Option<u64>;

// Sorted nonzero piles.
type Key = SmallVec<[u64; 4]>;

fn key_of(piles: &[u64]) -> Key {
    piles.iter().copied().filter(|&p| p > 0).collect()
}

/// Successor key after removing `take` from the pile at `index` of a sorted key.
fn child_key(key: &Key, index: usize, take: u64) -> Key {
    let mut child = key.clone();
    let left = child[index] - take;
    if left == 0 {
        child.remove(index);
        return child;
    }
    child[index] = left;
    let mut i = index;
    while i > 0 && child[i - 1] > child[i] {
        child.swap(i - 1, i);
        i -= 1;
    }
    child
}

struct Frame {
    key: Key,
    // next candidate: take `take` from the distinct pile at `index`
    take: u64,
    index: usize,
}

impl Frame {
    fn new(key: Key) -> Self {
        Frame {
            key,
            take: 1,
            index: 0,
        }
    }

    /// Current candidate, skipping duplicate piles and piles below `take`.
    fn candidate(&mut self) -> Option<(usize, u64)> {
        let max = *self.key.last()?;
        while self.take <= max {
            while self.index < self.key.len() {
                let i = self.index;
                let fresh = i == 0 || self.key[i - 1] != self.key[i];
                if fresh && self.key[i] >= self.take {
                    return Some((i, self.take));
                }
                self.index += 1;
            }
            self.take += 1;
            self.index = 0;
        }
        None
    }

    fn advance(&mut self) {
        self.index += 1;
    }
}

/// Memoized oracle. One instance serves both dynamics; memo entries are keyed
/// by dynamic and never shared between them.
pub struct Solver {
    memo: [HashMap<Key, Threshold>; 2],
    budget: usize,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Self::with_budget(DEFAULT_STATE_BUDGET)
    }

    pub fn with_budget(budget: usize) -> Self {
        Solver {
            memo: [HashMap::new(), HashMap::new()],
            budget,
        }
    }

    /// Budget from [`BUDGET_ENV`] when set and parseable, else the default.
    pub fn from_env() -> Self {
        let budget = std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().replace('_', "").parse().ok())
            .unwrap_or(DEFAULT_STATE_BUDGET);
        Self::with_budget(budget)
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Number of memoized pile multisets across both dynamics.
    pub fn memo_len(&self) -> usize {
        self.memo.iter().map(HashMap::len).sum()
    }

    /// Drop every memoized entry, keeping the budget.
    pub fn clear_memo(&mut self) {
        self.memo.iter_mut().for_each(HashMap::clear);
    }

    fn slot(dynamic: Dynamic) -> usize {
        match dynamic {
            Dynamic::Fibonacci => 0,
            Dynamic::PowerOfTwo => 1,
        }
    }

    /// Smallest take from `piles` whose successor is P, or `None` when the
    /// multiset is P under every bound.
    pub fn threshold(&mut self, piles: &[u64], dynamic: Dynamic) -> Result<Threshold, SolveError> {
        let mut key = key_of(piles);
        key.sort_unstable();
        self.solve_key(key, dynamic)
    }

    fn solve_key(&mut self, key: Key, dynamic: Dynamic) -> Result<Threshold, SolveError> {
        let lambda = dynamic.multiplier();
        let budget = self.budget;
        let memo = &mut self.memo[Self::slot(dynamic)];
        if let Some(&t) = memo.get(&key) {
            return Ok(t);
        }
        // Explicit stack: depth grows with the total stone count.
        let mut stack = vec![Frame::new(key.clone())];
        enum Step {
            Resolved(Threshold),
            Descend(Key),
        }
        while let Some(frame) = stack.last_mut() {
            let step = loop {
                let Some((index, take)) = frame.candidate() else {
                    break Step::Resolved(None);
                };
                let child = child_key(&frame.key, index, take);
                match memo.get(&child) {
                    Some(&t) if t.is_none_or(|c| c > lambda * take) => break Step::Resolved(Some(take)),
                    Some(_) => frame.advance(),
                    None if child.is_empty() => break Step::Resolved(Some(take)),
                    None => break Step::Descend(child),
                }
            };
            match step {
                Step::Descend(child) => stack.push(Frame::new(child)),
                Step::Resolved(threshold) => {
                    let done = stack.pop().expect("frame present");
                    if memo.len() >= budget {
                        return Err(SolveError::BudgetExceeded { budget });
                    }
                    memo.insert(done.key, threshold);
                }
            }
        }
        Ok(*memo.get(&key).expect("root solved"))
    }

    pub fn outcome(&mut self, pos: &Position) -> Result<Outcome, SolveError> {
        let threshold = self.threshold(pos.piles(), pos.dynamic())?;
        Ok(match threshold {
            Some(t) if ExtNat::Finite(t) <= pos.bound() => Outcome::N,
            _ => Outcome::P,
        })
    }

    /// Every legal move (one per distinct pile size) leading to a P position.
    pub fn winning_moves(&mut self, pos: &Position) -> Result<Vec<Move>, SolveError> {
        let mut winning = Vec::new();
        for mv in pos.legal_moves() {
            let next = pos.apply(mv).expect("legal move");
            if self.outcome(&next)? == Outcome::P {
                winning.push(mv);
            }
        }
        Ok(winning)
    }

    /// Oracle record for `pos`.
    pub fn analyze(&mut self, pos: &Position) -> Result<crate::record::OutcomeRecord, SolveError> {
        let winning_moves = self.winning_moves(pos)?;
        let outcome = if winning_moves.is_empty() {
            Outcome::P
        } else {
            Outcome::N
        };
        debug_assert_eq!(self.outcome(pos)?, outcome);
        Ok(crate::record::OutcomeRecord {
            position: pos.clone(),
            outcome,
            winning_moves,
            provenance: crate::record::Provenance::Oracle,
        })
    }

    /// Engine policy: the winning move with the smallest `(pile size, take)`,
    /// otherwise take one stone from the largest pile.
    pub fn engine_move(&mut self, pos: &Position) -> Result<Move, SolveError> {
        if pos.is_terminal() {
            return Err(SolveError::GameOver);
        }
        let winning = self.winning_moves(pos)?;
        if let Some(mv) = winning
            .into_iter()
            .min_by_key(|m| (pos.piles()[m.pile], m.take))
        {
            return Ok(mv);
        }
        let largest = pos.piles().len() - 1;
        let first_of_size = pos.piles().partition_point(|&p| p < pos.piles()[largest]);
        Ok(Move {
            pile: first_of_size,
            take: 1,
        })
    }

    /// The smallest `b <= cap` with `(piles, b; inf)` in P.
    pub fn complementary_value(&mut self, piles: &[u64], cap: u64) -> Result<CompValue, SolveError> {
        let max_pile = piles.iter().copied().max().unwrap_or(0);
        if cap < max_pile {
            return Err(SolveError::CapBelowMaxPile { cap, max_pile });
        }
        let mut extended: Vec<u64> = piles.to_vec();
        extended.push(0);
        let last = extended.len() - 1;
        for b in 0..=cap {
            extended[last] = b;
            if self.threshold(&extended, Dynamic::Fibonacci)?.is_none() {
                return Ok(CompValue::Found(b));
            }
        }
        Ok(CompValue::NoneUpTo(cap))
    }

    /// Complementary values for all pairs `(i, j)` with `i, j <= max_n`.
    pub fn comp_table(&mut self, max_n: u64, cap: u64) -> Result<CompTable, SolveError> {
        let cap = cap.max(max_n);
        let mut rows = Vec::with_capacity(max_n as usize + 1);
        for i in 0..=max_n {
            let mut row = Vec::with_capacity(max_n as usize + 1);
            for j in 0..=max_n {
                let entry = match self.complementary_value(&[i, j], cap)? {
                    CompValue::Found(b) => TableEntry::Value(b),
                    CompValue::NoneUpTo(_) if (i.min(j), i.max(j)) == (3, 4) => TableEntry::NoneByTheorem,
                    CompValue::NoneUpTo(c) => TableEntry::UnknownUpTo(c),
                };
                row.push(entry);
            }
            rows.push(row);
        }
        Ok(CompTable { cap, rows })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompValue {
    Found(u64),
    NoneUpTo(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableEntry {
    Value(u64),
    /// No complementary value exists; `(3, 4, n; inf)` is N for every `n`.
    NoneByTheorem,
    /// Search up to the cap found nothing.
    UnknownUpTo(u64),
}

impl fmt::Display for TableEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableEntry::Value(v) => write!(f, "{v}"),
            TableEntry::NoneByTheorem => f.write_str("inf"),
            TableEntry::UnknownUpTo(c) => write!(f, "?>{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompTable {
    pub cap: u64,
    pub rows: Vec<Vec<TableEntry>>,
}

impl CompTable {
    pub fn get(&self, i: usize, j: usize) -> Option<TableEntry> {
        self.rows.get(i)?.get(j).copied()
    }

    /// Header row of column indices, then one row per pile size.
    pub fn to_csv(&self) -> String {
        let n = self.rows.len();
        let mut out = String::from("n");
        for j in 0..n {
            out.push_str(&format!(",{j}"));
        }
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&i.to_string());
            for e in row {
                out.push_str(&format!(",{e}"));
            }
            out.push('\n');
        }
        out
    }
}
