//! Game sessions between a human and the engine.
//!
//! Piles stay in the order the human created them; the solver sees them
//! sorted, and engine moves are mapped back to the first displayed pile of
//! the chosen size.

use std::sync::Mutex;
use std::time::Instant;

use fibnim_core::solver::SolveError;
use fibnim_core::{Dynamic, ExtNat, Move, Outcome, Position, Solver};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::error::ServiceError;

/// Most piles a session may start with.
pub const MAX_PILES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actor {
    Human,
    Engine,
}

impl Actor {
    fn other(self) -> Actor {
        match self {
            Actor::Human => Actor::Engine,
            Actor::Engine => Actor::Human,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    InProgress,
    HumanWon,
    EngineWon,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub actor: Actor,
    pub pile_index: usize,
    pub take: u64,
    /// Piles and bound after the move.
    pub piles: Vec<u64>,
    pub bound: ExtNat,
}

fn default_bound() -> ExtNat {
    ExtNat::Inf
}

fn default_dynamic() -> Dynamic {
    Dynamic::Fibonacci
}

fn yes() -> bool {
    true
}

/// Body of `POST /api/session`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewSession {
    pub piles: Vec<u64>,
    #[serde(default = "default_bound")]
    pub bound: ExtNat,
    #[serde(default = "default_dynamic")]
    pub dynamic: Dynamic,
    #[serde(default = "yes")]
    pub human_first: bool,
    #[serde(default)]
    pub hints: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Session {
    pub id: Uuid,
    pub initial_piles: Vec<u64>,
    pub initial_bound: ExtNat,
    pub piles: Vec<u64>,
    pub bound: ExtNat,
    pub dynamic: Dynamic,
    pub human_first: bool,
    pub hints_enabled: bool,
    pub status: Status,
    pub history: Vec<HistoryEntry>,
    #[serde(skip, default = "Instant::now")]
    pub touched: Instant,
}

/// A suggested move, or `None` when every move loses against best play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hint {
    pub outcome: Outcome,
    #[serde(rename = "move")]
    pub mv: Option<DisplayMove>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplayMove {
    pub pile_index: usize,
    pub take: u64,
}

/// Run `f` on the shared solver. A full memo is cleared and the call retried
/// once before the budget error is reported.
pub fn with_solver<T>(
    solver: &Mutex<Solver>,
    f: impl Fn(&mut Solver) -> Result<T, SolveError>,
) -> Result<T, ServiceError> {
    let mut guard = solver.lock().unwrap_or_else(|e| e.into_inner());
    match f(&mut guard) {
        Err(SolveError::BudgetExceeded { .. }) => {
            guard.clear_memo();
            Ok(f(&mut guard)?)
        }
        other => Ok(other?),
    }
}

impl Session {
    /// Validate the request and start the game; the engine moves at once if
    /// it goes first.
    pub fn start(id: Uuid, req: NewSession, solver: &Mutex<Solver>) -> Result<Session, ServiceError> {
        if req.piles.is_empty() {
            return Err(ServiceError::InvalidPosition("at least one pile is required".into()));
        }
        if req.piles.len() > MAX_PILES {
            return Err(ServiceError::InvalidPosition(format!("at most {MAX_PILES} piles are allowed")));
        }
        if req.bound == ExtNat::Finite(0) {
            return Err(ServiceError::InvalidPosition("the move bound must be at least 1".into()));
        }
        if req.piles.iter().all(|&p| p == 0) {
            return Err(ServiceError::InvalidPosition("every pile is empty".into()));
        }
        let mut session = Session {
            id,
            initial_piles: req.piles.clone(),
            initial_bound: req.bound,
            piles: req.piles,
            bound: req.bound,
            dynamic: req.dynamic,
            human_first: req.human_first,
            hints_enabled: req.hints,
            status: Status::InProgress,
            history: Vec::new(),
            touched: Instant::now(),
        };
        if !session.human_first {
            session.engine_reply(solver)?;
        }
        Ok(session)
    }

    pub fn position(&self) -> Position {
        Position::new(self.piles.clone(), self.bound, self.dynamic)
    }

    pub fn to_move(&self) -> Actor {
        match self.history.last() {
            Some(last) => last.actor.other(),
            None if self.human_first => Actor::Human,
            None => Actor::Engine,
        }
    }

    /// Largest legal take from pile `index`.
    pub fn max_take(&self, index: usize) -> u64 {
        self.piles.get(index).map_or(0, |&p| self.bound.clamp_to(p))
    }

    pub fn human_move(&mut self, pile_index: usize, take: u64, solver: &Mutex<Solver>) -> Result<(), ServiceError> {
        if self.status != Status::InProgress {
            return Err(ServiceError::GameOver);
        }
        self.check_move(pile_index, take)?;
        self.play(Actor::Human, pile_index, take);
        if self.status == Status::InProgress {
            self.engine_reply(solver)?;
        }
        Ok(())
    }

    fn check_move(&self, pile_index: usize, take: u64) -> Result<(), ServiceError> {
        let Some(&pile_size) = self.piles.get(pile_index) else {
            return Err(ServiceError::illegal_move(
                format!("there is no pile {pile_index}"),
                self,
                pile_index,
            ));
        };
        let max_take = self.max_take(pile_index);
        if take == 0 || take > max_take {
            let message = if pile_size == 0 {
                format!("pile {pile_index} is empty")
            } else {
                format!("take must be between 1 and {max_take}")
            };
            return Err(ServiceError::illegal_move(message, self, pile_index));
        }
        Ok(())
    }

    fn play(&mut self, actor: Actor, pile_index: usize, take: u64) {
        self.piles[pile_index] -= take;
        self.bound = ExtNat::Finite(self.dynamic.multiplier() * take);
        self.history.push(HistoryEntry {
            actor,
            pile_index,
            take,
            piles: self.piles.clone(),
            bound: self.bound,
        });
        if self.piles.iter().all(|&p| p == 0) {
            self.status = match actor {
                Actor::Human => Status::HumanWon,
                Actor::Engine => Status::EngineWon,
            };
        }
    }

    fn engine_reply(&mut self, solver: &Mutex<Solver>) -> Result<(), ServiceError> {
        let pos = self.position();
        let mv = with_solver(solver, |s| s.engine_move(&pos))?;
        if cfg!(debug_assertions) {
            let before = with_solver(solver, |s| s.outcome(&pos))?;
            let next = pos.apply(mv).expect("engine move is legal");
            let after = with_solver(solver, |s| s.outcome(&next))?;
            assert!(before == Outcome::P || after == Outcome::P, "engine left {pos} for N position {next}");
        }
        let shown = self.display_move(&pos, mv);
        self.play(Actor::Engine, shown.pile_index, shown.take);
        Ok(())
    }

    fn display_move(&self, pos: &Position, mv: Move) -> DisplayMove {
        let size = pos.piles()[mv.pile];
        let pile_index = self.piles.iter().position(|&p| p == size).expect("pile sizes match");
        DisplayMove {
            pile_index,
            take: mv.take,
        }
    }

    pub fn hint(&self, solver: &Mutex<Solver>) -> Result<Hint, ServiceError> {
        if !self.hints_enabled {
            return Err(ServiceError::HintsDisabled);
        }
        if self.status != Status::InProgress {
            return Err(ServiceError::GameOver);
        }
        let pos = self.position();
        let winning = with_solver(solver, |s| s.winning_moves(&pos))?;
        let best = winning.into_iter().min_by_key(|m| (pos.piles()[m.pile], m.take));
        Ok(match best {
            Some(mv) => Hint {
                outcome: Outcome::N,
                mv: Some(self.display_move(&pos, mv)),
            },
            None => Hint {
                outcome: Outcome::P,
                mv: None,
            },
        })
    }

    /// Piles and bound obtained by replaying the history from the start.
    pub fn replay(&self) -> (Vec<u64>, ExtNat) {
        let mut piles = self.initial_piles.clone();
        let mut bound = self.initial_bound;
        for entry in &self.history {
            piles[entry.pile_index] -= entry.take;
            bound = ExtNat::Finite(self.dynamic.multiplier() * entry.take);
        }
        (piles, bound)
    }
}

/// The session as returned by the API.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: Uuid,
    pub piles: Vec<u64>,
    pub bound: ExtNat,
    pub dynamic: Dynamic,
    pub multiplier: u64,
    pub human_first: bool,
    pub hints_enabled: bool,
    pub status: Status,
    pub to_move: Actor,
    /// Largest take allowed from each pile.
    pub max_take: Vec<u64>,
    pub history: Vec<HistoryEntry>,
}

impl From<&Session> for SessionView {
    fn from(s: &Session) -> Self {
        SessionView {
            id: s.id,
            piles: s.piles.clone(),
            bound: s.bound,
            dynamic: s.dynamic,
            multiplier: s.dynamic.multiplier(),
            human_first: s.human_first,
            hints_enabled: s.hints_enabled,
            status: s.status,
            to_move: s.to_move(),
            max_take: (0..s.piles.len()).map(|i| s.max_take(i)).collect(),
            history: s.history.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn new(piles: &[u64], bound: ExtNat, human_first: bool) -> NewSession {
        NewSession {
            piles: piles.to_vec(),
            bound,
            dynamic: Dynamic::Fibonacci,
            human_first,
            hints: true,
        }
    }

    fn solver() -> Mutex<Solver> {
        Mutex::new(Solver::new())
    }

    #[test]
    fn human_first_session_starts_untouched() {
        let s = Session::start(Uuid::nil(), new(&[3, 4, 10], ExtNat::Inf, true), &solver()).unwrap();
        assert_eq!(s.piles, [3, 4, 10]);
        assert_eq!(s.to_move(), Actor::Human);
        assert!(s.history.is_empty());
    }

    #[test]
    fn engine_first_moves() {
        let sv = solver();
        // (13; 12) is P: the engine delays with one stone
        let s = Session::start(Uuid::nil(), new(&[13], 12.into(), false), &sv).unwrap();
        assert_eq!((s.history[0].take, s.piles[0]), (1, 12));
        // (10; 2) has the single winning take of 2
        let s = Session::start(Uuid::nil(), new(&[10], 2.into(), false), &sv).unwrap();
        assert_eq!(s.history[0].take, 2);
        assert_eq!(s.bound, ExtNat::Finite(4));
    }

    #[test]
    fn engine_moves_map_to_display_order() {
        let sv = solver();
        // after 9 -> 3 the solver sees (1, 3, 4, 5; 12) but the reply must
        // name a pile in the original order
        let mut s = Session::start(Uuid::nil(), new(&[5, 9, 4, 1], ExtNat::Inf, true), &sv).unwrap();
        s.human_move(1, 6, &sv).unwrap();
        let reply = s.history.last().unwrap().clone();
        assert_eq!(reply.actor, Actor::Engine);
        let before = [5, 3, 4, 1];
        assert_eq!(s.piles[reply.pile_index] + reply.take, before[reply.pile_index]);
        let expected = sv.lock().unwrap().engine_move(&Position::fibonacci(before.to_vec(), 12)).unwrap();
        assert_eq!(before[reply.pile_index], [1, 3, 4, 5][expected.pile]);
        assert_eq!(s.replay(), (s.piles.clone(), s.bound));
    }

    #[test]
    fn illegal_moves_are_rejected() {
        let sv = solver();
        let mut s = Session::start(Uuid::nil(), new(&[10], 2.into(), true), &sv).unwrap();
        let err = s.human_move(0, 3, &sv).unwrap_err();
        assert!(matches!(err, ServiceError::IllegalMove { .. }));
        assert!(s.human_move(0, 0, &sv).is_err());
        assert!(s.human_move(4, 1, &sv).is_err());
        assert!(s.history.is_empty());
    }

    #[test]
    fn taking_the_last_stone_wins() {
        let sv = solver();
        let mut s = Session::start(Uuid::nil(), new(&[0, 2], ExtNat::Inf, true), &sv).unwrap();
        s.human_move(1, 2, &sv).unwrap();
        assert_eq!(s.status, Status::HumanWon);
        assert_eq!(s.history.len(), 1);
        assert!(matches!(s.human_move(1, 1, &sv), Err(ServiceError::GameOver)));

        let mut s = Session::start(Uuid::nil(), new(&[1, 1], 1.into(), true), &sv).unwrap();
        s.human_move(0, 1, &sv).unwrap();
        assert_eq!(s.status, Status::EngineWon);
    }

    #[test]
    fn hints() {
        let sv = solver();
        let s = Session::start(Uuid::nil(), new(&[10], 2.into(), true), &sv).unwrap();
        let hint = s.hint(&sv).unwrap();
        assert_eq!(hint.mv, Some(DisplayMove { pile_index: 0, take: 2 }));
        let s = Session::start(Uuid::nil(), new(&[13], 12.into(), true), &sv).unwrap();
        assert_eq!(s.hint(&sv).unwrap(), Hint { outcome: Outcome::P, mv: None });
        let mut req = new(&[10], 2.into(), true);
        req.hints = false;
        let s = Session::start(Uuid::nil(), req, &sv).unwrap();
        assert!(matches!(s.hint(&sv), Err(ServiceError::HintsDisabled)));
    }

    #[test]
    fn invalid_positions() {
        let sv = solver();
        for req in [new(&[], ExtNat::Inf, true), new(&[0, 0], ExtNat::Inf, true), new(&[4], 0.into(), true)] {
            assert!(matches!(Session::start(Uuid::nil(), req, &sv), Err(ServiceError::InvalidPosition(_))));
        }
    }

    #[test]
    fn engine_wins_every_n_start_and_replay_matches() {
        let sv = solver();
        for n in 1..=40u64 {
            for r in 1..=8u64 {
                let mut s = Session::start(Uuid::nil(), new(&[n, n / 2 + 1], r.into(), false), &sv).unwrap();
                let start = Position::fibonacci(vec![n, n / 2 + 1], r);
                let engine_wins = sv.lock().unwrap().outcome(&start).unwrap() == Outcome::N;
                // human plays the first legal take each time
                while s.status == Status::InProgress {
                    let i = s.piles.iter().position(|&p| p > 0).unwrap();
                    s.human_move(i, 1, &sv).unwrap();
                }
                if engine_wins {
                    assert_eq!(s.status, Status::EngineWon, "{start}");
                }
                assert_eq!(s.replay(), (s.piles.clone(), s.bound));
            }
        }
    }
}
