//! Multi-pile Fibonacci nim and power-of-two nim under the global move dynamic.
//!
//! The crate is organised bottom-up:
//!
//! - [`fib`]: Fibonacci numbers, Zeckendorf decomposition, nim-sum arithmetic
//!   and the Beatty classes used for the `(3, 4, n)` family.
//! - [`word`]: the Fibonacci word, its partial-sum sets and the three-letter
//!   hybrid words that classify two-pile positions with a small move bound.
//! - [`solver`]: the exhaustive outcome oracle and complementary-value search.
//! - [`classify`]: closed-form classifiers, each checked against the oracle.
//! - [`record`]: the line format shared by the CLI and the play service.
//! - [`verify`]: property suites run by `fibnim verify`.

pub mod classify;
pub mod fib;
pub mod record;
pub mod solver;
pub mod verify;
pub mod word;

pub use fib::ExtNat;
pub use solver::{Dynamic, Move, Outcome, Position, Solver};
