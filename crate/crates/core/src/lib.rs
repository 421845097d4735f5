//! Reconnaissance blind chess engine built around synoptic Monte Carlo planning.
//!
//! The crate is layered bottom-up:
//!
//! * [`game`] is the rules kernel: bitboards, pseudo-legal move generation,
//!   move substitution, sensing and observations, Zobrist hashing.
//! * [`tracking`] maintains the exact set of world states a player considers
//!   possible, draws limited-size subsets from it and summarizes those subsets
//!   as 104-plane synopses.
//! * [`belief`] keeps an unweighted particle filter over the opponent's
//!   information states.
//! * [`planner`] selects actions with a stochastic bandit over a hash table of
//!   approximate information states.
//! * [`eval`] provides policy and value estimates over synopses, either from a
//!   hand-written heuristic or from a small residual network.

pub mod belief;
pub mod eval;
pub mod game;
pub mod planner;
pub mod tracking;

mod hash;

pub use game::{Action, Bitboard, Color, Observation, Phase, Piece, PieceKind, Square, WorldState};
