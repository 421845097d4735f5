//! Rules of reconnaissance blind chess.
//!
//! Each turn the side to act first senses a 3x3 window (clipped at the
//! edges), then requests a move or passes. Requests the true board does not
//! allow are substituted by the closest executable move. The mover learns the
//! executed move and any capture square; the opponent learns only the capture
//! square. Capturing the king ends the game; there is no check.
//!
//! ```
//! use penumbral_core::game::{Action, WorldState};
//!
//! let start = WorldState::initial();
//! let sensed = start.apply("sense:e7".parse().unwrap()).unwrap().state;
//! assert_eq!(sensed.legal_actions().len(), 21);
//! let t = sensed.apply("move:e2e4".parse().unwrap()).unwrap();
//! assert_eq!(t.actor.executed, Some("move:e2e4".parse::<Action>().unwrap()));
//! assert_eq!(t.other.capture, None);
//! ```

mod action;
pub mod attacks;
mod movegen;
mod notation;
mod observation;
mod state;
mod types;
pub mod zobrist;

pub use action::{Action, Move};
pub use observation::{Observation, SenseResult, Transition};
pub use state::{MoveMemo, WorldState};
pub use types::{king_home, rook_home, BitIter, Bitboard, CastlingRights, Color, Phase, Piece, PieceKind, Square};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("invalid square {0:?}")]
    Square(String),
    #[error("invalid castling field {0:?}")]
    Castling(String),
    #[error("invalid board {0:?}")]
    Board(String),
    #[error("invalid action {0:?}")]
    Action(String),
    #[error("invalid state: {0}")]
    State(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RulesError {
    #[error("the game is over")]
    GameOver,
    #[error("{action} is not allowed in the {phase:?} phase")]
    WrongPhase { action: Action, phase: Phase },
    #[error("{0} cannot be requested here")]
    NotRequestable(Action),
}
