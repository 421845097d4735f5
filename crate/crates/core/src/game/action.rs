use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::types::{PieceKind, Square};
use super::ParseError;

/// A chess move as requested or executed. Castling is written as the king's
/// two-file move (`e1g1`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub from: Square,
    pub to: Square,
    pub promotion: Option<PieceKind>,
}

impl Move {
    pub const fn new(from: Square, to: Square) -> Move {
        Move { from, to, promotion: None }
    }

    pub const fn promoting(from: Square, to: Square, kind: PieceKind) -> Move {
        Move { from, to, promotion: Some(kind) }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.from, self.to)?;
        if let Some(p) = self.promotion {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Move {
    type Err = ParseError;

    /// Parses UCI-style coordinates such as `e2e4` or `e7e8q`.
    fn from_str(s: &str) -> Result<Move, ParseError> {
        let err = || ParseError::Action(s.to_string());
        if !(4..=5).contains(&s.len()) || !s.is_ascii() {
            return Err(err());
        }
        let from = s[0..2].parse().map_err(|_| err())?;
        let to = s[2..4].parse().map_err(|_| err())?;
        let promotion = match s[4..].chars().next() {
            None => None,
            Some(c) => match PieceKind::from_letter(c) {
                Some(k) if !matches!(k, PieceKind::Pawn | PieceKind::King) => Some(k),
                _ => return Err(err()),
            },
        };
        Ok(Move { from, to, promotion })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Sense(Square),
    Move(Move),
    Pass,
}

impl Action {
    pub const fn is_sense(self) -> bool {
        matches!(self, Action::Sense(_))
    }

    pub fn as_move(self) -> Option<Move> {
        match self {
            Action::Move(m) => Some(m),
            _ => None,
        }
    }

    /// All 64 sense actions in square order.
    pub fn senses() -> impl Iterator<Item = Action> {
        Square::all().map(Action::Sense)
    }
}

impl From<Move> for Action {
    fn from(m: Move) -> Action {
        Action::Move(m)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Sense(sq) => write!(f, "sense:{sq}"),
            Action::Move(m) => write!(f, "move:{m}"),
            Action::Pass => f.write_str("pass"),
        }
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Action {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Action, ParseError> {
        if s == "pass" {
            Ok(Action::Pass)
        } else if let Some(rest) = s.strip_prefix("sense:") {
            Ok(Action::Sense(rest.parse().map_err(|_| ParseError::Action(s.to_string()))?))
        } else if let Some(rest) = s.strip_prefix("move:") {
            Ok(Action::Move(rest.parse().map_err(|_| ParseError::Action(s.to_string()))?))
        } else {
            Err(ParseError::Action(s.to_string()))
        }
    }
}

impl Serialize for Action {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Action, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
