use serde::{Deserialize, Serialize};

use super::action::Action;
use super::attacks;
use super::types::{Bitboard, Color, Phase, Piece, PieceKind, Square};
use super::{RulesError, WorldState};

/// Ground truth of a sensed window: which squares were seen and what stood
/// on each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SenseResult {
    pub center: Square,
    pub window: Bitboard,
    colors: [Bitboard; 2],
    kinds: [Bitboard; 6],
}

impl SenseResult {
    pub fn of(state: &WorldState, center: Square) -> SenseResult {
        let window = attacks::sense_window(center);
        SenseResult {
            center,
            window,
            colors: [state.colors[0] & window, state.colors[1] & window],
            kinds: std::array::from_fn(|k| state.kinds[k] & window),
        }
    }

    /// Whether `state` shows exactly this content inside the window.
    #[inline]
    pub fn matches(&self, state: &WorldState) -> bool {
        let w = self.window;
        state.colors[0] & w == self.colors[0]
            && state.colors[1] & w == self.colors[1]
            && (0..6).all(|k| state.kinds[k] & w == self.kinds[k])
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        let color = Color::ALL.into_iter().find(|c| self.colors[c.index()].contains(sq))?;
        let kind = PieceKind::ALL.into_iter().find(|k| self.kinds[k.index()].contains(sq))?;
        Some(Piece::new(color, kind))
    }

    /// Every window square with its occupant, in square order.
    pub fn squares(&self) -> impl Iterator<Item = (Square, Option<Piece>)> + '_ {
        self.window.iter().map(|sq| (sq, self.piece_at(sq)))
    }

    pub fn from_squares(center: Square, squares: &[(Square, Option<Piece>)]) -> SenseResult {
        let mut r = SenseResult {
            center,
            window: attacks::sense_window(center),
            colors: [Bitboard::EMPTY; 2],
            kinds: [Bitboard::EMPTY; 6],
        };
        for &(sq, piece) in squares {
            if let Some(p) = piece {
                r.colors[p.color.index()].insert(sq);
                r.kinds[p.kind.index()].insert(sq);
            }
        }
        r
    }
}

#[derive(Serialize, Deserialize)]
struct SenseRepr {
    center: Square,
    squares: Vec<(Square, Option<char>)>,
}

impl Serialize for SenseResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SenseRepr { center: self.center, squares: self.squares().map(|(sq, p)| (sq, p.map(Piece::fen_char))).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SenseResult {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<SenseResult, D::Error> {
        let r = SenseRepr::deserialize(d)?;
        let mut squares = Vec::with_capacity(r.squares.len());
        for (sq, c) in r.squares {
            let piece = match c {
                Some(c) => Some(Piece::from_fen_char(c).ok_or_else(|| serde::de::Error::custom("bad piece"))?),
                None => None,
            };
            squares.push((sq, piece));
        }
        Ok(SenseResult::from_squares(r.center, &squares))
    }
}

/// What one player learns from one action.
///
/// The actor of a sense gets `sense`; the actor of a move gets `executed`
/// (the substituted move, or [`Action::Pass`]) and `capture`. The other
/// player learns only `capture`, and nothing at all from a sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Observation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sense: Option<SenseResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub executed: Option<Action>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture: Option<Square>,
}

impl Observation {
    pub const EMPTY: Observation = Observation { sense: None, executed: None, capture: None };
}

/// The successor of one action and what each player observed.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: WorldState,
    pub actor: Observation,
    pub other: Observation,
}

impl WorldState {
    /// Applies an action for the side to act. Move requests are substituted
    /// first; a move request outside [`requestable_actions`](Self::requestable_actions)
    /// is an error.
    pub fn apply(&self, action: Action) -> Result<Transition, RulesError> {
        if self.is_terminal() {
            return Err(RulesError::GameOver);
        }
        match (self.phase, action) {
            (Phase::Sense, Action::Sense(_)) => {}
            (Phase::Move, Action::Move(mv)) => {
                let mut moves = Vec::with_capacity(64);
                self.requestable_moves(&mut moves);
                let mv = self.with_default_promotion(mv);
                if !moves.contains(&mv) {
                    return Err(RulesError::NotRequestable(action));
                }
            }
            (Phase::Move, Action::Pass) => {}
            _ => return Err(RulesError::WrongPhase { action, phase: self.phase }),
        }
        Ok(self.apply_unchecked(action))
    }

    /// Applies an action in the right phase without validating the request.
    pub fn apply_unchecked(&self, action: Action) -> Transition {
        match action {
            Action::Sense(sq) => Transition {
                state: self.after_sense(),
                actor: Observation { sense: Some(SenseResult::of(self, sq)), ..Observation::EMPTY },
                other: Observation::EMPTY,
            },
            _ => {
                let executed = self.substitute(action);
                let (state, capture) = self.after_move(executed.as_move());
                Transition {
                    state,
                    actor: Observation { sense: None, executed: Some(executed), capture },
                    other: Observation { capture, ..Observation::EMPTY },
                }
            }
        }
    }

    /// Whether playing `action` here would show `viewer` exactly `obs`.
    pub fn observation_matches(&self, action: Action, obs: &Observation, viewer: Color) -> bool {
        if self.is_terminal() {
            return false;
        }
        let t = self.apply_unchecked(action);
        let seen = if viewer == self.side { t.actor } else { t.other };
        seen == *obs
    }
}
