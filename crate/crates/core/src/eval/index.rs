//! Flat indices for actions, shared with the trainer.
//!
//! Moves are `from * 64 + to` with every promotion kind on the same index,
//! senses are `4096 + square` and pass is `4160`. Indices up to 4224 are
//! reserved.

use crate::game::{Action, Color, Move, PieceKind, Square, WorldState};

pub const MOVES: usize = 4096;
pub const SENSE_BASE: u16 = 4096;
pub const PASS: u16 = 4160;
/// Number of meaningful indices.
pub const POLICY_SIZE: usize = 4161;
pub const RESERVED_END: u16 = 4224;

pub fn action_index(a: Action) -> u16 {
    match a {
        Action::Move(m) => m.from.index() as u16 * 64 + m.to.index() as u16,
        Action::Sense(sq) => SENSE_BASE + sq.index() as u16,
        Action::Pass => PASS,
    }
}

/// Index in the frame of `perspective`, where Black's squares are mirrored
/// so its back rank is rank 1.
pub fn oriented_index(a: Action, perspective: Color) -> u16 {
    if perspective == Color::White {
        return action_index(a);
    }
    let flip = |s: Square| s.flip_rank();
    action_index(match a {
        Action::Move(m) => Action::Move(Move { from: flip(m.from), to: flip(m.to), promotion: m.promotion }),
        Action::Sense(sq) => Action::Sense(flip(sq)),
        Action::Pass => Action::Pass,
    })
}

/// Decodes an index for the side to act in `state`; pawn moves to the last
/// rank become queen promotions.
pub fn action_from_index(index: u16, state: &WorldState) -> Option<Action> {
    match index {
        0..=4095 => {
            let from = Square::new((index / 64) as u8);
            let to = Square::new((index % 64) as u8);
            if from == to {
                return None;
            }
            let side = state.side_to_move();
            let promotion = (state.pieces(side, PieceKind::Pawn).contains(from)
                && to.rank() == side.opponent().back_rank())
            .then_some(PieceKind::Queen);
            Some(Action::Move(Move { from, to, promotion }))
        }
        4096..=4159 => Some(Action::Sense(Square::new((index - SENSE_BASE) as u8))),
        PASS => Some(Action::Pass),
        _ => None,
    }
}
