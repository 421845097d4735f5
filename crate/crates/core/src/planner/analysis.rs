//! Sense pruning and forced-win detection.

use std::collections::HashMap;

use crate::game::attacks::sense_window;
use crate::game::{Action, Bitboard, Move, Phase, SenseResult, Square, WorldState};

/// Centres whose window is not clipped by the board edge.
pub fn interior_senses() -> impl Iterator<Item = Square> {
    (1..7).flat_map(|r| (1..7).map(move |f| Square::from_coords(f, r)))
}

/// Squares whose occupant differs between some state and the first one.
pub fn differing_squares<'a>(states: impl IntoIterator<Item = &'a WorldState>) -> Bitboard {
    let mut it = states.into_iter();
    let Some(first) = it.next() else { return Bitboard::EMPTY };
    let mut diff = Bitboard::EMPTY;
    for x in it {
        diff |= (x.colors[0] ^ first.colors[0]) | (x.colors[1] ^ first.colors[1]);
        for k in 0..6 {
            diff |= x.kinds[k] ^ first.kinds[k];
        }
    }
    diff
}

/// Senses worth considering: rim senses are dominated by an interior
/// neighbour, and a sense whose window looks the same in every state tells
/// nothing. Never empty; with nothing to learn the lowest interior square
/// remains.
pub fn prune_senses<'a>(states: impl IntoIterator<Item = &'a WorldState>) -> Vec<Action> {
    let diff = differing_squares(states);
    let kept: Vec<Action> = interior_senses().filter(|&s| (sense_window(s) & diff).any()).map(Action::Sense).collect();
    if kept.is_empty() {
        vec![Action::Sense(Square::from_coords(1, 1))]
    } else {
        kept
    }
}

/// Whether the side to act attacks the opposing king.
pub fn king_capturable(x: &WorldState) -> bool {
    let side = x.side_to_move();
    x.king_square(side.opponent()).is_some_and(|k| x.attacks_by(side).contains(k))
}

fn captures_king(x: &WorldState, mv: Move) -> bool {
    let side = x.side_to_move();
    x.apply_unchecked(Action::Move(mv)).state.winner() == Some(side)
}

/// A move request that captures the opposing king in every state, all in
/// the move phase with the same side to act.
pub fn winning_move(states: &[&WorldState]) -> Option<Action> {
    let first = states.first()?;
    if first.phase() != Phase::Move || !states.iter().all(|x| king_capturable(x)) {
        return None;
    }
    let mut moves = Vec::new();
    first.requestable_moves(&mut moves);
    moves.retain(|&mv| captures_king(first, mv));
    moves.into_iter().find(|&mv| states[1..].iter().all(|x| captures_king(x, mv))).map(Action::Move)
}

/// A sense after which, whatever it shows, one move request captures the
/// king in every remaining state.
pub fn winning_sense(states: &[&WorldState]) -> Option<Action> {
    let first = states.first()?;
    if first.phase() != Phase::Sense || !states.iter().all(|x| king_capturable(x)) {
        return None;
    }
    let moved: Vec<WorldState> = states.iter().map(|x| x.after_sense()).collect();
    let refs: Vec<&WorldState> = moved.iter().collect();
    if winning_move(&refs).is_some() {
        return prune_senses(states.iter().copied()).first().copied();
    }
    'senses: for s in interior_senses() {
        let mut groups: HashMap<SenseResult, Vec<&WorldState>> = HashMap::new();
        for x in &refs {
            groups.entry(SenseResult::of(x, s)).or_default().push(x);
        }
        if groups.len() == 1 {
            continue;
        }
        for g in groups.values() {
            if winning_move(g).is_none() {
                continue 'senses;
            }
        }
        return Some(Action::Sense(s));
    }
    None
}

/// Forced win for the side to act over `states`, in either phase.
pub fn static_win(states: &[&WorldState]) -> Option<Action> {
    match states.first()?.phase() {
        Phase::Sense => winning_sense(states),
        Phase::Move => winning_move(states),
    }
}
