//! Move generation and move substitution.
//!
//! Two move sets matter. *Executable* moves are chess's pseudo-legal moves on
//! the true board, with castling allowed through check; they are what can
//! actually happen. *Requestable* moves are what a player who cannot see the
//! opponent may ask for: generated with only their own pieces as blockers,
//! plus every pawn diagonal. A request is mapped to an executable move (or a
//! pass) by [`WorldState::substitute`].

use super::action::{Action, Move};
use super::attacks;
use super::types::{king_home, rook_home, Bitboard, Color, Phase, PieceKind, Square};
use super::WorldState;

fn push_pawn_moves(out: &mut Vec<Move>, from: Square, to: Square, last_rank: u8) {
    if to.rank() == last_rank {
        for k in PieceKind::PROMOTIONS {
            out.push(Move::promoting(from, to, k));
        }
    } else {
        out.push(Move::new(from, to));
    }
}

#[inline]
fn forward(color: Color) -> i8 {
    match color {
        Color::White => 1,
        Color::Black => -1,
    }
}

impl WorldState {
    /// Squares strictly between the king's home square and the rook's.
    fn castle_path(color: Color, kingside: bool) -> Bitboard {
        attacks::between(king_home(color), rook_home(color, kingside))
    }

    fn castle_moves(&self, out: &mut Vec<Move>, blockers: Bitboard) {
        let us = self.side;
        let king = king_home(us);
        if !self.pieces(us, PieceKind::King).contains(king) {
            return;
        }
        for kingside in [true, false] {
            if self.castling.has(us, kingside)
                && self.pieces(us, PieceKind::Rook).contains(rook_home(us, kingside))
                && (Self::castle_path(us, kingside) & blockers).is_empty()
            {
                let to = Square::from_coords(if kingside { 6 } else { 2 }, king.rank());
                out.push(Move::new(king, to));
            }
        }
    }

    /// Moves that can be executed on this board: pseudo-legal chess moves,
    /// castling ignoring check, all four promotion kinds. Appends to `out`.
    pub fn executable_moves(&self, out: &mut Vec<Move>) {
        let us = self.side;
        let own = self.occupied_by(us);
        let theirs = self.occupied_by(us.opponent());
        let occ = own | theirs;
        let last = us.opponent().back_rank();
        let dir = forward(us);
        let start_rank = if us == Color::White { 1 } else { 6 };

        for from in self.pieces(us, PieceKind::Pawn) {
            if let Some(one) = from.offset(0, dir) {
                if !occ.contains(one) {
                    push_pawn_moves(out, from, one, last);
                    if from.rank() == start_rank {
                        let two = one.offset(0, dir).unwrap();
                        if !occ.contains(two) {
                            out.push(Move::new(from, two));
                        }
                    }
                }
            }
            let mut targets = attacks::pawn(us, from) & theirs;
            if let Some(ep) = self.en_passant_target() {
                if attacks::pawn(us, from).contains(ep) {
                    targets.insert(ep);
                }
            }
            for to in targets {
                push_pawn_moves(out, from, to, last);
            }
        }
        for kind in [PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook, PieceKind::Queen, PieceKind::King] {
            for from in self.pieces(us, kind) {
                for to in attacks::piece(kind, us, from, occ) & !own {
                    out.push(Move::new(from, to));
                }
            }
        }
        self.castle_moves(out, occ);
    }

    /// The en passant square when a capture onto it is actually possible.
    fn en_passant_target(&self) -> Option<Square> {
        let ep = self.en_passant?;
        let them = self.side.opponent();
        let victim = ep.offset(0, -forward(self.side))?;
        if self.occupancy().contains(ep) || !self.pieces(them, PieceKind::Pawn).contains(victim) {
            return None;
        }
        Some(ep)
    }

    /// Moves the side to act may request, computed from its own pieces only.
    /// The result is the same for every state that agrees on those pieces.
    pub fn requestable_moves(&self, out: &mut Vec<Move>) {
        let us = self.side;
        let own = self.occupied_by(us);
        let last = us.opponent().back_rank();
        let dir = forward(us);
        let start_rank = if us == Color::White { 1 } else { 6 };

        for from in self.pieces(us, PieceKind::Pawn) {
            if let Some(one) = from.offset(0, dir) {
                if !own.contains(one) {
                    push_pawn_moves(out, from, one, last);
                    if from.rank() == start_rank {
                        let two = one.offset(0, dir).unwrap();
                        if !own.contains(two) {
                            out.push(Move::new(from, two));
                        }
                    }
                }
            }
            for to in attacks::pawn(us, from) & !own {
                push_pawn_moves(out, from, to, last);
            }
        }
        for kind in [PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook, PieceKind::Queen, PieceKind::King] {
            for from in self.pieces(us, kind) {
                for to in attacks::piece(kind, us, from, own) & !own {
                    out.push(Move::new(from, to));
                }
            }
        }
        self.castle_moves(out, own);
    }

    /// Actions available to the side to act: all 64 senses in the sense
    /// phase, executable moves plus pass in the move phase, nothing once a
    /// king is gone.
    pub fn legal_actions(&self) -> Vec<Action> {
        if self.is_terminal() {
            return Vec::new();
        }
        match self.phase {
            Phase::Sense => Action::senses().collect(),
            Phase::Move => {
                let mut moves = Vec::with_capacity(48);
                self.executable_moves(&mut moves);
                let mut out: Vec<Action> = moves.into_iter().map(Action::Move).collect();
                out.push(Action::Pass);
                out
            }
        }
    }

    /// Actions the side to act may request: all 64 senses in the sense phase,
    /// requestable moves plus pass in the move phase.
    pub fn requestable_actions(&self) -> Vec<Action> {
        if self.is_terminal() {
            return Vec::new();
        }
        match self.phase {
            Phase::Sense => Action::senses().collect(),
            Phase::Move => {
                let mut moves = Vec::with_capacity(64);
                self.requestable_moves(&mut moves);
                let mut out: Vec<Action> = moves.into_iter().map(Action::Move).collect();
                out.push(Action::Pass);
                out
            }
        }
    }

    /// Whether `mv` is in [`executable_moves`](Self::executable_moves),
    /// decided without generating the list.
    pub fn is_executable(&self, mv: Move) -> bool {
        let us = self.side;
        let Some(piece) = self.piece_at(mv.from) else {
            return false;
        };
        if piece.color != us || self.occupied_by(us).contains(mv.to) || mv.from == mv.to {
            return false;
        }
        let occ = self.occupancy();
        let last = us.opponent().back_rank();
        if piece.kind == PieceKind::Pawn {
            let promo_ok = if mv.to.rank() == last {
                matches!(mv.promotion, Some(PieceKind::Queen | PieceKind::Rook | PieceKind::Bishop | PieceKind::Knight))
            } else {
                mv.promotion.is_none()
            };
            if !promo_ok {
                return false;
            }
            let dir = forward(us);
            if mv.from.offset(0, dir) == Some(mv.to) {
                return !occ.contains(mv.to);
            }
            let start_rank = if us == Color::White { 1 } else { 6 };
            if mv.from.rank() == start_rank && mv.from.offset(0, 2 * dir) == Some(mv.to) {
                let one = mv.from.offset(0, dir).unwrap();
                return !occ.contains(one) && !occ.contains(mv.to);
            }
            if attacks::pawn(us, mv.from).contains(mv.to) {
                return self.occupied_by(us.opponent()).contains(mv.to) || self.en_passant_target() == Some(mv.to);
            }
            return false;
        }
        if mv.promotion.is_some() {
            return false;
        }
        if piece.kind == PieceKind::King
            && mv.from == king_home(us)
            && mv.to.rank() == mv.from.rank()
            && mv.from.file().abs_diff(mv.to.file()) == 2
        {
            return self.castle_ok(mv.to.file() > mv.from.file(), occ);
        }
        attacks::piece(piece.kind, us, mv.from, occ).contains(mv.to)
    }

    fn castle_ok(&self, kingside: bool, blockers: Bitboard) -> bool {
        let us = self.side;
        self.castling.has(us, kingside)
            && self.pieces(us, PieceKind::King).contains(king_home(us))
            && self.pieces(us, PieceKind::Rook).contains(rook_home(us, kingside))
            && (Self::castle_path(us, kingside) & blockers).is_empty()
    }

    /// Maps a requested move to the move actually executed: executable
    /// requests stand; a blocked castle becomes a pass; pawns and sliders
    /// stop at the farthest reachable square along their path (capturing
    /// whatever stops them); anything else becomes a pass. A pawn move to the
    /// last rank without a promotion kind promotes to a queen.
    pub fn substitute(&self, requested: Action) -> Action {
        let mv = match requested {
            Action::Move(mv) => mv,
            other => return other,
        };
        let mv = self.with_default_promotion(mv);
        if self.is_executable(mv) {
            return Action::Move(mv);
        }
        let Some(piece) = self.piece_at(mv.from) else {
            return Action::Pass;
        };
        if piece.color != self.side {
            return Action::Pass;
        }
        match piece.kind {
            PieceKind::King | PieceKind::Knight => Action::Pass,
            _ => {
                let path = attacks::between(mv.from, mv.to);
                // The path is a straight line, so walking back from the
                // destination visits candidates farthest first.
                let mut cand = Some(mv.to);
                while let Some(sq) = cand {
                    let m = Move { from: mv.from, to: sq, promotion: mv.promotion };
                    if self.is_executable(m) {
                        return Action::Move(m);
                    }
                    cand = closer(mv.from, sq, path);
                }
                Action::Pass
            }
        }
    }

    pub(crate) fn with_default_promotion(&self, mv: Move) -> Move {
        if mv.promotion.is_none()
            && mv.to.rank() == self.side.opponent().back_rank()
            && self.pieces(self.side, PieceKind::Pawn).contains(mv.from)
        {
            Move::promoting(mv.from, mv.to, PieceKind::Queen)
        } else {
            mv
        }
    }
}

/// The path square adjacent to `sq` on the way back towards `from`.
fn closer(from: Square, sq: Square, path: Bitboard) -> Option<Square> {
    let df = (from.file() as i8 - sq.file() as i8).signum();
    let dr = (from.rank() as i8 - sq.rank() as i8).signum();
    let next = sq.offset(df, dr)?;
    path.contains(next).then_some(next)
}
