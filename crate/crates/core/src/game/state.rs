use std::hash::{Hash, Hasher};

use super::action::Move;
use super::attacks;
use super::types::{king_home, rook_home, Bitboard, CastlingRights, Color, Phase, Piece, PieceKind, Square};
use super::zobrist;

/// What one player's move did: where it went and what it captured.
/// An all-`None` memo records a pass (or no move yet).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MoveMemo {
    pub from: Option<Square>,
    pub to: Option<Square>,
    pub capture: Option<Square>,
}

impl MoveMemo {
    pub const NONE: MoveMemo = MoveMemo { from: None, to: None, capture: None };

    pub fn is_none(&self) -> bool {
        *self == MoveMemo::NONE
    }
}

/// One complete game configuration.
///
/// Equality and hashing cover placement, side to act, phase, castling rights
/// and the en passant square. The move history fields and the placement
/// before the latest move ride along for synopsis features but do not take
/// part in identity.
#[derive(Clone)]
pub struct WorldState {
    pub(crate) colors: [Bitboard; 2],
    pub(crate) kinds: [Bitboard; 6],
    pub(crate) before_colors: [Bitboard; 2],
    pub(crate) before_kinds: [Bitboard; 6],
    pub(crate) hash: u64,
    /// `memo[color][0]` is that color's latest move, `[1]` the one before.
    pub(crate) memo: [[MoveMemo; 2]; 2],
    pub(crate) side: Color,
    pub(crate) phase: Phase,
    pub(crate) castling: CastlingRights,
    pub(crate) en_passant: Option<Square>,
    pub(crate) ply: u16,
}

const BACK_RANK: [PieceKind; 8] = [
    PieceKind::Rook,
    PieceKind::Knight,
    PieceKind::Bishop,
    PieceKind::Queen,
    PieceKind::King,
    PieceKind::Bishop,
    PieceKind::Knight,
    PieceKind::Rook,
];

impl WorldState {
    /// The standard starting position, White to sense.
    pub fn initial() -> WorldState {
        let mut s = WorldState::empty();
        for file in 0..8 {
            s.put(Piece::new(Color::White, BACK_RANK[file as usize]), Square::from_coords(file, 0));
            s.put(Piece::new(Color::White, PieceKind::Pawn), Square::from_coords(file, 1));
            s.put(Piece::new(Color::Black, PieceKind::Pawn), Square::from_coords(file, 6));
            s.put(Piece::new(Color::Black, BACK_RANK[file as usize]), Square::from_coords(file, 7));
        }
        s.set_castling(CastlingRights::ALL);
        s.snapshot_before();
        s
    }

    /// An empty board with White to sense and no rights.
    pub(crate) fn empty() -> WorldState {
        WorldState {
            colors: [Bitboard::EMPTY; 2],
            kinds: [Bitboard::EMPTY; 6],
            before_colors: [Bitboard::EMPTY; 2],
            before_kinds: [Bitboard::EMPTY; 6],
            hash: 0,
            memo: [[MoveMemo::NONE; 2]; 2],
            side: Color::White,
            phase: Phase::Sense,
            castling: CastlingRights::NONE,
            en_passant: None,
            ply: 0,
        }
    }

    #[inline]
    pub fn side_to_move(&self) -> Color {
        self.side
    }

    #[inline]
    pub fn phase(&self) -> Phase {
        self.phase
    }

    #[inline]
    pub fn castling(&self) -> CastlingRights {
        self.castling
    }

    #[inline]
    pub fn en_passant(&self) -> Option<Square> {
        self.en_passant
    }

    /// Number of moves (including passes) played so far.
    #[inline]
    pub fn ply(&self) -> u16 {
        self.ply
    }

    /// Zobrist hash of the identity fields, maintained incrementally.
    #[inline]
    pub fn zobrist(&self) -> u64 {
        self.hash
    }

    #[inline]
    pub fn occupied_by(&self, color: Color) -> Bitboard {
        self.colors[color.index()]
    }

    #[inline]
    pub fn occupancy(&self) -> Bitboard {
        self.colors[0] | self.colors[1]
    }

    #[inline]
    pub fn kind_mask(&self, kind: PieceKind) -> Bitboard {
        self.kinds[kind.index()]
    }

    #[inline]
    pub fn pieces(&self, color: Color, kind: PieceKind) -> Bitboard {
        self.colors[color.index()] & self.kinds[kind.index()]
    }

    /// Pieces of `color` and `kind` as they stood before the latest move.
    #[inline]
    pub fn pieces_before(&self, color: Color, kind: PieceKind) -> Bitboard {
        self.before_colors[color.index()] & self.before_kinds[kind.index()]
    }

    #[inline]
    pub fn occupied_before(&self, color: Color) -> Bitboard {
        self.before_colors[color.index()]
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        let color = if self.colors[0].contains(sq) {
            Color::White
        } else if self.colors[1].contains(sq) {
            Color::Black
        } else {
            return None;
        };
        let kind = PieceKind::ALL.into_iter().find(|k| self.kinds[k.index()].contains(sq))?;
        Some(Piece::new(color, kind))
    }

    #[inline]
    pub fn king_square(&self, color: Color) -> Option<Square> {
        self.pieces(color, PieceKind::King).first()
    }

    /// The game ends when a king has been captured.
    #[inline]
    pub fn is_terminal(&self) -> bool {
        self.pieces(Color::White, PieceKind::King).is_empty() || self.pieces(Color::Black, PieceKind::King).is_empty()
    }

    pub fn winner(&self) -> Option<Color> {
        match (self.pieces(Color::White, PieceKind::King).any(), self.pieces(Color::Black, PieceKind::King).any()) {
            (true, false) => Some(Color::White),
            (false, true) => Some(Color::Black),
            _ => None,
        }
    }

    /// Latest move of `color` (`[0]`) and the one before it (`[1]`).
    #[inline]
    pub fn moves_of(&self, color: Color) -> [MoveMemo; 2] {
        self.memo[color.index()]
    }

    /// Squares attacked by every piece of `color`.
    pub fn attacks_by(&self, color: Color) -> Bitboard {
        let occ = self.occupancy();
        let mut out = Bitboard::EMPTY;
        for kind in PieceKind::ALL {
            for sq in self.pieces(color, kind) {
                out |= attacks::piece(kind, color, sq, occ);
            }
        }
        out
    }

    /// Same placement, side, phase, castling rights and en passant square.
    #[inline]
    pub fn same_identity(&self, other: &WorldState) -> bool {
        self.hash == other.hash
            && self.colors == other.colors
            && self.kinds == other.kinds
            && self.side == other.side
            && self.phase == other.phase
            && self.castling == other.castling
            && self.en_passant == other.en_passant
    }

    /// Whether the piece placement (only) is identical.
    #[inline]
    pub fn same_placement(&self, other: &WorldState) -> bool {
        self.colors == other.colors && self.kinds == other.kinds
    }

    /// Recomputes the hash from scratch.
    pub fn zobrist_from_scratch(&self) -> u64 {
        let mut h = 0;
        for color in Color::ALL {
            for kind in PieceKind::ALL {
                for sq in self.pieces(color, kind) {
                    h ^= zobrist::piece(color, kind, sq);
                }
            }
        }
        if self.side == Color::Black {
            h ^= zobrist::side();
        }
        h ^ zobrist::phase(self.phase) ^ zobrist::castling(self.castling.bits()) ^ zobrist::en_passant(self.en_passant)
    }

    // ---- construction helpers ----

    pub(crate) fn put(&mut self, piece: Piece, sq: Square) {
        debug_assert!(!self.occupancy().contains(sq));
        self.colors[piece.color.index()].insert(sq);
        self.kinds[piece.kind.index()].insert(sq);
        self.hash ^= zobrist::piece(piece.color, piece.kind, sq);
    }

    pub(crate) fn take(&mut self, piece: Piece, sq: Square) {
        self.colors[piece.color.index()].remove(sq);
        self.kinds[piece.kind.index()].remove(sq);
        self.hash ^= zobrist::piece(piece.color, piece.kind, sq);
    }

    pub(crate) fn set_castling(&mut self, rights: CastlingRights) {
        self.hash ^= zobrist::castling(self.castling.bits() ^ rights.bits());
        self.castling = rights;
    }

    pub(crate) fn set_en_passant(&mut self, sq: Option<Square>) {
        self.hash ^= zobrist::en_passant(self.en_passant) ^ zobrist::en_passant(sq);
        self.en_passant = sq;
    }

    pub(crate) fn set_side(&mut self, side: Color) {
        if side != self.side {
            self.hash ^= zobrist::side();
            self.side = side;
        }
    }

    pub(crate) fn set_phase(&mut self, phase: Phase) {
        self.hash ^= zobrist::phase(self.phase) ^ zobrist::phase(phase);
        self.phase = phase;
    }

    pub(crate) fn snapshot_before(&mut self) {
        self.before_colors = self.colors;
        self.before_kinds = self.kinds;
    }

    // ---- transitions ----

    /// Sense: only the phase advances.
    pub fn after_sense(&self) -> WorldState {
        let mut next = self.clone();
        next.set_phase(Phase::Move);
        next
    }

    /// Plays an executed move (already substituted) or a pass (`None`) and
    /// returns the successor with the capture square, if any.
    pub(crate) fn after_move(&self, mv: Option<Move>) -> (WorldState, Option<Square>) {
        let mut next = self.clone();
        let capture = match mv {
            Some(mv) => next.make_move(mv),
            None => {
                next.snapshot_before();
                next.set_en_passant(None);
                None
            }
        };
        let memo = match mv {
            Some(mv) => MoveMemo { from: Some(mv.from), to: Some(mv.to), capture },
            None => MoveMemo::NONE,
        };
        let us = self.side.index();
        next.memo[us][1] = next.memo[us][0];
        next.memo[us][0] = memo;
        next.set_side(self.side.opponent());
        next.set_phase(Phase::Sense);
        next.ply = self.ply.saturating_add(1);
        (next, capture)
    }

    /// Square a executable move would capture on, without playing it.
    #[inline]
    pub(crate) fn capture_square_of(&self, mv: Move) -> Option<Square> {
        let them = self.occupied_by(self.side.opponent());
        if them.contains(mv.to) {
            return Some(mv.to);
        }
        if Some(mv.to) == self.en_passant
            && self.pieces(self.side, PieceKind::Pawn).contains(mv.from)
            && mv.from.file() != mv.to.file()
        {
            let victim = Square::from_coords(mv.to.file(), mv.from.rank());
            if them.contains(victim) {
                return Some(victim);
            }
        }
        None
    }

    fn make_move(&mut self, mv: Move) -> Option<Square> {
        let us = self.side;
        let them = us.opponent();
        let mover = self.piece_at(mv.from).expect("executed move starts on an occupied square");
        debug_assert_eq!(mover.color, us);
        self.snapshot_before();

        let mut capture = None;
        if mover.kind == PieceKind::Pawn
            && Some(mv.to) == self.en_passant
            && mv.from.file() != mv.to.file()
            && !self.occupancy().contains(mv.to)
        {
            let victim_sq = Square::from_coords(mv.to.file(), mv.from.rank());
            if let Some(victim) = self.piece_at(victim_sq) {
                self.take(victim, victim_sq);
                capture = Some(victim_sq);
            }
        } else if let Some(victim) = self.piece_at(mv.to) {
            debug_assert_eq!(victim.color, them);
            self.take(victim, mv.to);
            capture = Some(mv.to);
        }

        self.take(mover, mv.from);
        let placed = match (mover.kind, mv.promotion) {
            (PieceKind::Pawn, Some(k)) => Piece::new(us, k),
            _ => mover,
        };
        self.put(placed, mv.to);

        let mut rights = self.castling;
        if mover.kind == PieceKind::King {
            rights.clear(CastlingRights::flag(us, true) | CastlingRights::flag(us, false));
            if mv.from == king_home(us) && mv.from.file().abs_diff(mv.to.file()) == 2 {
                let kingside = mv.to.file() > mv.from.file();
                let rook_from = rook_home(us, kingside);
                let rook_to = Square::from_coords(if kingside { 5 } else { 3 }, mv.from.rank());
                let rook = Piece::new(us, PieceKind::Rook);
                self.take(rook, rook_from);
                self.put(rook, rook_to);
            }
        }
        for color in Color::ALL {
            for kingside in [true, false] {
                let home = rook_home(color, kingside);
                if home == mv.from || home == mv.to {
                    rights.clear(CastlingRights::flag(color, kingside));
                }
            }
        }
        self.set_castling(rights);

        let ep = if mover.kind == PieceKind::Pawn && mv.from.rank().abs_diff(mv.to.rank()) == 2 {
            Some(Square::from_coords(mv.from.file(), (mv.from.rank() + mv.to.rank()) / 2))
        } else {
            None
        };
        self.set_en_passant(ep);
        capture
    }
}

impl PartialEq for WorldState {
    fn eq(&self, other: &WorldState) -> bool {
        self.same_identity(other)
    }
}

impl Eq for WorldState {}

impl Hash for WorldState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}

impl std::fmt::Debug for WorldState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "WorldState({self})")
    }
}
