//! Attack tables. Leapers use precomputed masks; sliders walk precomputed rays
//! and cut at the first blocker.

use super::types::{Bitboard, Color, PieceKind, Square};

// Direction order: N, E, S, W, NE, SE, SW, NW. The first two of each group of
// four move towards higher square indices.
const DIRS: [(i8, i8); 8] = [(0, 1), (1, 0), (0, -1), (-1, 0), (1, 1), (1, -1), (-1, -1), (-1, 1)];
const POSITIVE: [bool; 8] = [true, true, false, false, true, false, false, true];

const fn offset(sq: usize, df: i8, dr: i8) -> Option<usize> {
    let f = (sq % 8) as i8 + df;
    let r = (sq / 8) as i8 + dr;
    if f < 0 || f > 7 || r < 0 || r > 7 {
        None
    } else {
        Some((r * 8 + f) as usize)
    }
}

const fn leaper_table(deltas: &[(i8, i8)]) -> [u64; 64] {
    let mut out = [0u64; 64];
    let mut sq = 0;
    while sq < 64 {
        let mut i = 0;
        while i < deltas.len() {
            if let Some(t) = offset(sq, deltas[i].0, deltas[i].1) {
                out[sq] |= 1 << t;
            }
            i += 1;
        }
        sq += 1;
    }
    out
}

const fn ray_table() -> [[u64; 64]; 8] {
    let mut out = [[0u64; 64]; 8];
    let mut d = 0;
    while d < 8 {
        let mut sq = 0;
        while sq < 64 {
            let mut cur = sq;
            while let Some(t) = offset(cur, DIRS[d].0, DIRS[d].1) {
                out[d][sq] |= 1 << t;
                cur = t;
            }
            sq += 1;
        }
        d += 1;
    }
    out
}

const fn pawn_table(color: usize) -> [u64; 64] {
    let dr = if color == 0 { 1 } else { -1 };
    leaper_table(&[(-1, dr), (1, dr)])
}

static KNIGHT: [u64; 64] = leaper_table(&[(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)]);
static KING: [u64; 64] = leaper_table(&[(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)]);
static PAWN: [[u64; 64]; 2] = [pawn_table(0), pawn_table(1)];
static RAYS: [[u64; 64]; 8] = ray_table();
static SENSE: [u64; 64] = leaper_table(&[(-1, -1), (0, -1), (1, -1), (-1, 0), (0, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]);

#[inline]
pub fn knight(sq: Square) -> Bitboard {
    Bitboard(KNIGHT[sq.index()])
}

#[inline]
pub fn king(sq: Square) -> Bitboard {
    Bitboard(KING[sq.index()])
}

/// Diagonal capture targets of a pawn of `color` standing on `sq`.
#[inline]
pub fn pawn(color: Color, sq: Square) -> Bitboard {
    Bitboard(PAWN[color.index()][sq.index()])
}

/// The 3x3 sensing window centred on `sq`, clipped at the edges.
#[inline]
pub fn sense_window(sq: Square) -> Bitboard {
    Bitboard(SENSE[sq.index()])
}

#[inline]
fn ray_attacks(dir: usize, sq: Square, occ: Bitboard) -> u64 {
    let ray = RAYS[dir][sq.index()];
    let blockers = ray & occ.0;
    if blockers == 0 {
        return ray;
    }
    let b = if POSITIVE[dir] { blockers.trailing_zeros() } else { 63 - blockers.leading_zeros() };
    ray ^ RAYS[dir][b as usize]
}

#[inline]
pub fn rook(sq: Square, occ: Bitboard) -> Bitboard {
    Bitboard(ray_attacks(0, sq, occ) | ray_attacks(1, sq, occ) | ray_attacks(2, sq, occ) | ray_attacks(3, sq, occ))
}

#[inline]
pub fn bishop(sq: Square, occ: Bitboard) -> Bitboard {
    Bitboard(ray_attacks(4, sq, occ) | ray_attacks(5, sq, occ) | ray_attacks(6, sq, occ) | ray_attacks(7, sq, occ))
}

#[inline]
pub fn queen(sq: Square, occ: Bitboard) -> Bitboard {
    rook(sq, occ) | bishop(sq, occ)
}

/// Squares attacked by a piece of `kind` and `color` on `sq` given occupancy.
#[inline]
pub fn piece(kind: PieceKind, color: Color, sq: Square, occ: Bitboard) -> Bitboard {
    match kind {
        PieceKind::Pawn => pawn(color, sq),
        PieceKind::Knight => knight(sq),
        PieceKind::Bishop => bishop(sq, occ),
        PieceKind::Rook => rook(sq, occ),
        PieceKind::Queen => queen(sq, occ),
        PieceKind::King => king(sq),
    }
}

/// Squares strictly between `a` and `b` when they share a rank, file or
/// diagonal; empty otherwise.
pub fn between(a: Square, b: Square) -> Bitboard {
    for d in 0..8 {
        let ray = RAYS[d][a.index()];
        if ray >> b.index() & 1 != 0 {
            return Bitboard(ray & !RAYS[d][b.index()] & !(1 << b.index()));
        }
    }
    Bitboard::EMPTY
}

/// Whether `a` and `b` lie on a common line (rank, file or diagonal).
pub fn aligned(a: Square, b: Square) -> bool {
    (0..8).any(|d| RAYS[d][a.index()] >> b.index() & 1 != 0)
}
