//! The 104-plane synopsis of a limited state set.
//!
//! Plane `i` folds a per-state predicate `g_i` over the members with AND
//! ("definitely" planes) or OR ("possibly"/"somehow" planes). Planes about the
//! viewer's own pieces and history are the same for every member of a
//! consistent set and are read from the first member. Boards are oriented so
//! the viewer's back rank is rank 1.

use crate::game::{attacks, Bitboard, Color, Phase, PieceKind, Square, WorldState};

pub const PLANES: usize = 104;

/// Plane indices referred to elsewhere.
pub mod plane {
    pub const STAGE: usize = 10;
    pub const NOT_OWN: usize = 11;
    /// First of six own-piece planes, pawn to king.
    pub const OWN_PIECES: usize = 12;
    pub const DEF_NOT_OPP: usize = 18;
    /// First of six definite opposing-piece planes.
    pub const DEF_OPP: usize = 19;
    pub const POSS_NOT_OPP: usize = 25;
    /// First of six possible opposing-piece planes.
    pub const POSS_OPP: usize = 26;
    pub const LAST_FROM: usize = 32;
    pub const LAST_TO: usize = 33;
    pub const LAST_OWN_CAPTURE: usize = 34;
    pub const LAST_OPP_CAPTURE: usize = 35;
    pub const POSS_SAFE_OPP_KING: usize = 65;
    pub const KNOWN: usize = 68;
    pub const ALL_OWN: usize = 79;
    pub const DEF_EMPTY: usize = 80;
}

/// East, West, South, North, rank 1, rank 8, a-file, h-file, dark, light.
pub const CONSTANT_PLANES: [u64; 10] = [
    0xF0F0_F0F0_F0F0_F0F0,
    0x0F0F_0F0F_0F0F_0F0F,
    0x0000_0000_FFFF_FFFF,
    0xFFFF_FFFF_0000_0000,
    0x0000_0000_0000_00FF,
    0xFF00_0000_0000_0000,
    0x0101_0101_0101_0101,
    0x8080_8080_8080_8080,
    0xAA55_AA55_AA55_AA55,
    0x55AA_55AA_55AA_55AA,
];

/// `(definitely, possibly)` plane pairs over the same predicate; the first
/// is always a subset of the second.
pub const AND_OR_PAIRS: [(usize, usize); 29] = [
    (18, 25),
    (19, 26),
    (20, 27),
    (21, 28),
    (22, 29),
    (23, 30),
    (24, 31),
    (36, 38),
    (39, 41),
    (42, 43),
    (45, 46),
    (47, 48),
    (51, 52),
    (53, 54),
    (55, 56),
    (57, 58),
    (59, 60),
    (61, 62),
    (71, 72),
    (74, 75),
    (77, 78),
    (83, 82),
    (86, 93),
    (87, 94),
    (88, 95),
    (89, 96),
    (90, 97),
    (91, 98),
    (92, 99),
];

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Fold {
    Constant,
    /// Read from the first member.
    First,
    And,
    Or,
}

const AND_PLANES: &[usize] = &[
    18, 19, 20, 21, 22, 23, 24, 36, 37, 39, 40, 42, 44, 45, 47, 51, 53, 55, 57, 59, 61, 68, 71, 74, 77, 80, 83, 86, 87,
    88, 89, 90, 91, 92,
];

const OR_PLANES: &[usize] = &[
    25, 26, 27, 28, 29, 30, 31, 38, 41, 43, 46, 48, 49, 50, 52, 54, 56, 58, 60, 62, 63, 64, 65, 66, 67, 72, 75, 78, 82,
    93, 94, 95, 96, 97, 98, 99,
];

pub const FOLDS: [Fold; PLANES] = {
    let mut f = [Fold::First; PLANES];
    let mut i = 0;
    while i < CONSTANT_PLANES.len() {
        f[i] = Fold::Constant;
        i += 1;
    }
    i = 0;
    while i < AND_PLANES.len() {
        f[AND_PLANES[i]] = Fold::And;
        i += 1;
    }
    i = 0;
    while i < OR_PLANES.len() {
        f[OR_PLANES[i]] = Fold::Or;
        i += 1;
    }
    f
};

/// A stack of 104 bitboards.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Synopsis {
    pub planes: [Bitboard; PLANES],
    /// Whose view the planes encode; boards are flipped for Black.
    pub perspective: Color,
}

impl std::fmt::Debug for Synopsis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Synopsis").field("set_bits", &self.planes.iter().map(|p| p.count()).sum::<u32>()).finish()
    }
}

impl Synopsis {
    #[inline]
    pub fn plane(&self, i: usize) -> Bitboard {
        self.planes[i]
    }

    /// Bit `sq` of plane `i` as 0.0 or 1.0.
    #[inline]
    pub fn bit(&self, i: usize, sq: usize) -> f32 {
        (self.planes[i].0 >> sq & 1) as f32
    }
}

struct Attacks {
    any: Bitboard,
    double: Bitboard,
    by_kind: [Bitboard; 6],
}

fn attacks_of(x: &WorldState, color: Color) -> Attacks {
    let occ = x.occupancy();
    let mut a = Attacks { any: Bitboard::EMPTY, double: Bitboard::EMPTY, by_kind: [Bitboard::EMPTY; 6] };
    for kind in PieceKind::ALL {
        for sq in x.pieces(color, kind) {
            let t = attacks::piece(kind, color, sq, occ);
            a.double |= a.any & t;
            a.any |= t;
            a.by_kind[kind.index()] |= t;
        }
    }
    a
}

/// Destination squares of `color`'s executable moves, and squares reached by
/// at least two distinct moves. En passant is ignored; castling counts by the
/// king's destination.
fn destinations_of(x: &WorldState, color: Color) -> (Bitboard, Bitboard, Bitboard) {
    let own = x.occupied_by(color);
    let theirs = x.occupied_by(color.opponent());
    let occ = own | theirs;
    let mut any = Bitboard::EMPTY;
    let mut double = Bitboard::EMPTY;
    let mut add = |d: Bitboard| {
        double |= any & d;
        any |= d;
    };
    let dir: i8 = if color == Color::White { 1 } else { -1 };
    let start = if color == Color::White { 1 } else { 6 };
    for from in x.pieces(color, PieceKind::Pawn) {
        let mut d = attacks::pawn(color, from) & theirs;
        if let Some(one) = from.offset(0, dir) {
            if !occ.contains(one) {
                d.insert(one);
                if from.rank() == start {
                    let two = one.offset(0, dir).unwrap();
                    if !occ.contains(two) {
                        d.insert(two);
                    }
                }
            }
        }
        add(d);
    }
    for kind in [PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook, PieceKind::Queen, PieceKind::King] {
        for from in x.pieces(color, kind) {
            add(attacks::piece(kind, color, from, occ) & !own);
        }
    }
    let castles = castle_targets(x, color, occ);
    add(castles);
    (any, double, castles)
}

/// King destinations of castling moves `color` could execute now.
fn castle_targets(x: &WorldState, color: Color, blockers: Bitboard) -> Bitboard {
    let mut out = Bitboard::EMPTY;
    let king = crate::game::king_home(color);
    if !x.pieces(color, PieceKind::King).contains(king) {
        return out;
    }
    for kingside in [true, false] {
        let rook = crate::game::rook_home(color, kingside);
        if x.castling().has(color, kingside)
            && x.pieces(color, PieceKind::Rook).contains(rook)
            && (attacks::between(king, rook) & blockers).is_empty()
        {
            out.insert(Square::from_coords(if kingside { 6 } else { 2 }, king.rank()));
        }
    }
    out
}

fn opt_bb(sq: Option<Square>) -> Bitboard {
    sq.map_or(Bitboard::EMPTY, Square::bb)
}

/// Planes read from a single member: own pieces, own king geometry and the
/// move history the viewer observed.
fn first_planes(x: &WorldState, me: Color, out: &mut [u64; PLANES]) {
    let opp = me.opponent();
    let own = x.occupied_by(me);
    out[plane::STAGE] = if x.phase() == Phase::Sense { !0 } else { 0 };
    out[plane::NOT_OWN] = (!own).0;
    for kind in PieceKind::ALL {
        out[plane::OWN_PIECES + kind.index()] = x.pieces(me, kind).0;
    }
    let mine = x.moves_of(me);
    let theirs = x.moves_of(opp);
    out[32] = opt_bb(mine[0].from).0;
    out[33] = opt_bb(mine[0].to).0;
    out[34] = opt_bb(mine[0].capture).0;
    out[35] = opt_bb(theirs[0].capture).0;
    let king = x.king_square(me);
    let ring = |f: fn(Square) -> Bitboard| king.map_or(0, |k| f(k).0);
    out[69] = ring(attacks::king);
    out[70] = ring(attacks::knight);
    out[73] = king.map_or(0, |k| attacks::bishop(k, own).0);
    out[76] = king.map_or(0, |k| attacks::rook(k, own).0);
    out[79] = own.0;
    out[81] = x.castling().of(me).rook_homes().0;
    let mut qr = Bitboard::EMPTY;
    let mut qb = Bitboard::EMPTY;
    for q in x.pieces(me, PieceKind::Queen) {
        qr |= attacks::rook(q, own);
        qb |= attacks::bishop(q, own);
    }
    out[84] = qr.0;
    out[85] = qb.0;
    out[100] = opt_bb(mine[1].from).0;
    out[101] = opt_bb(mine[1].to).0;
    out[102] = opt_bb(mine[1].capture).0;
    out[103] = opt_bb(theirs[1].capture).0;
}

/// Per-member values of every folded plane.
fn member_planes(x: &WorldState, me: Color, out: &mut [u64; PLANES]) {
    let opp = me.opponent();
    let theirs = x.occupied_by(opp);
    out[18] = (!theirs).0;
    out[25] = (!theirs).0;
    for kind in PieceKind::ALL {
        let b = x.pieces(opp, kind).0;
        out[19 + kind.index()] = b;
        out[26 + kind.index()] = b;
    }
    let mine = attacks_of(x, me);
    let (dest, dest2, castles) = destinations_of(x, me);
    out[36] = mine.any.0;
    out[37] = dest.0;
    out[38] = mine.any.0;
    out[39] = mine.double.0;
    out[40] = dest2.0;
    out[41] = mine.double.0;
    let pawns = mine.by_kind[0].0;
    out[42] = pawns;
    out[43] = pawns;
    out[44] = mine.by_kind[1].0;
    out[45] = mine.by_kind[2].0;
    out[46] = mine.by_kind[2].0;
    out[47] = mine.by_kind[3].0;
    out[48] = mine.by_kind[3].0;
    let without = |a: &Attacks, skip: usize| (0..6).filter(|&k| k != skip).fold(0u64, |acc, k| acc | a.by_kind[k].0);
    out[49] = without(&mine, 5);
    out[50] = without(&mine, 0);

    let them = attacks_of(x, opp);
    out[51] = them.any.0;
    out[52] = them.any.0;
    out[53] = them.double.0;
    out[54] = them.double.0;
    for (i, k) in [(55, 0), (57, 1), (59, 2), (61, 3)] {
        out[i] = them.by_kind[k].0;
        out[i + 1] = them.by_kind[k].0;
    }
    out[63] = without(&them, 5);
    out[64] = without(&them, 0);
    out[65] = match x.king_square(opp) {
        Some(k) if !mine.any.contains(k) => k.bb().0,
        _ => 0,
    };
    out[66] = destinations_of(x, opp).0 .0;
    out[67] = x.castling().of(opp).rook_homes().0;

    let king = x.king_square(me);
    let own = x.occupied_by(me);
    let near = |f: Bitboard, kind: PieceKind| (x.pieces(opp, kind) & f).0;
    let knight_ring = king.map_or(Bitboard::EMPTY, attacks::knight);
    let bishop_ring = king.map_or(Bitboard::EMPTY, |k| attacks::bishop(k, own));
    let rook_ring = king.map_or(Bitboard::EMPTY, |k| attacks::rook(k, own));
    out[71] = near(knight_ring, PieceKind::Knight);
    out[72] = out[71];
    out[74] = near(bishop_ring, PieceKind::Bishop);
    out[75] = out[74];
    out[77] = near(rook_ring, PieceKind::Rook);
    out[78] = out[77];
    out[80] = (!x.occupancy()).0;
    out[82] = castles.0;
    out[83] = castles.0;

    let before = x.occupied_before(opp);
    out[86] = (!before).0;
    out[93] = (!before).0;
    for kind in PieceKind::ALL {
        let b = x.pieces_before(opp, kind).0;
        out[87 + kind.index()] = b;
        out[94 + kind.index()] = b;
    }
}

/// Squares whose occupant in `x` differs from `base`.
fn differing(x: &WorldState, base: &WorldState) -> u64 {
    let mut d = 0;
    for c in Color::ALL {
        d |= (x.occupied_by(c) ^ base.occupied_by(c)).0;
    }
    for k in PieceKind::ALL {
        d |= (x.kind_mask(k) ^ base.kind_mask(k)).0;
    }
    d
}

/// Computes the synopsis of `members` from `perspective`'s point of view.
pub fn synopsis(members: &[WorldState], perspective: Color) -> Synopsis {
    assert!(!members.is_empty(), "synopsis of an empty set");
    let mut acc = [0u64; PLANES];
    for (i, fold) in FOLDS.iter().enumerate() {
        if *fold == Fold::And {
            acc[i] = !0;
        }
    }
    let base = &members[0];
    first_planes(base, perspective, &mut acc);
    let mut g = [0u64; PLANES];
    let mut known = !0u64;
    for x in members {
        member_planes(x, perspective, &mut g);
        for i in 0..PLANES {
            match FOLDS[i] {
                Fold::And => acc[i] &= g[i],
                Fold::Or => acc[i] |= g[i],
                _ => {}
            }
        }
        known &= !differing(x, base);
        #[cfg(debug_assertions)]
        {
            let mut check = [0u64; PLANES];
            first_planes(x, perspective, &mut check);
            for i in 0..PLANES {
                if FOLDS[i] == Fold::First {
                    debug_assert_eq!(check[i], acc[i], "plane {i} differs across members of a limited state set");
                }
            }
        }
    }
    acc[plane::KNOWN] = known;
    let mut planes = [Bitboard::EMPTY; PLANES];
    for i in 0..PLANES {
        let b = Bitboard(acc[i]);
        planes[i] = if perspective == Color::Black { b.flip_ranks() } else { b };
    }
    for (i, c) in CONSTANT_PLANES.iter().enumerate() {
        planes[i] = Bitboard(*c);
    }
    Synopsis { planes, perspective }
}
