//! Zobrist keys, generated at compile time from a fixed SplitMix64 stream so
//! hashes are identical across builds and platforms.

use super::types::{Color, Phase, PieceKind, Square};
use crate::hash::{mix64, GOLDEN};

const SEED: u64 = 0x5045_4E55_4D42_5241;

const PIECE_KEYS: usize = 12 * 64;
const SIDE_KEY: usize = PIECE_KEYS;
const PHASE_KEY: usize = SIDE_KEY + 1;
const CASTLE_KEYS: usize = PHASE_KEY + 1;
const EP_KEYS: usize = CASTLE_KEYS + 4;
const TOTAL: usize = EP_KEYS + 64;

const fn generate() -> [u64; TOTAL] {
    let mut keys = [0u64; TOTAL];
    let mut state = SEED;
    let mut i = 0;
    while i < TOTAL {
        state = state.wrapping_add(GOLDEN);
        keys[i] = mix64(state);
        i += 1;
    }
    keys
}

static KEYS: [u64; TOTAL] = generate();

#[inline]
pub fn piece(color: Color, kind: PieceKind, sq: Square) -> u64 {
    KEYS[(color.index() * 6 + kind.index()) * 64 + sq.index()]
}

/// Present when Black is to act.
#[inline]
pub fn side() -> u64 {
    KEYS[SIDE_KEY]
}

/// Present in the move phase.
#[inline]
pub fn phase(phase: Phase) -> u64 {
    match phase {
        Phase::Sense => 0,
        Phase::Move => KEYS[PHASE_KEY],
    }
}

/// XOR of the keys of every set castling bit.
#[inline]
pub fn castling(bits: u8) -> u64 {
    let mut h = 0;
    for i in 0..4 {
        if bits >> i & 1 != 0 {
            h ^= KEYS[CASTLE_KEYS + i];
        }
    }
    h
}

#[inline]
pub fn en_passant(sq: Option<Square>) -> u64 {
    match sq {
        Some(sq) => KEYS[EP_KEYS + sq.index()],
        None => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_distinct() {
        let mut v = KEYS.to_vec();
        v.sort_unstable();
        v.dedup();
        assert_eq!(v.len(), TOTAL);
    }
}
