//! 64-bit mixing helpers shared by Zobrist keys, set hashes and table keys.

pub(crate) const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
#[inline]
pub(crate) const fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines two words into one; not symmetric.
#[inline]
pub(crate) const fn mix(a: u64, b: u64) -> u64 {
    mix64(a ^ b.wrapping_mul(GOLDEN))
}
