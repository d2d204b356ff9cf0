//! Seeded hash family for local hashing and public ±1 vectors for HST.

use alloc::vec::Vec;

use crate::rng::mix64;
use crate::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const VECTOR_SALT: u64 = 0xA076_1D64_78BD_642F;

/// `H_seed(x)` in `1..=g`.
pub fn hash_map(seed: u64, x: usize, g: usize) -> Result<usize> {
    if g < 2 {
        return Err(Error::InvalidHashRange(g));
    }
    Ok(hash_unchecked(seed, x, g as u64) as usize)
}

#[inline]
pub(crate) fn hash_unchecked(seed: u64, x: usize, g: u64) -> u32 {
    let h = mix64(seed.wrapping_add((x as u64).wrapping_mul(GOLDEN)));
    ((h as u128 * g as u128) >> 64) as u32 + 1
}

/// Word `k` of the packed public vector: bit set means coordinate +1.
#[inline]
pub(crate) fn vector_word(seed: u64, k: usize) -> u64 {
    mix64((seed ^ VECTOR_SALT).wrapping_add((k as u64 + 1).wrapping_mul(GOLDEN)))
}

/// Coordinate `i` (1-indexed) of the public vector, as `true` for +1.
#[inline]
pub(crate) fn vector_sign(seed: u64, i: usize) -> bool {
    let k = (i - 1) / 64;
    (vector_word(seed, k) >> ((i - 1) % 64)) & 1 == 1
}

/// Public ±1 vector of length `m` derived from `seed`.
pub fn hst_vector(seed: u64, m: usize) -> Vec<i8> {
    (1..=m).map(|i| if vector_sign(seed, i) { 1 } else { -1 }).collect()
}
