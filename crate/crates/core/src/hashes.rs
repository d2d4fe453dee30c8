//! Universal hashing over the Mersenne field `2^61 - 1`, and the
//! counter-mode generator that draws hash constants.
//!
//! Constants are never pulled from a stateful stream. Each one is a pure
//! function of `(seed, level, bucket, trial, lane)`, so any two algorithms
//! that ask for the same tuple get the same constants regardless of the order
//! they ask in.

use std::fmt;

use thiserror::Error;

use crate::keys::{KeyError, Slice};

/// The field modulus `P = 2^61 - 1`.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// Largest constant count any key type uses.
pub const MAX_CONSTS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HashError {
    #[error("expected between 1 and {MAX_CONSTS} constants, got {0}")]
    BadCount(usize),
    #[error("constant {0} is not below the field modulus")]
    OutOfField(u64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed(pub u64);

/// Which level of the two-level table a constant is drawn for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    One = 1,
    Two = 2,
}

/// Parameters selecting one member of a universal family.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct UniversalConsts {
    vals: [u64; MAX_CONSTS],
    len: u8,
}

impl UniversalConsts {
    /// Wraps hand-picked constants. Every value must lie in `[0, P)`.
    pub fn new(vals: &[u64]) -> Result<Self, HashError> {
        if vals.is_empty() || vals.len() > MAX_CONSTS {
            return Err(HashError::BadCount(vals.len()));
        }
        if let Some(&bad) = vals.iter().find(|&&v| v >= MERSENNE_61) {
            return Err(HashError::OutOfField(bad));
        }
        let mut buf = [0u64; MAX_CONSTS];
        buf[..vals.len()].copy_from_slice(vals);
        Ok(UniversalConsts {
            vals: buf,
            len: vals.len() as u8,
        })
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.vals[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> u64 {
        self.vals[i]
    }

    #[inline]
    pub(crate) fn raw(&self) -> [u64; MAX_CONSTS] {
        self.vals
    }

    /// Inverse of [`UniversalConsts::raw`] for values that were already valid.
    #[inline]
    pub(crate) fn from_raw(vals: [u64; MAX_CONSTS], len: u8) -> Self {
        UniversalConsts { vals, len }
    }
}

impl fmt::Debug for UniversalConsts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

/// Reduces any `u64` into `[0, P)`.
#[inline]
pub fn reduce61(x: u64) -> u64 {
    let r = (x & MERSENNE_61) + (x >> 61);
    if r >= MERSENNE_61 {
        r - MERSENNE_61
    } else {
        r
    }
}

/// `a * b mod P` for `a, b < P`.
#[inline]
pub fn mul_mod61(a: u64, b: u64) -> u64 {
    let p = a as u128 * b as u128;
    let lo = (p as u64) & MERSENNE_61;
    let hi = (p >> 61) as u64;
    reduce61(lo + hi)
}

/// `a + b mod P` for `a, b < P`.
#[inline]
pub fn add_mod61(a: u64, b: u64) -> u64 {
    reduce61(a + b)
}

// splitmix64 finaliser
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn absorb(state: u64, x: u64) -> u64 {
    mix64(state ^ mix64(x.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

/// Draws `m` constants in `[1, P)` for the given coordinates.
pub fn draw_consts(seed: Seed, level: Level, bucket: u64, trial: u32, m: usize) -> UniversalConsts {
    assert!((1..=MAX_CONSTS).contains(&m), "constant count {m} out of range");
    let mut state = absorb(mix64(seed.0), level as u64);
    state = absorb(state, bucket);
    state = absorb(state, trial as u64);
    let mut vals = [0u64; MAX_CONSTS];
    for (lane, v) in vals.iter_mut().take(m).enumerate() {
        *v = 1 + absorb(state, lane as u64) % (MERSENNE_61 - 1);
    }
    UniversalConsts { vals, len: m as u8 }
}

/// `(a * x + b) mod P` with `x = key mod P`; `consts` is `[a, b]`.
#[inline]
pub fn hash_u64(consts: &UniversalConsts, key: u64) -> u64 {
    debug_assert_eq!(consts.len(), 2);
    let x = reduce61(key);
    add_mod61(mul_mod61(consts.get(0), x), consts.get(1))
}

/// Hash of a full 64-bit key with `consts = [a, b]`.
///
/// [`hash_u64`] cannot tell `k` from `k + P`. Here the key is split into
/// 32-bit halves `hi`, `lo`, both already field elements, and hashed as
/// `(a * (a * hi + lo) + b) mod P`. Keys below `2^32` hash exactly as in
/// [`hash_u64`].
#[inline]
pub fn hash_u64_wide(consts: &UniversalConsts, key: u64) -> u64 {
    debug_assert_eq!(consts.len(), 2);
    let a = consts.get(0);
    let inner = add_mod61(mul_mod61(a, key >> 32), key & 0xffff_ffff);
    add_mod61(mul_mod61(a, inner), consts.get(1))
}

/// Polynomial fingerprint of a byte string followed by an affine step.
///
/// With `consts = [r, a, b]` and bytes `x_0 .. x_{len-1}`:
/// `f = (sum x_i * r^i + len * r^len) mod P`, result `(a * f + b) mod P`.
/// Only the content matters, never where the bytes live.
#[inline]
pub fn hash_bytes(consts: &UniversalConsts, bytes: &[u8]) -> u64 {
    debug_assert_eq!(consts.len(), 3);
    let r = consts.get(0);
    let mut acc = 0u64;
    let mut pow = 1u64;
    for &x in bytes {
        acc = add_mod61(acc, mul_mod61(x as u64, pow));
        pow = mul_mod61(pow, r);
    }
    let f = add_mod61(acc, mul_mod61(reduce61(bytes.len() as u64), pow));
    add_mod61(mul_mod61(consts.get(1), f), consts.get(2))
}

/// [`hash_bytes`] of the bytes `s` selects from `ctx`.
pub fn hash_slice(consts: &UniversalConsts, ctx: &[u8], s: Slice) -> Result<u64, KeyError> {
    Ok(hash_bytes(consts, s.get(ctx)?))
}
