//! Key types and the operations a map needs from them.
//!
//! A key type supplies a hash over [`UniversalConsts`] and a total order. Both
//! take a *context*: integer keys use `()`, while string keys are [`Slice`]s
//! into a shared byte array. Comparisons take one context per side, because a
//! needle usually lives in a different array than the keys stored in a map.

use std::cmp::Ordering;
use std::marker::PhantomData;

use thiserror::Error;

use crate::hashes::{hash_bytes, hash_u64, hash_u64_wide, UniversalConsts};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyError {
    #[error("negative slice bound (offset {offset}, length {length})")]
    Negative { offset: i64, length: i64 },
    #[error("slice {offset}+{length} exceeds context of length {ctx_len}")]
    OutOfBounds {
        offset: usize,
        length: usize,
        ctx_len: usize,
    },
}

/// An `(offset, length)` window into a context array.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Slice {
    pub offset: usize,
    pub length: usize,
}

impl Slice {
    pub const fn new(offset: usize, length: usize) -> Self {
        Slice { offset, length }
    }

    pub fn mk(i: i64, n: i64) -> Result<Self, KeyError> {
        if i < 0 || n < 0 {
            return Err(KeyError::Negative { offset: i, length: n });
        }
        Ok(Slice::new(i as usize, n as usize))
    }

    pub fn unmk(self) -> (i64, i64) {
        (self.offset as i64, self.length as i64)
    }

    /// The elements of `ctx` this slice covers.
    pub fn get<T>(self, ctx: &[T]) -> Result<&[T], KeyError> {
        self.offset
            .checked_add(self.length)
            .and_then(|end| ctx.get(self.offset..end))
            .ok_or(KeyError::OutOfBounds {
                offset: self.offset,
                length: self.length,
                ctx_len: ctx.len(),
            })
    }
}

/// Everything a map needs to know about its key type.
pub trait KeySpec {
    /// Shared data keys are resolved against.
    type Ctx: ?Sized + ToOwned;
    type Key: Copy + Send + Sync;

    /// Number of hash constants.
    const M: usize;

    /// Hash of `key` under `consts`, in `[0, 2^61 - 1)`.
    ///
    /// Panics if `key` does not resolve in `ctx`; use [`KeySpec::check`] first
    /// on untrusted keys.
    fn hash(ctx: &Self::Ctx, consts: &UniversalConsts, key: &Self::Key) -> u64;

    /// Total order on `(context, key)` pairs.
    fn compare(a: (&Self::Ctx, &Self::Key), b: (&Self::Ctx, &Self::Key)) -> Ordering;

    fn check(_ctx: &Self::Ctx, _key: &Self::Key) -> Result<(), KeyError> {
        Ok(())
    }

    fn leq(a: (&Self::Ctx, &Self::Key), b: (&Self::Ctx, &Self::Key)) -> bool {
        Self::compare(a, b) != Ordering::Greater
    }

    fn eq(a: (&Self::Ctx, &Self::Key), b: (&Self::Ctx, &Self::Key)) -> bool {
        Self::compare(a, b) == Ordering::Equal
    }
}

/// 64-bit integer keys, no context.
#[derive(Clone, Copy, Debug, Default)]
pub struct U64Keys;

impl KeySpec for U64Keys {
    type Ctx = ();
    type Key = u64;
    const M: usize = 2;

    #[inline]
    fn hash(_: &(), consts: &UniversalConsts, key: &u64) -> u64 {
        hash_u64_wide(consts, *key)
    }

    #[inline]
    fn compare(a: (&(), &u64), b: (&(), &u64)) -> Ordering {
        a.1.cmp(b.1)
    }

    #[inline]
    fn eq(a: (&(), &u64), b: (&(), &u64)) -> bool {
        a.1 == b.1
    }
}

/// Byte keys, no context. Mostly useful as the element type of [`SliceKeys`].
#[derive(Clone, Copy, Debug, Default)]
pub struct U8Keys;

impl KeySpec for U8Keys {
    type Ctx = ();
    type Key = u8;
    const M: usize = 2;

    fn hash(_: &(), consts: &UniversalConsts, key: &u8) -> u64 {
        hash_u64(consts, *key as u64)
    }

    fn compare(a: (&(), &u8), b: (&(), &u8)) -> Ordering {
        a.1.cmp(b.1)
    }
}

/// Slices of a byte context, ordered lexicographically by content using the
/// element order `E`. A proper prefix sorts before its extensions.
pub struct SliceKeys<E = U8Keys>(PhantomData<E>);

/// String keys: byte slices under the natural byte order.
pub type StrKeys = SliceKeys<U8Keys>;

impl<E> KeySpec for SliceKeys<E>
where
    E: KeySpec<Ctx = (), Key = u8>,
{
    type Ctx = [u8];
    type Key = Slice;
    const M: usize = 3;

    #[inline]
    fn hash(ctx: &[u8], consts: &UniversalConsts, key: &Slice) -> u64 {
        hash_bytes(consts, &ctx[key.offset..key.offset + key.length])
    }

    fn compare(a: (&[u8], &Slice), b: (&[u8], &Slice)) -> Ordering {
        let xs = &a.0[a.1.offset..a.1.offset + a.1.length];
        let ys = &b.0[b.1.offset..b.1.offset + b.1.length];
        for (x, y) in xs.iter().zip(ys) {
            match E::compare((&(), x), (&(), y)) {
                Ordering::Equal => {}
                other => return other,
            }
        }
        xs.len().cmp(&ys.len())
    }

    #[inline]
    fn eq(a: (&[u8], &Slice), b: (&[u8], &Slice)) -> bool {
        a.1.length == b.1.length && Self::compare(a, b) == Ordering::Equal
    }

    fn check(ctx: &[u8], key: &Slice) -> Result<(), KeyError> {
        key.get(ctx).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashes::{draw_consts, Level, Seed};
    use proptest::prelude::*;

    #[test]
    fn slice_construction() {
        assert_eq!(Slice::mk(0, 0), Ok(Slice::new(0, 0)));
        assert_eq!(Slice::mk(3, 2), Ok(Slice { offset: 3, length: 2 }));
        assert_eq!(Slice::mk(3, 2).unwrap().unmk(), (3, 2));
        assert!(matches!(Slice::mk(-1, 2), Err(KeyError::Negative { .. })));
        assert!(matches!(Slice::mk(1, -2), Err(KeyError::Negative { .. })));
    }

    #[test]
    fn slice_get() {
        let ctx = ['a', 'b', 'c', 'd'];
        assert_eq!(Slice::new(1, 2).get(&ctx), Ok(&['b', 'c'][..]));
        assert_eq!(Slice::new(0, 0).get(&['a']), Ok(&[][..]));
        assert_eq!(
            Slice::new(0, 4).get(&['a', 'b', 'c']),
            Err(KeyError::OutOfBounds {
                offset: 0,
                length: 4,
                ctx_len: 3
            })
        );
        assert!(Slice::new(usize::MAX, 2).get(&ctx).is_err());
    }

    #[test]
    fn slice_order_compares_content_across_contexts() {
        let ab = Slice::new(0, 2);
        assert!(StrKeys::eq((b"ab", &ab), (b"ab", &ab)));
        assert!(StrKeys::eq((b"abc", &ab), (b"zab", &Slice::new(1, 2))));

        let b = Slice::new(0, 1);
        assert!(StrKeys::leq((b"ab", &ab), (b"b", &b)));
        assert!(!StrKeys::leq((b"b", &b), (b"ab", &ab)));
        // prefix first
        assert_eq!(
            StrKeys::compare((b"ab", &Slice::new(0, 1)), (b"ab", &ab)),
            Ordering::Less
        );
    }

    #[test]
    fn check_reports_out_of_bounds() {
        assert!(StrKeys::check(b"abc", &Slice::new(1, 2)).is_ok());
        assert!(StrKeys::check(b"abc", &Slice::new(2, 2)).is_err());
        assert!(U64Keys::check(&(), &5).is_ok());
    }

    /// Reverse byte order, to exercise the element-order parameter.
    struct RevBytes;
    impl KeySpec for RevBytes {
        type Ctx = ();
        type Key = u8;
        const M: usize = 2;
        fn hash(_: &(), consts: &UniversalConsts, key: &u8) -> u64 {
            hash_u64(consts, *key as u64)
        }
        fn compare(a: (&(), &u8), b: (&(), &u8)) -> Ordering {
            b.1.cmp(a.1)
        }
    }

    #[test]
    fn element_order_is_pluggable() {
        let (a, b) = (Slice::new(0, 1), Slice::new(1, 1));
        assert!(SliceKeys::<RevBytes>::leq((b"ba", &a), (b"ba", &b)));
        assert!(StrKeys::leq((b"ba", &b), (b"ba", &a)));
    }

    fn ctx_and_slice() -> impl Strategy<Value = (Vec<u8>, Slice)> {
        prop::collection::vec(0u8..4, 0..12).prop_flat_map(|ctx| {
            let len = ctx.len();
            (Just(ctx), 0..=len).prop_flat_map(move |(ctx, off)| {
                (Just(ctx), (off..=len).prop_map(move |end| Slice::new(off, end - off)))
            })
        })
    }

    proptest! {
        #[test]
        fn eq_is_content_equality((c1, k1) in ctx_and_slice(), (c2, k2) in ctx_and_slice()) {
            let content_eq = k1.get(&c1).unwrap() == k2.get(&c2).unwrap();
            prop_assert_eq!(StrKeys::eq((&c1, &k1), (&c2, &k2)), content_eq);
        }

        #[test]
        fn equal_keys_hash_equally((c1, k1) in ctx_and_slice(), (c2, k2) in ctx_and_slice(), seed in any::<u64>()) {
            let consts = draw_consts(Seed(seed), Level::Two, 0, 0, 3);
            if StrKeys::eq((&c1, &k1), (&c2, &k2)) {
                prop_assert_eq!(StrKeys::hash(&c1, &consts, &k1), StrKeys::hash(&c2, &consts, &k2));
            }
        }

        #[test]
        fn leq_is_a_total_order(a in ctx_and_slice(), b in ctx_and_slice(), c in ctx_and_slice()) {
            let (a, b, c) = ((&a.0[..], &a.1), (&b.0[..], &b.1), (&c.0[..], &c.1));
            prop_assert!(StrKeys::leq(a, a));
            prop_assert!(StrKeys::leq(a, b) || StrKeys::leq(b, a));
            if StrKeys::leq(a, b) && StrKeys::leq(b, a) {
                prop_assert!(StrKeys::eq(a, b));
            }
            if StrKeys::leq(a, b) && StrKeys::leq(b, c) {
                prop_assert!(StrKeys::leq(a, c));
            }
        }
    }
}
