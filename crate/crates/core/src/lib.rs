//! Static maps built on two-level perfect hashing.
//!
//! [`HashMap`] hashes each key to a bucket and then to a private
//! quadratic-size table inside that bucket, so a lookup costs two hash
//! evaluations and one key comparison. Construction is a sequence of flat
//! array passes with no sorting. [`ArrayMap`] provides sorted and Eytzinger
//! layouts searched by comparison, for use as baselines.
//!
//! ```
//! use fksmap::{HashMap, U64Keys};
//!
//! let m = HashMap::<U64Keys, &str>::from_array((), vec![(10, "ten"), (20, "twenty")]).unwrap();
//! assert_eq!(m.lookup(&(), &20), Some(&"twenty"));
//! assert!(!m.member(&(), &30));
//! ```

pub mod arraymap;
pub mod bench;
pub mod codec;
pub mod fks;
pub mod hashes;
pub mod hashmap;
pub mod keys;
pub mod prims;

pub use arraymap::{ArrayMap, Layout};
pub use codec::{CodecError, MapHeader};
pub use fks::{BuildError, Construction};
pub use hashes::Seed;
pub use hashmap::{HashMap, DEFAULT_SEED};
pub use keys::{KeySpec, Slice, SliceKeys, StrKeys, U64Keys};

/// Read-only map interface shared by every implementation.
pub trait StaticMap<K: KeySpec, V> {
    fn lookup(&self, needle_ctx: &K::Ctx, k: &K::Key) -> Option<&V>;
    fn member(&self, needle_ctx: &K::Ctx, k: &K::Key) -> bool;

    /// [`StaticMap::lookup`] over a batch of needles sharing one context.
    fn lookup_many<'a>(&'a self, needle_ctx: &K::Ctx, needles: &[K::Key]) -> Vec<Option<&'a V>> {
        needles.iter().map(|k| self.lookup(needle_ctx, k)).collect()
    }

    fn member_many(&self, needle_ctx: &K::Ctx, needles: &[K::Key]) -> Vec<bool> {
        needles.iter().map(|k| self.member(needle_ctx, k)).collect()
    }

    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
