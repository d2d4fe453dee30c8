//! Static hash map on top of a two-level perfect hash.

use std::borrow::Borrow;
use std::fmt;

use crate::fks::{self, BuildError, Construction};
use crate::hashes::Seed;
use crate::keys::KeySpec;
use crate::prims::{self, prefetch};
use crate::StaticMap;

/// Seed used when the caller does not pick one.
pub const DEFAULT_SEED: Seed = Seed(0x0f15_c0de_2025_0001);

/// Sentinel for an unoccupied slot.
pub const EMPTY_SLOT: i64 = -1;

pub type Ctx<K> = <<K as KeySpec>::Ctx as ToOwned>::Owned;

/// An immutable map from keys of type `K` to values of type `V`.
///
/// Keys and values stay in input order. `slots[perfect_hash(key j)] == j` for
/// every stored key `j`; all other slots hold [`EMPTY_SLOT`].
pub struct HashMap<K: KeySpec, V> {
    ctx: Ctx<K>,
    keys: Vec<K::Key>,
    vals: Vec<V>,
    slots: Vec<i64>,
    con: Construction,
    seed: Seed,
}

impl<K: KeySpec, V> HashMap<K, V> {
    /// Builds from pairs whose keys are already distinct. Repeated keys are
    /// reported as [`BuildError::ProbableDuplicates`].
    pub fn from_array_nodup(ctx: Ctx<K>, kvs: Vec<(K::Key, V)>) -> Result<Self, BuildError> {
        Self::from_array_nodup_seeded(DEFAULT_SEED, ctx, kvs)
    }

    pub fn from_array_nodup_seeded(seed: Seed, ctx: Ctx<K>, kvs: Vec<(K::Key, V)>) -> Result<Self, BuildError> {
        let (keys, vals): (Vec<_>, Vec<_>) = kvs.into_iter().unzip();
        let con = fks::make_flat::<K>(seed, ctx.borrow(), &keys)?;
        let mut slots = vec![EMPTY_SLOT; con.total_slots() as usize];
        let mut slot = [NO_SLOT; BATCH];
        let mut slot_of = [0i64; BATCH];
        for (c, chunk) in keys.chunks(BATCH).enumerate() {
            chunk_slots::<K>(&con, ctx.borrow(), chunk, &mut slot, |s| {
                if s != NO_SLOT {
                    prefetch(&slots[s]);
                }
            });
            for (to, &s) in slot_of.iter_mut().zip(&slot[..chunk.len()]) {
                assert_ne!(s, NO_SLOT, "every key's bucket is non-empty");
                *to = s as i64;
            }
            let first = (c * BATCH) as i64;
            prims::scatter_into(&mut slots, &slot_of[..chunk.len()], first..first + chunk.len() as i64)
                .expect("slots are below total_slots");
        }
        Ok(HashMap {
            ctx,
            keys,
            vals,
            slots,
            con,
            seed,
        })
    }

    /// Builds from arbitrary pairs. When a key repeats, its first value wins.
    pub fn from_array(ctx: Ctx<K>, kvs: Vec<(K::Key, V)>) -> Result<Self, BuildError> {
        Self::from_array_seeded(DEFAULT_SEED, ctx, kvs)
    }

    pub fn from_array_seeded(seed: Seed, ctx: Ctx<K>, kvs: Vec<(K::Key, V)>) -> Result<Self, BuildError> {
        if kvs.is_empty() {
            return Err(BuildError::EmptyKeys);
        }
        for (k, _) in &kvs {
            K::check(ctx.borrow(), k)?;
        }
        let kvs = dedup_first::<K, V>(ctx.borrow(), kvs);
        Self::from_array_nodup_seeded(seed, ctx, kvs)
    }

    #[inline]
    fn index_of(&self, needle_ctx: &K::Ctx, k: &K::Key) -> Option<usize> {
        let slot = self.con.perfect_hash::<K>(needle_ctx, k)?;
        let j = self.slots[slot];
        if j == EMPTY_SLOT {
            return None;
        }
        let j = j as usize;
        K::eq((self.ctx.borrow(), &self.keys[j]), (needle_ctx, k)).then_some(j)
    }

    /// Value stored for `k`, which is resolved against `needle_ctx`.
    #[inline]
    pub fn lookup(&self, needle_ctx: &K::Ctx, k: &K::Key) -> Option<&V> {
        self.index_of(needle_ctx, k).map(|j| &self.vals[j])
    }

    #[inline]
    pub fn member(&self, needle_ctx: &K::Ctx, k: &K::Key) -> bool {
        self.index_of(needle_ctx, k).is_some()
    }

    /// Values for many needles at once, all resolved against `needle_ctx`.
    ///
    /// Same results as calling [`HashMap::lookup`] on each needle, but probes
    /// are processed in small batches so their memory accesses overlap.
    pub fn lookup_many<'a>(&'a self, needle_ctx: &K::Ctx, needles: &[K::Key]) -> Vec<Option<&'a V>> {
        let mut out = Vec::with_capacity(needles.len());
        self.for_each_index(needle_ctx, needles, |j| out.push(j.map(|j| &self.vals[j])));
        out
    }

    pub fn member_many(&self, needle_ctx: &K::Ctx, needles: &[K::Key]) -> Vec<bool> {
        let mut out = Vec::with_capacity(needles.len());
        self.for_each_index(needle_ctx, needles, |j| out.push(j.is_some()));
        out
    }

    fn for_each_index(&self, needle_ctx: &K::Ctx, needles: &[K::Key], mut emit: impl FnMut(Option<usize>)) {
        let map_ctx = self.ctx.borrow();
        let mut slot = [NO_SLOT; BATCH];
        for chunk in needles.chunks(BATCH) {
            chunk_slots::<K>(&self.con, needle_ctx, chunk, &mut slot, |s| {
                if s != NO_SLOT {
                    prefetch(&self.slots[s]);
                }
            });
            for s in slot.iter_mut().take(chunk.len()) {
                if *s != NO_SLOT {
                    let j = self.slots[*s];
                    *s = if j == EMPTY_SLOT { NO_SLOT } else { j as usize };
                    if *s != NO_SLOT {
                        prefetch(&self.keys[*s]);
                        prefetch(&self.vals[*s]);
                    }
                }
            }
            for (&j, k) in slot.iter().zip(chunk) {
                emit((j != NO_SLOT && K::eq((map_ctx, &self.keys[j]), (needle_ctx, k))).then_some(j));
            }
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    /// Always false; empty maps cannot be built.
    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn ctx(&self) -> &K::Ctx {
        self.ctx.borrow()
    }

    pub fn keys(&self) -> &[K::Key] {
        &self.keys
    }

    pub fn values(&self) -> &[V] {
        &self.vals
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K::Key, &V)> {
        self.keys.iter().zip(&self.vals)
    }

    pub fn slots(&self) -> &[i64] {
        &self.slots
    }

    pub fn construction(&self) -> &Construction {
        &self.con
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    pub(crate) fn from_raw_parts(
        ctx: Ctx<K>,
        keys: Vec<K::Key>,
        vals: Vec<V>,
        slots: Vec<i64>,
        con: Construction,
        seed: Seed,
    ) -> Self {
        HashMap {
            ctx,
            keys,
            vals,
            slots,
            con,
            seed,
        }
    }
}

// probes handled together by the bulk paths
const BATCH: usize = 32;
const NO_SLOT: usize = usize::MAX;

/// Slots of up to [`BATCH`] keys, or [`NO_SLOT`] for keys in empty buckets.
/// All bucket reads are issued before any is used.
#[inline]
fn chunk_slots<K: KeySpec>(
    con: &Construction,
    ctx: &K::Ctx,
    chunk: &[K::Key],
    slot: &mut [usize; BATCH],
    mut then: impl FnMut(usize),
) {
    let mut bucket = [0usize; BATCH];
    for (g, k) in bucket.iter_mut().zip(chunk) {
        *g = con.level1_hash::<K>(ctx, k);
        con.prefetch_bucket(*g);
    }
    for ((s, &g), k) in slot.iter_mut().zip(&bucket).zip(chunk) {
        *s = con.slot_in_bucket::<K>(g, ctx, k).unwrap_or(NO_SLOT);
        then(*s);
    }
}

/// Keeps the first occurrence of every key, in input order.
pub(crate) fn dedup_first<K: KeySpec, V>(ctx: &K::Ctx, kvs: Vec<(K::Key, V)>) -> Vec<(K::Key, V)> {
    let order = prims::stable_sort_by((0..kvs.len()).collect(), |&a, &b| {
        K::compare((ctx, &kvs[a].0), (ctx, &kvs[b].0))
    });
    let mut keep = vec![false; kvs.len()];
    let mut prev: Option<usize> = None;
    for i in order {
        let fresh = prev.is_none_or(|p| !K::eq((ctx, &kvs[p].0), (ctx, &kvs[i].0)));
        if fresh {
            keep[i] = true;
            prev = Some(i);
        }
    }
    kvs.into_iter()
        .zip(keep)
        .filter_map(|(kv, k)| k.then_some(kv))
        .collect()
}

impl<K: KeySpec, V> StaticMap<K, V> for HashMap<K, V> {
    fn lookup(&self, needle_ctx: &K::Ctx, k: &K::Key) -> Option<&V> {
        HashMap::lookup(self, needle_ctx, k)
    }

    fn member(&self, needle_ctx: &K::Ctx, k: &K::Key) -> bool {
        HashMap::member(self, needle_ctx, k)
    }

    fn lookup_many<'a>(&'a self, needle_ctx: &K::Ctx, needles: &[K::Key]) -> Vec<Option<&'a V>> {
        HashMap::lookup_many(self, needle_ctx, needles)
    }

    fn member_many(&self, needle_ctx: &K::Ctx, needles: &[K::Key]) -> Vec<bool> {
        HashMap::member_many(self, needle_ctx, needles)
    }

    fn len(&self) -> usize {
        self.keys.len()
    }
}

impl<K: KeySpec, V: Clone> Clone for HashMap<K, V>
where
    Ctx<K>: Clone,
{
    fn clone(&self) -> Self {
        HashMap {
            ctx: self.ctx.clone(),
            keys: self.keys.clone(),
            vals: self.vals.clone(),
            slots: self.slots.clone(),
            con: self.con.clone(),
            seed: self.seed,
        }
    }
}

impl<K: KeySpec, V> fmt::Debug for HashMap<K, V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HashMap")
            .field("len", &self.keys.len())
            .field("total_slots", &self.con.total_slots())
            .field("seed", &self.seed)
            .finish()
    }
}
