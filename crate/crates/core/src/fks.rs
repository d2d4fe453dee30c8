//! Two-level perfect hashing.
//!
//! Level one hashes `n` keys into `n` buckets. A bucket holding `s` keys gets
//! its own table of `s²` slots and a private hash function, redrawn until no
//! two of the bucket's keys share a slot. The slot of a key is the bucket's
//! offset into the concatenation of all tables plus its level-two hash.
//!
//! Two builders are provided. [`make1_reference`] groups keys per bucket and
//! retries each bucket on its own; it is short and obviously right.
//! [`make_flat`] runs every bucket's retries in lock-step over flat arrays
//! without ever sorting or grouping the keys: each key carries the rank of
//! its bucket, buckets that succeed drop out after every round and the
//! survivors are renumbered with a prefix sum. Both draw constants from
//! [`draw_consts`] keyed by original bucket index and trial number, so on the
//! same input they produce identical constructions.

use thiserror::Error;

use crate::hashes::{draw_consts, Level, Seed, UniversalConsts, MAX_CONSTS};
use crate::keys::{KeyError, KeySpec};
use crate::prims::{self, Shape};

/// Trials per bucket before construction gives up.
pub const TRIAL_CAP: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("cannot build a perfect hash over an empty key set")]
    EmptyKeys,
    #[error("bucket {bucket} still collides after {trials} trials; keys are probably not distinct")]
    ProbableDuplicates { bucket: usize, trials: u32 },
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error("malformed construction: {0}")]
    Malformed(&'static str),
}

/// A complete two-level hash function for one key set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Construction {
    level1: UniversalConsts,
    buckets: Vec<Bucket>,
    total_slots: i64,
}

/// What a lookup reads about one bucket, packed into half a cache line:
/// the level-two constants and `offset << SIZE_BITS | size`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(align(32))]
struct Bucket {
    consts: [u64; MAX_CONSTS],
    meta: u64,
}

const SIZE_BITS: u32 = 20;
/// Largest bucket a construction can describe.
pub const MAX_BUCKET_SIZE: i64 = (1 << SIZE_BITS) - 1;
/// Largest slot count a construction can describe.
pub const MAX_TOTAL_SLOTS: i64 = (1 << (64 - SIZE_BITS)) - 1;

impl Bucket {
    #[inline]
    fn size(&self) -> u64 {
        self.meta & MAX_BUCKET_SIZE as u64
    }

    #[inline]
    fn offset(&self) -> u64 {
        self.meta >> SIZE_BITS
    }
}

impl Construction {
    /// Assembles a construction from its constants and bucket sizes, deriving
    /// the slot offsets. Does not check that it is collision-free.
    pub fn from_parts(
        level1: UniversalConsts,
        bucket_consts: Vec<UniversalConsts>,
        shape: Vec<i64>,
    ) -> Result<Self, BuildError> {
        if shape.is_empty() {
            return Err(BuildError::EmptyKeys);
        }
        if bucket_consts.len() != shape.len() {
            return Err(BuildError::Malformed("one constant set per bucket required"));
        }
        if bucket_consts.iter().any(|c| c.len() != level1.len()) {
            return Err(BuildError::Malformed("constant counts differ between levels"));
        }
        let mut buckets = Vec::with_capacity(shape.len());
        let mut offset = 0i64;
        for (consts, &size) in bucket_consts.iter().zip(&shape) {
            if size < 0 {
                return Err(BuildError::Malformed("negative bucket size"));
            }
            if size > MAX_BUCKET_SIZE {
                return Err(BuildError::Malformed("bucket size too large"));
            }
            buckets.push(Bucket {
                consts: consts.raw(),
                meta: (offset as u64) << SIZE_BITS | size as u64,
            });
            offset += size * size;
            if offset > MAX_TOTAL_SLOTS {
                return Err(BuildError::Malformed("slot count too large"));
            }
        }
        Ok(Construction {
            level1,
            buckets,
            total_slots: offset,
        })
    }

    pub fn level1(&self) -> &UniversalConsts {
        &self.level1
    }

    pub fn bucket_consts(&self) -> Vec<UniversalConsts> {
        let m = self.level1.len() as u8;
        self.buckets
            .iter()
            .map(|b| UniversalConsts::from_raw(b.consts, m))
            .collect()
    }

    /// Keys per bucket.
    pub fn shape(&self) -> Vec<i64> {
        self.buckets.iter().map(|b| b.size() as i64).collect()
    }

    /// Start of each bucket's table in the slot range.
    pub fn sq_offsets(&self) -> Vec<i64> {
        self.buckets.iter().map(|b| b.offset() as i64).collect()
    }

    /// Sum of squared bucket sizes.
    pub fn total_slots(&self) -> i64 {
        self.total_slots
    }

    /// Number of buckets, which equals the number of keys built over.
    pub fn buckets(&self) -> usize {
        self.buckets.len()
    }

    pub fn bucket_size(&self, g: usize) -> i64 {
        self.buckets[g].size() as i64
    }

    #[inline]
    pub fn level1_hash<K: KeySpec>(&self, ctx: &K::Ctx, key: &K::Key) -> usize {
        (K::hash(ctx, &self.level1, key) % self.buckets.len() as u64) as usize
    }

    /// Slot of `key`, or `None` when it lands in an empty bucket.
    #[inline]
    pub fn perfect_hash<K: KeySpec>(&self, ctx: &K::Ctx, key: &K::Key) -> Option<usize> {
        self.slot_in_bucket::<K>(self.level1_hash::<K>(ctx, key), ctx, key)
    }

    /// Slot of `key` given its level-one bucket `g`.
    #[inline]
    pub fn slot_in_bucket<K: KeySpec>(&self, g: usize, ctx: &K::Ctx, key: &K::Key) -> Option<usize> {
        let b = &self.buckets[g];
        let size = b.size();
        if size == 0 {
            return None;
        }
        let consts = UniversalConsts::from_raw(b.consts, self.level1.len() as u8);
        let h = K::hash(ctx, &consts, key) % (size * size);
        Some((b.offset() + h) as usize)
    }

    #[inline(always)]
    pub(crate) fn prefetch_bucket(&self, g: usize) {
        prims::prefetch(&self.buckets[g]);
    }
}

fn squares(sizes: &[i64]) -> Vec<i64> {
    sizes.iter().map(|s| s * s).collect()
}

/// Number of trials each bucket needed; zero for empty buckets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub trials: Vec<u32>,
}

impl BuildStats {
    pub fn mean_trials_nonempty(&self) -> f64 {
        let (sum, count) = self
            .trials
            .iter()
            .filter(|&&t| t > 0)
            .fold((0u64, 0u64), |(s, c), &t| (s + t as u64, c + 1));
        if count == 0 {
            0.0
        } else {
            sum as f64 / count as f64
        }
    }

    pub fn total_trials(&self) -> u64 {
        self.trials.iter().map(|&t| t as u64).sum()
    }
}

fn validate<K: KeySpec>(ctx: &K::Ctx, keys: &[K::Key]) -> Result<(), BuildError> {
    if keys.is_empty() {
        return Err(BuildError::EmptyKeys);
    }
    for k in keys {
        K::check(ctx, k)?;
    }
    Ok(())
}

fn level_one<K: KeySpec>(seed: Seed, ctx: &K::Ctx, keys: &[K::Key]) -> (UniversalConsts, Vec<i64>, Vec<i64>) {
    let n = keys.len() as u64;
    let level1 = draw_consts(seed, Level::One, 0, 0, K::M);
    let hashes: Vec<i64> = keys.iter().map(|k| (K::hash(ctx, &level1, k) % n) as i64).collect();
    let shape = prims::hist_ones(n as i64, &hashes).expect("level-one hashes are below n");
    (level1, hashes, shape)
}

/// Whether any slot of a `table`-slot array receives more than one hash.
pub fn collision(hashes: &[i64], table: i64) -> bool {
    let counts = prims::hist_ones(table, hashes).expect("hashes are below the table size");
    prims::or_all(&counts.iter().map(|&c| c > 1).collect::<Vec<_>>())
}

fn make2_counted<K: KeySpec>(
    seed: Seed,
    bucket: usize,
    ctx: &K::Ctx,
    keys: &[K::Key],
) -> Result<(UniversalConsts, u32), BuildError> {
    let size = keys.len() as u64;
    let table = size * size;
    for trial in 0..TRIAL_CAP {
        let cs = draw_consts(seed, Level::Two, bucket as u64, trial, K::M);
        let hs: Vec<i64> = keys.iter().map(|k| (K::hash(ctx, &cs, k) % table) as i64).collect();
        if !collision(&hs, table as i64) {
            return Ok((cs, trial + 1));
        }
    }
    Err(BuildError::ProbableDuplicates {
        bucket,
        trials: TRIAL_CAP,
    })
}

/// Redraws constants for one bucket until its keys hash without collision
/// into `keys.len()²` slots.
pub fn make2_reference<K: KeySpec>(
    seed: Seed,
    bucket: usize,
    ctx: &K::Ctx,
    keys: &[K::Key],
) -> Result<UniversalConsts, BuildError> {
    make2_counted::<K>(seed, bucket, ctx, keys).map(|(cs, _)| cs)
}

/// Sequential bucket-at-a-time construction.
pub fn make1_reference<K: KeySpec>(seed: Seed, ctx: &K::Ctx, keys: &[K::Key]) -> Result<Construction, BuildError> {
    validate::<K>(ctx, keys)?;
    let n = keys.len() as i64;
    let (level1, hashes, shape) = level_one::<K>(seed, ctx, keys);
    let groups = prims::groupby(n, &hashes, keys).expect("level-one hashes are below n");
    let bucket_consts = groups
        .iter()
        .enumerate()
        .map(|(b, g)| make2_reference::<K>(seed, b, ctx, g))
        .collect::<Result<Vec<_>, _>>()?;
    Construction::from_parts(level1, bucket_consts, shape)
}

/// Non-empty buckets paired with their original index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IsShape {
    entries: Vec<(i64, i64)>,
}

impl IsShape {
    /// Drops empty buckets, remembering where the others came from.
    pub fn from_shape(shape: &[i64]) -> Self {
        let indexed = shape.iter().copied().enumerate().map(|(i, s)| (i as i64, s)).collect();
        IsShape {
            entries: prims::filter(indexed, |&(_, s)| s != 0),
        }
    }

    pub fn new(entries: Vec<(i64, i64)>) -> Result<Self, BuildError> {
        if entries.iter().any(|&(_, s)| s <= 0) {
            return Err(BuildError::Malformed("segment sizes must be positive"));
        }
        Ok(IsShape { entries })
    }

    pub fn entries(&self) -> &[(i64, i64)] {
        &self.entries
    }

    pub fn sizes(&self) -> Vec<i64> {
        self.entries.iter().map(|&(_, s)| s).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Level-two hashes of segment-tagged keys, as indices into the
/// concatenation of all squared-size tables.
pub fn seg_hashes<K: KeySpec>(
    sizes: &[i64],
    consts: &[UniversalConsts],
    okeys: &[(i64, K::Key)],
    ctx: &K::Ctx,
) -> Vec<i64> {
    let offsets = prims::presum(&squares(sizes));
    okeys
        .iter()
        .enumerate()
        .map(|(i, (o, key))| {
            if let Some(&(ahead, _)) = okeys.get(i + prims::AHEAD) {
                let ahead = ahead as usize;
                if ahead < sizes.len() {
                    prims::prefetch(&sizes[ahead]);
                    prims::prefetch(&consts[ahead]);
                    prims::prefetch(&offsets[ahead]);
                }
            }
            let o = *o as usize;
            let s = sizes[o] as u64;
            offsets[o] + (K::hash(ctx, &consts[o], key) % (s * s)) as i64
        })
        .collect()
}

/// Per segment, whether two of its keys hit the same slot.
pub fn seg_collisions(sizes: &[i64], flat_hashes: &[i64]) -> Vec<bool> {
    let sshape = Shape::new(squares(sizes)).expect("sizes are non-negative");
    let flat = sshape.flat_len().expect("table size fits in i64");
    let crowded = prims::crowded(flat, flat_hashes).expect("flat hashes are below the table size");
    prims::seg_reduce_or(&sshape, &crowded).expect("counts span the squared shape")
}

/// Splits segments into those still colliding and those finished, the latter
/// paired with their original bucket index.
pub fn seg_result(
    ishape: &IsShape,
    consts: &[UniversalConsts],
    collisions: &[bool],
) -> (IsShape, Vec<(i64, UniversalConsts)>) {
    assert_eq!(ishape.len(), consts.len());
    assert_eq!(ishape.len(), collisions.len());
    let iota: Vec<usize> = (0..ishape.len()).collect();
    let (notdone, done) = prims::partition(iota, |&i| collisions[i]);
    let finished = done.into_iter().map(|i| (ishape.entries[i].0, consts[i])).collect();
    let remaining = IsShape {
        entries: notdone.into_iter().map(|i| ishape.entries[i]).collect(),
    };
    (remaining, finished)
}

/// Drops keys whose segment finished and renumbers the rest to their
/// segment's rank among the colliding ones.
pub fn renumber_and_filter_keys<T>(okeys: Vec<(i64, T)>, collisions: &[bool]) -> Vec<(i64, T)> {
    let ranks = prims::presum(&collisions.iter().map(|&c| c as i64).collect::<Vec<_>>());
    prims::filter(okeys, |(o, _)| collisions[*o as usize])
        .into_iter()
        .map(|(o, key)| (ranks[o as usize], key))
        .collect()
}

/// Level-two constants for every bucket, plus the trials each took.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelTwo {
    pub consts: Vec<UniversalConsts>,
    pub trials: Vec<u32>,
}

/// Finds collision-free constants for all buckets at once.
///
/// `shape` must be the histogram of `level1_hashes`. Each round draws fresh
/// constants for every still-colliding bucket, hashes all their keys in one
/// pass, and retires the buckets that came out clean.
pub fn segmake2_flat<K: KeySpec>(
    seed: Seed,
    ctx: &K::Ctx,
    shape: &[i64],
    keys: &[K::Key],
    level1_hashes: &[i64],
) -> Result<LevelTwo, BuildError> {
    assert_eq!(keys.len(), level1_hashes.len());
    let n = shape.len();

    let nonempty: Vec<i64> = shape.iter().map(|&s| (s != 0) as i64).collect();
    let ranks = prims::presum(&nonempty);
    let mut okeys: Vec<(i64, K::Key)> = level1_hashes
        .iter()
        .zip(keys)
        .enumerate()
        .map(|(i, (&h, &k))| {
            prims::prefetch_at(&ranks, level1_hashes, i + prims::AHEAD);
            (ranks[h as usize], k)
        })
        .collect();
    let mut ishape = IsShape::from_shape(shape);

    let mut done_buckets = Vec::with_capacity(ishape.len());
    let mut done_consts = Vec::with_capacity(ishape.len());
    let mut trials = vec![0u32; n];
    let mut trial = 0u32;

    while !okeys.is_empty() {
        if trial == TRIAL_CAP {
            return Err(BuildError::ProbableDuplicates {
                bucket: ishape.entries[0].0 as usize,
                trials: TRIAL_CAP,
            });
        }
        let sizes = ishape.sizes();
        let consts: Vec<UniversalConsts> = ishape
            .entries
            .iter()
            .map(|&(b, _)| draw_consts(seed, Level::Two, b as u64, trial, K::M))
            .collect();
        let hashes = seg_hashes::<K>(&sizes, &consts, &okeys, ctx);
        let collisions = seg_collisions(&sizes, &hashes);
        let (remaining, finished) = seg_result(&ishape, &consts, &collisions);
        for (b, cs) in finished {
            trials[b as usize] = trial + 1;
            done_buckets.push(b);
            done_consts.push(cs);
        }
        okeys = renumber_and_filter_keys(okeys, &collisions);
        ishape = remaining;
        trial += 1;
    }

    // empty buckets keep their first draw; the filler is overwritten below
    let filler = draw_consts(seed, Level::Two, 0, 0, K::M);
    let mut consts: Vec<UniversalConsts> = shape
        .iter()
        .enumerate()
        .map(|(b, &s)| match s {
            0 => draw_consts(seed, Level::Two, b as u64, 0, K::M),
            _ => filler,
        })
        .collect();
    debug_assert!({
        let mut seen = vec![false; n];
        done_buckets
            .iter()
            .all(|&b| !std::mem::replace(&mut seen[b as usize], true))
    });
    prims::scatter_into(&mut consts, &done_buckets, done_consts).expect("finished buckets are in range");
    Ok(LevelTwo { consts, trials })
}

/// Flattened, sort-free construction.
pub fn make_flat<K: KeySpec>(seed: Seed, ctx: &K::Ctx, keys: &[K::Key]) -> Result<Construction, BuildError> {
    make_flat_with_stats::<K>(seed, ctx, keys).map(|(c, _)| c)
}

pub fn make_flat_with_stats<K: KeySpec>(
    seed: Seed,
    ctx: &K::Ctx,
    keys: &[K::Key],
) -> Result<(Construction, BuildStats), BuildError> {
    validate::<K>(ctx, keys)?;
    let (level1, hashes, shape) = level_one::<K>(seed, ctx, keys);
    let LevelTwo { consts, trials } = segmake2_flat::<K>(seed, ctx, &shape, keys, &hashes)?;
    let c = Construction::from_parts(level1, consts, shape)?;
    Ok((c, BuildStats { trials }))
}

/// Whether every key gets a slot below `total_slots` and no two keys share one.
pub fn check_well_formed<K: KeySpec>(c: &Construction, ctx: &K::Ctx, keys: &[K::Key]) -> bool {
    let mut taken = vec![false; c.total_slots() as usize];
    keys.iter().all(|k| {
        K::check(ctx, k).is_ok()
            && match c.perfect_hash::<K>(ctx, k) {
                Some(slot) if slot < taken.len() => !std::mem::replace(&mut taken[slot], true),
                _ => false,
            }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashes::hash_u64_wide;
    use crate::keys::{Slice, StrKeys, U64Keys};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn distinct_u64(n: usize, seed: u64) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let k: u64 = rng.random();
            if seen.insert(k) {
                out.push(k);
            }
        }
        out
    }

    fn distinct_strings(n: usize, seed: u64) -> (Vec<u8>, Vec<Slice>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = HashSet::new();
        let mut ctx = Vec::new();
        let mut keys = Vec::new();
        while keys.len() < n {
            let len = rng.random_range(1..8);
            let s: Vec<u8> = (0..len).map(|_| b'a' + rng.random_range(0..4)).collect();
            if seen.insert(s.clone()) {
                keys.push(Slice::new(ctx.len(), s.len()));
                ctx.extend_from_slice(&s);
            }
        }
        (ctx, keys)
    }

    /// Sorted-keys formulation: keys grouped by segment, segment of each key
    /// recovered with a replicated iota over the shape.
    fn seg_hashes_sorted(sizes: &[i64], consts: &[UniversalConsts], sorted_keys: &[u64]) -> Vec<i64> {
        let offsets = prims::presum(&squares(sizes));
        let ii2 = prims::repiota(sizes).unwrap();
        (0..sorted_keys.len())
            .map(|i| {
                let j = ii2[i] as usize;
                let s = sizes[j] as u64;
                offsets[j] + (hash_u64_wide(&consts[j], sorted_keys[i]) % (s * s)) as i64
            })
            .collect()
    }

    #[test]
    fn singleton_construction() {
        let c = make_flat::<U64Keys>(Seed(1), &(), &[42]).unwrap();
        assert_eq!(c.shape(), vec![1]);
        assert_eq!(c.total_slots(), 1);
        assert_eq!(c.level1_hash::<U64Keys>(&(), &12345), 0);
        assert_eq!(c.perfect_hash::<U64Keys>(&(), &42), Some(0));
        assert!(check_well_formed::<U64Keys>(&c, &(), &[42]));
        assert_eq!(make1_reference::<U64Keys>(Seed(1), &(), &[42]).unwrap(), c);
    }

    #[test]
    fn level1_hash_matches_formula() {
        let keys = distinct_u64(10, 3);
        let c = make_flat::<U64Keys>(Seed(5), &(), &keys).unwrap();
        for k in &keys {
            let want = (hash_u64_wide(c.level1(), *k) % 10) as usize;
            assert_eq!(c.level1_hash::<U64Keys>(&(), k), want);
        }
    }

    #[test]
    fn equal_slices_land_in_the_same_bucket() {
        let (ctx, keys) = distinct_strings(50, 1);
        let c = make_flat::<StrKeys>(Seed(2), &ctx, &keys).unwrap();
        for k in &keys {
            let content = k.get(&ctx).unwrap();
            let mut other = b"zz".to_vec();
            other.extend_from_slice(content);
            let moved = Slice::new(2, content.len());
            assert_eq!(
                c.level1_hash::<StrKeys>(&ctx, k),
                c.level1_hash::<StrKeys>(&other, &moved)
            );
            assert_eq!(
                c.perfect_hash::<StrKeys>(&ctx, k),
                c.perfect_hash::<StrKeys>(&other, &moved)
            );
        }
    }

    #[test]
    fn empty_bucket_has_no_slot() {
        let keys = distinct_u64(100, 9);
        let c = make_flat::<U64Keys>(Seed(0), &(), &keys).unwrap();
        assert!(c.shape().contains(&0));
        let mut probe = 0u64;
        let miss = loop {
            if c.bucket_size(c.level1_hash::<U64Keys>(&(), &probe)) == 0 {
                break probe;
            }
            probe += 1;
        };
        assert_eq!(c.perfect_hash::<U64Keys>(&(), &miss), None);
        for k in &keys {
            assert!(c.perfect_hash::<U64Keys>(&(), k).unwrap() < c.total_slots() as usize);
        }
    }

    #[test]
    fn duplicates_hit_the_trial_cap() {
        for r in [
            make1_reference::<U64Keys>(Seed(0), &(), &[7, 7]),
            make_flat::<U64Keys>(Seed(0), &(), &[7, 7]),
            make_flat::<U64Keys>(Seed(0), &(), &[1, 2, 3, 7, 7]),
        ] {
            assert!(matches!(
                r,
                Err(BuildError::ProbableDuplicates { trials: TRIAL_CAP, .. })
            ));
        }
    }

    #[test]
    fn empty_keys_are_rejected() {
        assert_eq!(make_flat::<U64Keys>(Seed(0), &(), &[]), Err(BuildError::EmptyKeys));
        assert_eq!(
            make1_reference::<U64Keys>(Seed(0), &(), &[]),
            Err(BuildError::EmptyKeys)
        );
    }

    #[test]
    fn out_of_context_slices_are_rejected() {
        let r = make_flat::<StrKeys>(Seed(0), b"abc", &[Slice::new(2, 5)]);
        assert!(matches!(r, Err(BuildError::Key(KeyError::OutOfBounds { .. }))));
    }

    #[test]
    fn make2_single_key_first_trial() {
        for bucket in 0..100 {
            let (cs, trials) = make2_counted::<U64Keys>(Seed(3), bucket, &(), &[bucket as u64 * 31]).unwrap();
            assert_eq!(trials, 1);
            assert_eq!(cs, draw_consts(Seed(3), Level::Two, bucket as u64, 0, 2));
        }
    }

    #[test]
    fn make2_result_is_collision_free() {
        let keys = distinct_u64(6, 4);
        let cs = make2_reference::<U64Keys>(Seed(8), 0, &(), &keys).unwrap();
        let hs: Vec<i64> = keys.iter().map(|&k| (hash_u64_wide(&cs, k) % 36) as i64).collect();
        assert!(!collision(&hs, 36));
    }

    #[test]
    fn seg_hashes_examples() {
        let cs = draw_consts(Seed(0), Level::Two, 0, 0, 2);
        assert_eq!(seg_hashes::<U64Keys>(&[1], &[cs], &[(0, 99)], &()), vec![0]);

        let c1 = draw_consts(Seed(0), Level::Two, 1, 0, 2);
        let hs = seg_hashes::<U64Keys>(&[1, 2], &[cs, c1], &[(0, 5), (1, 6)], &());
        assert_eq!(hs[0], 0);
        assert!((1..=4).contains(&hs[1]));
    }

    #[test]
    fn seg_collisions_examples() {
        assert_eq!(seg_collisions(&[2], &[0, 0]), vec![true]);
        assert_eq!(seg_collisions(&[2], &[0, 3]), vec![false]);
        assert_eq!(seg_collisions(&[1, 2], &[0, 1, 1]), vec![false, true]);
    }

    #[test]
    fn seg_result_examples() {
        let c0 = draw_consts(Seed(0), Level::Two, 0, 0, 2);
        let c1 = draw_consts(Seed(0), Level::Two, 1, 0, 2);
        let ishape = IsShape::new(vec![(0, 2), (1, 3)]).unwrap();

        let (rest, done) = seg_result(&ishape, &[c0, c1], &[true, false]);
        assert_eq!(rest.entries(), &[(0, 2)]);
        assert_eq!(done, vec![(1, c1)]);

        let (rest, done) = seg_result(&ishape, &[c0, c1], &[false, false]);
        assert!(rest.is_empty());
        assert_eq!(done.len(), 2);

        let (rest, done) = seg_result(&ishape, &[c0, c1], &[true, true]);
        assert_eq!(rest, ishape);
        assert!(done.is_empty());
    }

    #[test]
    fn renumber_examples() {
        assert_eq!(
            renumber_and_filter_keys(vec![(0, 'a'), (1, 'b')], &[false, true]),
            vec![(0, 'b')]
        );
        assert_eq!(
            renumber_and_filter_keys(vec![(0, 'a'), (1, 'b')], &[true, true]),
            vec![(0, 'a'), (1, 'b')]
        );
        assert_eq!(
            renumber_and_filter_keys(vec![(0, 'a'), (1, 'b')], &[false, false]),
            vec![]
        );
        assert_eq!(
            renumber_and_filter_keys(vec![(2, 'c'), (0, 'a'), (2, 'd')], &[true, false, true]),
            vec![(1, 'c'), (0, 'a'), (1, 'd')]
        );
    }

    #[test]
    fn ishape_drops_empty_buckets() {
        assert_eq!(IsShape::from_shape(&[0, 2, 0, 1]).entries(), &[(1, 2), (3, 1)]);
        assert!(IsShape::new(vec![(0, 0)]).is_err());
    }

    #[test]
    fn singleton_buckets_finish_on_first_trial() {
        let keys = [10u64, 20, 30];
        let hashes = [2i64, 0, 1];
        let shape = [1i64, 1, 1];
        let l2 = segmake2_flat::<U64Keys>(Seed(6), &(), &shape, &keys, &hashes).unwrap();
        assert_eq!(l2.trials, vec![1, 1, 1]);
        for b in 0..3 {
            assert_eq!(l2.consts[b], draw_consts(Seed(6), Level::Two, b as u64, 0, 2));
        }
    }

    #[test]
    fn segmake2_with_no_keys_terminates() {
        let l2 = segmake2_flat::<U64Keys>(Seed(6), &(), &[0, 0], &[], &[]).unwrap();
        assert_eq!(l2.trials, vec![0, 0]);
        assert_eq!(l2.consts.len(), 2);
    }

    #[test]
    fn flat_matches_reference_bitwise() {
        for seed in 0..5 {
            let keys = distinct_u64(1000, seed);
            let r = make1_reference::<U64Keys>(Seed(seed), &(), &keys).unwrap();
            let f = make_flat::<U64Keys>(Seed(seed), &(), &keys).unwrap();
            assert_eq!(r, f);
        }
        let (ctx, keys) = distinct_strings(500, 7);
        assert_eq!(
            make1_reference::<StrKeys>(Seed(1), &ctx, &keys).unwrap(),
            make_flat::<StrKeys>(Seed(1), &ctx, &keys).unwrap()
        );
    }

    #[test]
    fn sortless_hashes_match_sorted_formulation() {
        for seed in 0..20 {
            let keys = distinct_u64(300, 100 + seed);
            let (_, hashes, shape) = level_one::<U64Keys>(Seed(seed), &(), &keys);
            let ishape = IsShape::from_shape(&shape);
            let sizes = ishape.sizes();
            let consts: Vec<_> = ishape
                .entries()
                .iter()
                .map(|&(b, _)| draw_consts(Seed(seed), Level::Two, b as u64, 0, 2))
                .collect();

            let ranks = prims::presum(&shape.iter().map(|&s| (s != 0) as i64).collect::<Vec<_>>());
            let okeys: Vec<(i64, u64)> = hashes
                .iter()
                .zip(&keys)
                .map(|(&h, &k)| (ranks[h as usize], k))
                .collect();
            let mut flat = seg_hashes::<U64Keys>(&sizes, &consts, &okeys, &());

            let sorted = prims::sort_by_tag(hashes.iter().copied().zip(keys.iter().copied()).collect());
            let mut oracle = seg_hashes_sorted(&sizes, &consts, &sorted);

            flat.sort_unstable();
            oracle.sort_unstable();
            assert_eq!(flat, oracle);
        }
    }

    #[test]
    fn checker_rejects_shared_slots() {
        // two keys, one bucket of size 2, constants forcing both into slot 0
        let zero = UniversalConsts::new(&[0, 0]).unwrap();
        let c = Construction::from_parts(zero, vec![zero, zero], vec![2, 0]).unwrap();
        assert!(!check_well_formed::<U64Keys>(&c, &(), &[1, 2]));
        assert!(check_well_formed::<U64Keys>(&c, &(), &[1]));
    }

    #[test]
    fn from_parts_validates() {
        let c = draw_consts(Seed(0), Level::One, 0, 0, 2);
        let c3 = draw_consts(Seed(0), Level::One, 0, 0, 3);
        assert_eq!(Construction::from_parts(c, vec![], vec![]), Err(BuildError::EmptyKeys));
        assert!(Construction::from_parts(c, vec![c], vec![1, 0]).is_err());
        assert!(Construction::from_parts(c, vec![c3], vec![1]).is_err());
        assert!(Construction::from_parts(c, vec![c], vec![-1]).is_err());
        let ok = Construction::from_parts(c, vec![c, c, c], vec![2, 0, 3]).unwrap();
        assert_eq!(ok.sq_offsets(), vec![0, 4, 4]);
        assert_eq!(ok.total_slots(), 13);
    }

    #[test]
    fn seg_hashes_stay_inside_their_segment() {
        let keys = distinct_u64(2000, 42);
        let (_, hashes, shape) = level_one::<U64Keys>(Seed(42), &(), &keys);
        let ishape = IsShape::from_shape(&shape);
        let sizes = ishape.sizes();
        let consts: Vec<_> = ishape
            .entries()
            .iter()
            .map(|&(b, _)| draw_consts(Seed(42), Level::Two, b as u64, 0, 2))
            .collect();
        let ranks = prims::presum(&shape.iter().map(|&s| (s != 0) as i64).collect::<Vec<_>>());
        let okeys: Vec<(i64, u64)> = hashes
            .iter()
            .zip(&keys)
            .map(|(&h, &k)| (ranks[h as usize], k))
            .collect();
        let offsets = prims::presum(&squares(&sizes));
        for ((o, _), h) in okeys.iter().zip(seg_hashes::<U64Keys>(&sizes, &consts, &okeys, &())) {
            let o = *o as usize;
            assert!(h >= offsets[o] && h < offsets[o] + sizes[o] * sizes[o]);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn flat_constructions_are_perfect(raw in prop::collection::hash_set(any::<u64>(), 1..300), seed in any::<u64>()) {
            let keys: Vec<u64> = raw.into_iter().collect();
            let (c, stats) = make_flat_with_stats::<U64Keys>(Seed(seed), &(), &keys).unwrap();
            prop_assert!(check_well_formed::<U64Keys>(&c, &(), &keys));
            prop_assert_eq!(&c, &make1_reference::<U64Keys>(Seed(seed), &(), &keys).unwrap());
            prop_assert_eq!(stats.trials.len(), keys.len());
            for (t, &s) in stats.trials.iter().zip(&c.shape()) {
                prop_assert_eq!(*t == 0, s == 0);
            }
        }

        #[test]
        fn string_constructions_are_perfect(n in 1usize..200, seed in any::<u64>()) {
            let (ctx, keys) = distinct_strings(n, seed);
            let c = make_flat::<StrKeys>(Seed(seed), &ctx, &keys).unwrap();
            prop_assert!(check_well_formed::<StrKeys>(&c, &ctx, &keys));
        }
    }
}
