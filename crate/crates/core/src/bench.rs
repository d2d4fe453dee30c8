//! Key generation, timing runs and differential verification for the three
//! map implementations.

use std::borrow::Borrow;
use std::collections::HashSet;
use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arraymap::{ArrayMap, Layout};
use crate::fks::BuildError;
use crate::hashes::Seed;
use crate::hashmap::{Ctx, HashMap};
use crate::keys::{KeySpec, Slice, StrKeys, U64Keys};
use crate::StaticMap;

/// Characters string keys are drawn from.
pub const ALPHABET: &[u8; 36] = b"abcdefghijklmnopqrstuvwxyz0123456789";
pub const MIN_STR_LEN: usize = 5;
pub const MAX_STR_LEN: usize = 25;
pub const DEFAULT_REPS: usize = 10;
/// Absent needles probed by [`verify`].
pub const VERIFY_ABSENT: usize = 10_000;

// rng streams, so keys, probe order and needles never share randomness
const STREAM_KEYS: u64 = 0;
const STREAM_PROBES: u64 = 1;
const STREAM_NEEDLES: u64 = 2;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown {what} '{value}'")]
    Unknown { what: &'static str, value: String },
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("verification failed for {imp}: {detail}")]
    Verify { imp: Impl, detail: String },
}

macro_rules! named_enum {
    ($(#[$m:meta])* $name:ident, $what:literal, { $($var:ident => $s:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum $name { $($var),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$var),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$var => $s),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = BenchError;
            fn from_str(s: &str) -> Result<Self, BenchError> {
                match s.trim() {
                    $($s => Ok($name::$var),)+
                    other => Err(BenchError::Unknown { what: $what, value: other.to_string() }),
                }
            }
        }
    };
}

named_enum!(KeyKind, "key kind", { U64 => "u64", String => "string" });
named_enum!(Impl, "implementation", { HashMap => "hashmap", BinSearch => "binsearch", Eytzinger => "eytzinger" });
named_enum!(Op, "operation", { Construct => "construct", Lookup => "lookup", Member => "member" });
named_enum!(Format, "format", { Csv => "csv", Markdown => "markdown" });
named_enum!(
    /// Order in which lookup and member probe the inserted keys.
    ProbeOrder, "probe order", { Inserted => "inserted", Shuffled => "shuffled" }
);

/// Parses a comma-separated list such as `hashmap,eytzinger`.
pub fn parse_list<T: FromStr<Err = BenchError>>(s: &str) -> Result<Vec<T>, BenchError> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub n: usize,
    pub key_kind: KeyKind,
    pub impls: Vec<Impl>,
    pub ops: Vec<Op>,
    pub seed: Seed,
    pub reps: usize,
    pub format: Format,
    pub probe_order: ProbeOrder,
}

impl BenchConfig {
    pub fn new(n: usize, key_kind: KeyKind) -> Self {
        BenchConfig {
            n,
            key_kind,
            impls: Impl::ALL.to_vec(),
            ops: Op::ALL.to_vec(),
            seed: Seed(1),
            reps: DEFAULT_REPS,
            format: Format::Csv,
            probe_order: ProbeOrder::Shuffled,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.n == 0 {
            return Err(BenchError::Config("n must be at least 1"));
        }
        if self.reps == 0 {
            return Err(BenchError::Config("reps must be at least 1"));
        }
        if self.impls.is_empty() || self.ops.is_empty() {
            return Err(BenchError::Config("need at least one implementation and one operation"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub imp: Impl,
    pub op: Op,
    pub key_kind: KeyKind,
    pub n: usize,
    pub mean_ms: f64,
    pub stddev_ms: f64,
}

fn rng(seed: Seed, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed.0);
    r.set_stream(stream);
    r
}

/// `n` distinct uniformly random integers.
pub fn gen_u64_keys(n: usize, seed: Seed) -> Vec<u64> {
    let mut r = rng(seed, STREAM_KEYS);
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let k: u64 = r.random();
        if seen.insert(k) {
            out.push(k);
        }
    }
    out
}

fn random_string(r: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| ALPHABET[r.random_range(0..ALPHABET.len())]).collect()
}

/// `n` distinct strings of 5 to 25 characters, concatenated into one context.
pub fn gen_string_keys(n: usize, seed: Seed) -> (Vec<u8>, Vec<Slice>) {
    let mut r = rng(seed, STREAM_KEYS);
    let mut seen: HashSet<Vec<u8>> = HashSet::with_capacity(n);
    let mut ctx = Vec::with_capacity(n * (MIN_STR_LEN + MAX_STR_LEN) / 2);
    let mut keys = Vec::with_capacity(n);
    while keys.len() < n {
        let len = r.random_range(MIN_STR_LEN..=MAX_STR_LEN);
        let s = random_string(&mut r, len);
        if seen.contains(&s) {
            continue;
        }
        keys.push(Slice::new(ctx.len(), len));
        ctx.extend_from_slice(&s);
        seen.insert(s);
    }
    (ctx, keys)
}

fn pairs<T: Copy>(keys: &[T]) -> Vec<(T, u32)> {
    keys.iter().copied().zip(0u32..).collect()
}

fn stats(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn time_impl<K, M, B>(
    cfg: &BenchConfig,
    imp: Impl,
    ctx: &Ctx<K>,
    keys: &[K::Key],
    probes: &[K::Key],
    build: B,
) -> Result<Vec<(Op, f64, f64)>, BenchError>
where
    K: KeySpec,
    Ctx<K>: Clone,
    M: StaticMap<K, u32>,
    B: Fn(Ctx<K>, Vec<(K::Key, u32)>) -> Result<M, BuildError>,
{
    let mut out = Vec::new();
    let mut built: Option<M> = None;
    let needle_ctx: &K::Ctx = ctx.borrow();
    for &op in &cfg.ops {
        let mut samples = Vec::with_capacity(cfg.reps);
        if op == Op::Construct {
            for rep in 0..=cfg.reps {
                let (c, kvs) = (ctx.clone(), pairs(keys));
                let t = Instant::now();
                let m = build(c, kvs)?;
                let dt = elapsed_ms(t);
                black_box(&m);
                if rep > 0 {
                    samples.push(dt);
                }
            }
        } else {
            if built.is_none() {
                built = Some(build(ctx.clone(), pairs(keys))?);
            }
            let m = built.as_ref().expect("just built");
            for rep in 0..=cfg.reps {
                let t = Instant::now();
                let misses = match op {
                    Op::Lookup => {
                        let found = m.lookup_many(needle_ctx, black_box(probes));
                        let dt = elapsed_ms(t);
                        let misses = found.iter().filter(|v| v.is_none()).count();
                        black_box(found);
                        (dt, misses)
                    }
                    _ => {
                        let found = m.member_many(needle_ctx, black_box(probes));
                        let dt = elapsed_ms(t);
                        let misses = found.iter().filter(|&&b| !b).count();
                        black_box(found);
                        (dt, misses)
                    }
                };
                let (dt, misses) = misses;
                if misses > 0 {
                    return Err(BenchError::Verify {
                        imp,
                        detail: format!("{misses} inserted keys not found during {op}"),
                    });
                }
                if rep > 0 {
                    samples.push(dt);
                }
            }
        }
        let (mean, sd) = stats(&samples);
        out.push((op, mean, sd));
    }
    Ok(out)
}

fn run_kind<K>(cfg: &BenchConfig, ctx: Ctx<K>, keys: Vec<K::Key>) -> Result<Vec<ReportRow>, BenchError>
where
    K: KeySpec,
    Ctx<K>: Clone,
{
    let mut probes = keys.clone();
    if cfg.probe_order == ProbeOrder::Shuffled {
        probes.shuffle(&mut rng(cfg.seed, STREAM_PROBES));
    }
    let seed = cfg.seed;
    let mut rows = Vec::new();
    for &imp in &cfg.impls {
        let timings = match imp {
            Impl::HashMap => time_impl(cfg, imp, &ctx, &keys, &probes, |c, kvs| {
                HashMap::<K, u32>::from_array_nodup_seeded(seed, c, kvs)
            })?,
            Impl::BinSearch => time_impl(cfg, imp, &ctx, &keys, &probes, |c, kvs| {
                Ok(ArrayMap::<K, u32>::from_array_nodup(c, kvs, Layout::Sorted))
            })?,
            Impl::Eytzinger => time_impl(cfg, imp, &ctx, &keys, &probes, |c, kvs| {
                Ok(ArrayMap::<K, u32>::from_array_nodup(c, kvs, Layout::Eytzinger))
            })?,
        };
        rows.extend(timings.into_iter().map(|(op, mean_ms, stddev_ms)| ReportRow {
            imp,
            op,
            key_kind: cfg.key_kind,
            n: cfg.n,
            mean_ms,
            stddev_ms,
        }));
    }
    Ok(rows)
}

/// Times every (implementation, operation) pair of `cfg`. Lookup and member
/// probe every inserted key; construction uses the no-duplicates path.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<ReportRow>, BenchError> {
    cfg.validate()?;
    match cfg.key_kind {
        KeyKind::U64 => run_kind::<U64Keys>(cfg, (), gen_u64_keys(cfg.n, cfg.seed)),
        KeyKind::String => {
            let (ctx, keys) = gen_string_keys(cfg.n, cfg.seed);
            run_kind::<StrKeys>(cfg, ctx, keys)
        }
    }
}

pub fn render(rows: &[ReportRow], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["impl", "op", "key_kind", "n", "mean_ms", "stddev_ms"])
                .expect("writing to memory");
            for r in rows {
                w.write_record([
                    r.imp.to_string(),
                    r.op.to_string(),
                    r.key_kind.to_string(),
                    r.n.to_string(),
                    format!("{:.4}", r.mean_ms),
                    format!("{:.4}", r.stddev_ms),
                ])
                .expect("writing to memory");
            }
            String::from_utf8(w.into_inner().expect("flushing to memory")).expect("ascii output")
        }
        Format::Markdown => {
            let mut s = String::from("| impl | op | key_kind | n | mean_ms | stddev_ms |\n");
            s.push_str("|---|---|---|---:|---:|---:|\n");
            for r in rows {
                s.push_str(&format!(
                    "| {} | {} | {} | {} | {:.4} | {:.4} |\n",
                    r.imp, r.op, r.key_kind, r.n, r.mean_ms, r.stddev_ms
                ));
            }
            s
        }
    }
}

/// Probe counts from a successful [`verify`] run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub members: usize,
    /// Members probed through a different context (string keys only).
    pub foreign: usize,
    pub absent: usize,
}

fn check_all<K: KeySpec>(
    maps: &[(Impl, &dyn StaticMap<K, u32>)],
    needle_ctx: &K::Ctx,
    needles: &[(K::Key, Option<u32>)],
) -> Result<(), BenchError> {
    let keys: Vec<K::Key> = needles.iter().map(|(k, _)| *k).collect();
    for &(imp, m) in maps {
        let bulk = m.lookup_many(needle_ctx, &keys);
        let bulk_member = m.member_many(needle_ctx, &keys);
        for (i, (k, want)) in needles.iter().enumerate() {
            if bulk[i].copied() != *want || bulk_member[i] != want.is_some() {
                return Err(BenchError::Verify {
                    imp,
                    detail: format!("probe {i}: bulk lookup gave {:?}, expected {want:?}", bulk[i]),
                });
            }
            let got = m.lookup(needle_ctx, k).copied();
            let mem = m.member(needle_ctx, k);
            if got != *want || mem != want.is_some() {
                return Err(BenchError::Verify {
                    imp,
                    detail: format!("probe {i}: expected {want:?}, lookup gave {got:?}, member gave {mem}"),
                });
            }
        }
    }
    Ok(())
}

fn build_all<K>(seed: Seed, ctx: &Ctx<K>, keys: &[K::Key]) -> Result<[Box<dyn StaticMap<K, u32>>; 3], BenchError>
where
    K: KeySpec + 'static,
    Ctx<K>: Clone + 'static,
{
    Ok([
        Box::new(HashMap::<K, u32>::from_array_nodup_seeded(
            seed,
            ctx.clone(),
            pairs(keys),
        )?),
        Box::new(ArrayMap::<K, u32>::from_array_nodup(
            ctx.clone(),
            pairs(keys),
            Layout::Sorted,
        )),
        Box::new(ArrayMap::<K, u32>::from_array_nodup(
            ctx.clone(),
            pairs(keys),
            Layout::Eytzinger,
        )),
    ])
}

fn verify_u64(n: usize, seed: Seed, absent: usize) -> Result<VerifyReport, BenchError> {
    let keys = gen_u64_keys(n, seed);
    let maps = build_all::<U64Keys>(seed, &(), &keys)?;
    let maps: Vec<(Impl, &dyn StaticMap<U64Keys, u32>)> =
        Impl::ALL.iter().copied().zip(maps.iter().map(|b| b.as_ref())).collect();

    let present: HashSet<u64> = keys.iter().copied().collect();
    let mut needles: Vec<(u64, Option<u32>)> = pairs(&keys).into_iter().map(|(k, v)| (k, Some(v))).collect();
    let mut r = rng(seed, STREAM_NEEDLES);
    let mut extra = HashSet::new();
    // neighbours of members first, then uniform values
    let mut i = 0usize;
    while extra.len() < absent {
        let k = if i < absent / 2 {
            keys[i % keys.len()].wrapping_add(if i.is_multiple_of(2) { 1 } else { u64::MAX })
        } else {
            r.random()
        };
        i += 1;
        if !present.contains(&k) && extra.insert(k) {
            needles.push((k, None));
        }
    }
    check_all(&maps, &(), &needles)?;
    Ok(VerifyReport {
        members: n,
        foreign: 0,
        absent,
    })
}

fn verify_str(n: usize, seed: Seed, absent: usize) -> Result<VerifyReport, BenchError> {
    let (ctx, keys) = gen_string_keys(n, seed);
    let maps = build_all::<StrKeys>(seed, &ctx, &keys)?;
    let maps: Vec<(Impl, &dyn StaticMap<StrKeys, u32>)> =
        Impl::ALL.iter().copied().zip(maps.iter().map(|b| b.as_ref())).collect();

    let index: std::collections::HashMap<&[u8], u32> = keys
        .iter()
        .zip(0u32..)
        .map(|(k, v)| (&ctx[k.offset..k.offset + k.length], v))
        .collect();

    // members through the map's own context
    let own: Vec<(Slice, Option<u32>)> = pairs(&keys).into_iter().map(|(k, v)| (k, Some(v))).collect();
    check_all(&maps, &ctx[..], &own)?;

    // a second context holding the members in reverse order behind a prefix,
    // then absent needles: near misses of members and random strings
    let mut nctx = b"#".to_vec();
    let mut needles = Vec::with_capacity(n + absent);
    for (k, v) in pairs(&keys).into_iter().rev() {
        needles.push((Slice::new(nctx.len(), k.length), Some(v)));
        nctx.extend_from_slice(&ctx[k.offset..k.offset + k.length]);
    }
    let mut r = rng(seed, STREAM_NEEDLES);
    let mut extra: HashSet<Vec<u8>> = HashSet::new();
    let mut i = 0usize;
    while extra.len() < absent {
        let base = &keys[i % keys.len()];
        let mut s = ctx[base.offset..base.offset + base.length].to_vec();
        match i % 5 {
            0 => {
                let j = r.random_range(0..s.len());
                s[j] = ALPHABET[(ALPHABET.iter().position(|&c| c == s[j]).unwrap() + 1) % ALPHABET.len()];
            }
            1 => s.push(ALPHABET[r.random_range(0..ALPHABET.len())]),
            2 => {
                s.pop();
            }
            3 => s.insert(0, b'_'),
            _ => {
                let len = r.random_range(0..=MAX_STR_LEN + 5);
                s = random_string(&mut r, len);
            }
        }
        i += 1;
        if !index.contains_key(&s[..]) && !extra.contains(&s) {
            needles.push((Slice::new(nctx.len(), s.len()), None));
            nctx.extend_from_slice(&s);
            extra.insert(s);
        }
    }
    check_all(&maps, &nctx[..], &needles)?;
    Ok(VerifyReport {
        members: n,
        foreign: n,
        absent,
    })
}

/// Builds all three maps over generated keys and checks every member plus
/// [`VERIFY_ABSENT`] absent needles against an independent index.
pub fn verify(n: usize, key_kind: KeyKind, seed: Seed) -> Result<VerifyReport, BenchError> {
    verify_with(n, key_kind, seed, VERIFY_ABSENT)
}

pub fn verify_with(n: usize, key_kind: KeyKind, seed: Seed, absent: usize) -> Result<VerifyReport, BenchError> {
    if n == 0 {
        return Err(BenchError::Config("n must be at least 1"));
    }
    match key_kind {
        KeyKind::U64 => verify_u64(n, seed, absent),
        KeyKind::String => verify_str(n, seed, absent),
    }
}
