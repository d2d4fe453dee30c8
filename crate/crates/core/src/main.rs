use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fksmap::bench::{self, BenchConfig, Format, Impl, KeyKind, Op, ProbeOrder};
use fksmap::codec::{KeyCodec, MapHeader};
use fksmap::{HashMap, Seed, Slice, StrKeys, U64Keys, DEFAULT_SEED};

#[derive(Parser)]
#[command(
    name = "fksmap",
    version,
    about = "Static perfect-hash maps: benchmarks and file tools"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Benchmark and cross-check the map implementations
    #[command(subcommand)]
    Bench(BenchCmd),
    /// Build maps from CSV files and query them
    #[command(subcommand)]
    Map(MapCmd),
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Time construction, lookup and membership
    Run(RunArgs),
    /// Check that all implementations agree with an independent index
    Verify(VerifyArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value = "u64", value_parser = parse::<KeyKind>)]
    keys: KeyKind,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: VerifyArgs,
    /// Comma-separated subset of hashmap,binsearch,eytzinger
    #[arg(long = "impl", default_value = "hashmap,binsearch,eytzinger", value_delimiter = ',', value_parser = parse::<Impl>)]
    impls: Vec<Impl>,
    /// Comma-separated subset of construct,lookup,member
    #[arg(long, default_value = "construct,lookup,member", value_delimiter = ',', value_parser = parse::<Op>)]
    ops: Vec<Op>,
    #[arg(long, default_value_t = bench::DEFAULT_REPS)]
    reps: usize,
    #[arg(long, default_value = "csv", value_parser = parse::<Format>)]
    format: Format,
    #[arg(long, default_value = "shuffled", value_parser = parse::<ProbeOrder>)]
    probe_order: ProbeOrder,
    /// Report timings without running verification first
    #[arg(long)]
    skip_verify: bool,
}

#[derive(Subcommand)]
enum MapCmd {
    /// Read `key,value` rows (with a header line) and write a map file
    Build {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "u64", value_parser = parse::<KeyKind>)]
        keys: KeyKind,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Look up one key per line of the input and write `key,found,value` rows
    Query {
        #[arg(long)]
        map: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse<T: std::str::FromStr<Err = bench::BenchError>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: bench::BenchError| e.to_string())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Bench(BenchCmd::Verify(a)) => {
            let r = bench::verify(a.n, a.keys, Seed(a.seed))?;
            println!(
                "verify ok: {} keys, {} members, {} via foreign context, {} absent",
                a.keys, r.members, r.foreign, r.absent
            );
            Ok(())
        }
        Cmd::Bench(BenchCmd::Run(a)) => bench_run(a),
        Cmd::Map(MapCmd::Build { input, out, keys, seed }) => {
            let seed = seed.map(Seed).unwrap_or(DEFAULT_SEED);
            match keys {
                KeyKind::U64 => build_u64(&input, &out, seed),
                KeyKind::String => build_str(&input, &out, seed),
            }
        }
        Cmd::Map(MapCmd::Query { map, input, out }) => query(&map, &input, &out),
    }
}

fn bench_run(a: RunArgs) -> Result<()> {
    let cfg = BenchConfig {
        n: a.common.n,
        key_kind: a.common.keys,
        impls: a.impls,
        ops: a.ops,
        seed: Seed(a.common.seed),
        reps: a.reps,
        format: a.format,
        probe_order: a.probe_order,
    };
    cfg.validate()?;
    if a.skip_verify {
        eprintln!("verification skipped (--skip-verify)");
    } else {
        let r = bench::verify(cfg.n, cfg.key_kind, cfg.seed)?;
        eprintln!(
            "verify ok: {} members, {} via foreign context, {} absent",
            r.members, r.foreign, r.absent
        );
    }
    let rows = bench::run_bench(&cfg)?;
    print!("{}", bench::render(&rows, cfg.format));
    Ok(())
}

fn read_rows(input: &Path) -> Result<Vec<(String, i64)>> {
    let mut rdr = csv::Reader::from_path(input).with_context(|| format!("opening {}", input.display()))?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("reading row {}", i + 1))?;
        if rec.len() != 2 {
            bail!("row {}: expected 2 fields, found {}", i + 1, rec.len());
        }
        let v: i64 = rec[1]
            .trim()
            .parse()
            .with_context(|| format!("row {}: bad value '{}'", i + 1, &rec[1]))?;
        rows.push((rec[0].to_string(), v));
    }
    if rows.is_empty() {
        bail!("{} has no rows", input.display());
    }
    Ok(rows)
}

fn write_map<K: KeyCodec>(m: &HashMap<K, i64>, rows: usize, out: &Path) -> Result<()> {
    let f = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    m.save(BufWriter::new(f))?;
    if m.len() < rows {
        eprintln!("{} repeated keys dropped (first value kept)", rows - m.len());
    }
    eprintln!("wrote {} keys to {}", m.len(), out.display());
    Ok(())
}

fn build_u64(input: &Path, out: &Path, seed: Seed) -> Result<()> {
    let rows = read_rows(input)?;
    let kvs = rows
        .iter()
        .enumerate()
        .map(|(i, (k, v))| {
            let k: u64 = k
                .trim()
                .parse()
                .with_context(|| format!("row {}: bad key '{k}'", i + 1))?;
            Ok((k, *v))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = HashMap::<U64Keys, i64>::from_array_seeded(seed, (), kvs)?;
    write_map(&m, rows.len(), out)
}

fn build_str(input: &Path, out: &Path, seed: Seed) -> Result<()> {
    let rows = read_rows(input)?;
    let mut ctx = Vec::new();
    let mut kvs = Vec::with_capacity(rows.len());
    for (k, v) in &rows {
        kvs.push((Slice::new(ctx.len(), k.len()), *v));
        ctx.extend_from_slice(k.as_bytes());
    }
    let m = HashMap::<StrKeys, i64>::from_array_seeded(seed, ctx, kvs)?;
    write_map(&m, rows.len(), out)
}

fn query(map: &Path, input: &Path, out: &Path) -> Result<()> {
    let bytes = std::fs::read(map).with_context(|| format!("reading {}", map.display()))?;
    let header = MapHeader::peek(&bytes)?;
    let needles: Vec<String> =
        BufReader::new(File::open(input).with_context(|| format!("opening {}", input.display()))?)
            .lines()
            .collect::<Result<_, _>>()?;

    let results: Vec<Option<i64>> = if header.key_kind == U64Keys::KIND {
        let m = HashMap::<U64Keys, i64>::from_bytes(&bytes)?;
        needles
            .iter()
            .map(|s| s.trim().parse::<u64>().ok().and_then(|k| m.lookup(&(), &k).copied()))
            .collect()
    } else if header.key_kind == StrKeys::KIND {
        let m = HashMap::<StrKeys, i64>::from_bytes(&bytes)?;
        let ctx: Vec<u8> = needles.iter().flat_map(|s| s.bytes()).collect();
        let mut off = 0;
        needles
            .iter()
            .map(|s| {
                let k = Slice::new(off, s.len());
                off += s.len();
                m.lookup(&ctx, &k).copied()
            })
            .collect()
    } else {
        bail!("unknown key kind {} in {}", header.key_kind, map.display());
    };

    let f = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    w.write_record(["key", "found", "value"])?;
    for (k, r) in needles.iter().zip(&results) {
        let v = r.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([k.as_str(), if r.is_some() { "true" } else { "false" }, v.as_str()])?;
    }
    w.flush()?;
    let hits = results.iter().filter(|r| r.is_some()).count();
    eprintln!("{hits} of {} keys found", needles.len());
    std::io::stderr().flush()?;
    Ok(())
}
