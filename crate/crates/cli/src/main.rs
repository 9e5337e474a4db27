// SPDX-License-Identifier: MIT OR Apache-2.0

#![forbid(unsafe_code)]

mod bench;
mod options;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fgm_core::bsp::LookupTable;
use fgm_core::datagen::{Scenario, SpliceMode};
use fgm_core::{io, ElbProfile, Engine, EngineConfig, MatchReport, Pattern};
use options::{BlockSpec, ElbArg, ReportFormat, Toggle, VerifyArg};
use serde::Serialize;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "fgm",
    version,
    about = "Fine-grained multi-segment pattern matching over time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream a series through the engine and print every matching window.
    Match(MatchArgs),
    /// Sweep one parameter across all methods on a generated dataset.
    Bench(bench::BenchArgs),
    /// Generate a random-walk stream with embedded pattern instances.
    Gen(GenArgs),
    /// Dump a pattern's block bounds and value-region lookup table.
    Inspect(InspectArgs),
}

#[derive(Args, Clone)]
pub struct PatternArgs {
    /// Pattern JSON, or a CSV of elements with a sidecar.
    #[arg(long)]
    pub pattern: PathBuf,
    /// Sidecar JSON with regions and thresholds for a CSV pattern
    /// (default: NAME.meta.json next to it).
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

impl PatternArgs {
    pub fn load(&self) -> Result<Pattern> {
        io::read_pattern(&self.pattern, self.sidecar.as_deref())
            .with_context(|| format!("loading pattern {}", self.pattern.display()))
    }
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    pattern: PatternArgs,
    /// Series CSV, or '-' for standard input.
    #[arg(long, default_value = "-")]
    stream: String,
    #[arg(long, value_enum, default_value_t = ElbArg::Seq)]
    elb: ElbArg,
    /// Block width: an element count or a percentage of the pattern length.
    #[arg(long, default_value = "5%")]
    block: BlockSpec,
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    bsp: Toggle,
    #[arg(long, value_enum, default_value_t = VerifyArg::Adaptive)]
    verify: VerifyArg,
    #[arg(long, value_enum, default_value_t = ReportFormat::Jsonl)]
    report: ReportFormat,
    /// Accepted for interface uniformity; matching is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    /// Stream length.
    #[arg(long, default_value_t = 1_000_000)]
    len: usize,
    /// Per-position occurrence probability of an embedded instance.
    #[arg(long, default_value_t = 1e-4)]
    prob: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Segment threshold as a fraction of the segment's value range.
    #[arg(long, default_value_t = 0.2)]
    threshold_ratio: f64,
    /// Break-region size as a fraction of the shortest segment.
    #[arg(long, default_value_t = 0.1)]
    region_ratio: f64,
    /// Instance noise amplitude relative to the smallest threshold.
    #[arg(long, default_value_t = 0.5)]
    noise_ratio: f64,
    /// Number of distinct noisy instances.
    #[arg(long, default_value_t = 10)]
    instances: usize,
    #[arg(long, value_enum, default_value_t = SpliceArg::Raw)]
    splice: SpliceArg,
    /// Pattern shape CSV; defaults to the built-in 235-point shape.
    #[arg(long, requires = "breakpoints")]
    shape: Option<PathBuf>,
    /// Fixed breakpoints of the shape, comma separated.
    #[arg(long, value_delimiter = ',')]
    breakpoints: Vec<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum SpliceArg {
    Raw,
    Shift,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    pattern: PatternArgs,
    #[arg(long, value_enum, default_value_t = ElbArg::Seq)]
    elb: ElbArg,
    #[arg(long, default_value = "5%")]
    block: BlockSpec,
}

#[derive(Serialize)]
struct RunStats {
    values: u64,
    windows: u64,
    windows_pruned: u64,
    windows_verified: u64,
    matches: u64,
    queues: u64,
    queues_pruned: u64,
    queues_skipped: u64,
    block_comparisons: u64,
    table_lookups: u64,
    delta_evaluations: u64,
    block_width: usize,
    wall_time_s: f64,
    mean_window_ns: f64,
}

fn open_stream(spec: &str) -> Result<Box<dyn BufRead>> {
    if spec == "-" {
        Ok(Box::new(BufReader::new(std::io::stdin().lock())))
    } else {
        let file = File::open(spec).with_context(|| format!("opening stream {spec}"))?;
        Ok(Box::new(BufReader::new(file)))
    }
}

fn write_report(out: &mut impl Write, format: ReportFormat, report: &MatchReport) -> Result<()> {
    match format {
        ReportFormat::Jsonl => {
            serde_json::to_writer(&mut *out, report)?;
            writeln!(out)?;
        }
        ReportFormat::Csv => {
            let join = |v: Vec<String>| v.join(";");
            writeln!(
                out,
                "{},{},{}",
                report.window_start,
                join(report.breakpoints.iter().map(ToString::to_string).collect()),
                join(
                    report
                        .segment_distances
                        .iter()
                        .map(ToString::to_string)
                        .collect()
                )
            )?;
        }
    }
    Ok(())
}

fn cmd_match(args: MatchArgs) -> Result<()> {
    let pattern = args.pattern.load()?;
    let config = EngineConfig {
        variant: args.elb.into(),
        block_width: args.block.resolve(pattern.len())?,
        skipping: args.bsp.into(),
        verify: args.verify.into(),
    };
    log::info!(
        "pattern n={} segments={} block={} elb={} bsp={} verify={}",
        pattern.len(),
        pattern.segment_count(),
        config.block_width,
        config.variant,
        config.skipping,
        config.verify
    );
    let values = io::read_series(open_stream(&args.stream)?).context("reading stream")?;
    let n = pattern.len() as u64;
    let mut engine = Engine::new(pattern, config)?;
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    if args.report == ReportFormat::Csv {
        writeln!(out, "window_start,breakpoints,segment_distances")?;
    }
    let started = Instant::now();
    for (i, v) in values.iter().enumerate() {
        for report in engine.push_value(i as u64 + 1, *v)? {
            write_report(&mut out, args.report, &report)?;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    out.flush()?;

    let s = engine.stats();
    let windows = s.values.saturating_sub(n - 1);
    let stats = RunStats {
        values: s.values,
        windows,
        windows_pruned: s.windows_pruned,
        windows_verified: s.windows_verified,
        matches: s.matches,
        queues: s.queues,
        queues_pruned: s.queues_pruned,
        queues_skipped: s.queues_skipped,
        block_comparisons: s.block_comparisons,
        table_lookups: s.table_lookups,
        delta_evaluations: s.delta_evaluations,
        block_width: config.block_width,
        wall_time_s: elapsed,
        mean_window_ns: if windows == 0 {
            0.0
        } else {
            elapsed * 1e9 / windows as f64
        },
    };
    eprintln!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let scenario = Scenario {
        stream_len: args.len,
        threshold_ratio: args.threshold_ratio,
        region_ratio: args.region_ratio,
        probability: args.prob,
        noise_ratio: args.noise_ratio,
        instances: args.instances,
        walk_start: 0.0,
        splice: match args.splice {
            SpliceArg::Raw => SpliceMode::Raw,
            SpliceArg::Shift => SpliceMode::Shift,
        },
        seed: args.seed,
    };
    let data = match &args.shape {
        Some(path) => scenario.generate_with(io::read_series_file(path)?, &args.breakpoints)?,
        None => scenario.generate()?,
    };
    std::fs::create_dir_all(&args.out)?;
    io::write_series(
        BufWriter::new(File::create(args.out.join(bench::STREAM_FILE))?),
        &data.stream,
    )?;
    io::write_pattern(&args.out.join(bench::PATTERN_FILE), &data.pattern)?;
    write_json(&args.out.join(bench::TRUTH_FILE), &data.truth)?;
    log::info!(
        "wrote {} values with {} embedded instances to {}",
        data.stream.len(),
        data.truth.embeddings.len(),
        args.out.display()
    );
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct InspectOutput {
    pattern_len: usize,
    segments: usize,
    profile: fgm_core::elb::ProfileDump,
    lookup: fgm_core::bsp::LookupDump,
}

fn cmd_inspect(args: InspectArgs) -> Result<()> {
    let pattern = args.pattern.load()?;
    let profile = ElbProfile::build(
        &pattern,
        args.elb.into(),
        args.block.resolve(pattern.len())?,
    )?;
    let output = InspectOutput {
        pattern_len: pattern.len(),
        segments: pattern.segment_count(),
        profile: profile.dump(),
        lookup: LookupTable::build(&profile).dump(),
    };
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FGM_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Match(a) => cmd_match(a),
        Command::Bench(a) => bench::run(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Inspect(a) => cmd_inspect(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
