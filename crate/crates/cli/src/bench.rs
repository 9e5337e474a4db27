// SPDX-License-Identifier: MIT OR Apache-2.0

//! Parameter sweeps over a generated dataset. Methods run one after another
//! so timings do not interfere; every method's match set is checked against
//! the sequential scan before its row is written.

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, ValueEnum};
use fgm_core::datagen::{GroundTruth, Scenario};
use fgm_core::oracles::{core_prefilter, fixed_segments_match, sequential_scan};
use fgm_core::postprocess::verify_baseline;
use fgm_core::{io, ElbVariant, Engine, EngineConfig, Pattern, VerifyMode};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const STREAM_FILE: &str = "stream.csv";
pub const PATTERN_FILE: &str = "pattern.json";
pub const TRUTH_FILE: &str = "truth.json";

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    RegionRatio,
    ThresholdRatio,
    Probability,
    BlockRatio,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Self::RegionRatio => "region_ratio",
            Self::ThresholdRatio => "threshold_ratio",
            Self::Probability => "probability",
            Self::BlockRatio => "block_ratio",
        }
    }

    fn default_values(self) -> Vec<f64> {
        match self {
            Self::RegionRatio => vec![0.1, 0.3, 0.5, 0.7],
            Self::ThresholdRatio => vec![0.05, 0.1, 0.2, 0.3],
            Self::Probability => vec![1e-5, 1e-4, 1e-3],
            Self::BlockRatio => vec![0.01, 0.05, 0.1, 0.2, 0.4],
        }
    }
}

#[derive(Args)]
pub struct BenchArgs {
    /// Directory written by `gen`.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = Axis::BlockRatio)]
    axis: Axis,
    /// Axis values, comma separated (defaults span the usual sweep range).
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
    /// Only use the first LEN stream values.
    #[arg(long)]
    max_len: Option<usize>,
    /// Seed for regenerated streams on the probability axis.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Dataset {
    pattern: Pattern,
    stream: Vec<f64>,
    truth: GroundTruth,
}

fn load(dir: &Path, max_len: Option<usize>) -> Result<Dataset> {
    let truth_path = dir.join(TRUTH_FILE);
    ensure!(
        truth_path.exists(),
        "no ground truth at {}; generate the dataset with `fgm gen`",
        truth_path.display()
    );
    let truth: GroundTruth = serde_json::from_reader(std::fs::File::open(&truth_path)?)
        .with_context(|| format!("parsing {}", truth_path.display()))?;
    let pattern = io::read_pattern(&dir.join(PATTERN_FILE), None)?;
    let mut stream = io::read_series_file(&dir.join(STREAM_FILE))?;
    if let Some(len) = max_len {
        stream.truncate(len);
    }
    ensure!(
        stream.len() >= pattern.len(),
        "stream shorter than the pattern"
    );
    Ok(Dataset {
        pattern,
        stream,
        truth,
    })
}

#[derive(Clone, Copy, Debug)]
enum Method {
    Scan,
    PrefilterScan,
    Elb(ElbVariant, bool),
}

impl Method {
    fn all() -> Vec<Self> {
        let mut out = vec![Self::Scan, Self::PrefilterScan];
        for v in [ElbVariant::Element, ElbVariant::Subsequence] {
            for bsp in [false, true] {
                out.push(Self::Elb(v, bsp));
            }
        }
        out
    }

    fn label(self) -> (&'static str, &'static str) {
        match self {
            Self::Scan => ("ss", "n/a"),
            Self::PrefilterScan => ("prefilter+ss", "n/a"),
            Self::Elb(ElbVariant::Element, b) => ("elb-ele", if b { "on" } else { "off" }),
            Self::Elb(ElbVariant::Subsequence, b) => ("elb-seq", if b { "on" } else { "off" }),
        }
    }
}

struct Run {
    starts: Vec<u64>,
    seconds: f64,
    pruned: Option<u64>,
}

fn run_method(
    method: Method,
    pattern: &Pattern,
    stream: &[f64],
    block_width: usize,
) -> Result<Run> {
    let t = Instant::now();
    let (starts, pruned) = match method {
        Method::Scan => (
            sequential_scan(pattern, stream)?
                .iter()
                .map(|r| r.window_start)
                .collect(),
            None,
        ),
        Method::PrefilterScan => {
            let coarse = core_prefilter(pattern);
            let mut starts = Vec::new();
            let mut pruned = 0;
            for (s, window) in stream.windows(pattern.len()).enumerate() {
                if !fixed_segments_match(&coarse, window, pattern) {
                    pruned += 1;
                } else if verify_baseline(window, pattern)?.is_some() {
                    starts.push(s as u64 + 1);
                }
            }
            (starts, Some(pruned))
        }
        Method::Elb(variant, skipping) => {
            let config = EngineConfig {
                variant,
                block_width,
                skipping,
                verify: VerifyMode::Adaptive,
            };
            let mut engine = Engine::new(pattern.clone(), config)?;
            let starts = engine
                .push_all(stream)?
                .iter()
                .map(|r| r.window_start)
                .collect();
            (starts, Some(engine.stats().windows_pruned))
        }
    };
    Ok(Run {
        starts,
        seconds: t.elapsed().as_secs_f64(),
        pruned,
    })
}

fn pattern_with(data: &Dataset, region_ratio: f64, threshold_ratio: f64) -> Result<Pattern> {
    let scenario = Scenario {
        region_ratio,
        threshold_ratio,
        ..data.truth.scenario.clone()
    };
    Ok(scenario
        .pattern(data.pattern.elements().to_vec(), &data.truth.breakpoints)?
        .0)
}

pub fn run(args: BenchArgs) -> Result<()> {
    let data = load(&args.data, args.max_len)?;
    let values = if args.values.is_empty() {
        args.axis.default_values()
    } else {
        args.values.clone()
    };
    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(
        out,
        "axis,value,method,bsp,windows,matches,pruned_windows,seconds,ns_per_window,speedup_vs_ss"
    )?;
    let scenario = &data.truth.scenario;
    for &value in &values {
        let (pattern, stream, block_ratio) = match args.axis {
            Axis::RegionRatio => (
                pattern_with(&data, value, scenario.threshold_ratio)?,
                data.stream.clone(),
                fgm_core::datagen::DEFAULT_BLOCK_RATIO,
            ),
            Axis::ThresholdRatio => (
                pattern_with(&data, scenario.region_ratio, value)?,
                data.stream.clone(),
                fgm_core::datagen::DEFAULT_BLOCK_RATIO,
            ),
            Axis::Probability => {
                let regenerated = Scenario {
                    probability: value,
                    stream_len: data.stream.len(),
                    seed: args.seed.unwrap_or(scenario.seed),
                    ..scenario.clone()
                }
                .generate_with(data.pattern.elements().to_vec(), &data.truth.breakpoints)?;
                (
                    regenerated.pattern,
                    regenerated.stream,
                    fgm_core::datagen::DEFAULT_BLOCK_RATIO,
                )
            }
            Axis::BlockRatio => (data.pattern.clone(), data.stream.clone(), value),
        };
        let w = EngineConfig::width_for_ratio(pattern.len(), block_ratio);
        let windows = (stream.len() + 1 - pattern.len()) as u64;
        log::info!("{}={value}: block width {w}", args.axis.name());
        let mut reference: Option<(Vec<u64>, f64)> = None;
        for method in Method::all() {
            let run = run_method(method, &pattern, &stream, w)?;
            let (name, bsp) = method.label();
            let ss_seconds = match &reference {
                None => {
                    reference = Some((run.starts.clone(), run.seconds));
                    run.seconds
                }
                Some((starts, secs)) => {
                    if *starts != run.starts {
                        bail!(
                            "{}={value}: {name} (bsp {bsp}) found {} matches, sequential scan {}",
                            args.axis.name(),
                            run.starts.len(),
                            starts.len()
                        );
                    }
                    *secs
                }
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{:.6},{:.3},{:.3}",
                args.axis.name(),
                value,
                name,
                bsp,
                windows,
                run.starts.len(),
                run.pruned.map_or_else(String::new, |p| p.to_string()),
                run.seconds,
                run.seconds * 1e9 / windows as f64,
                ss_seconds / run.seconds.max(f64::MIN_POSITIVE)
            )?;
        }
    }
    out.flush()?;
    Ok(())
}
