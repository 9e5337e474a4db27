// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic workloads: random-walk streams with embedded noisy pattern
//! instances, thresholds from a value-range ratio, and break regions grown
//! symmetrically around fixed breakpoints.
//!
//! All randomness comes from a seeded `Pcg32`, so a seed reproduces a
//! dataset bit for bit on any platform.

use crate::error::{FgmError, Result};
use crate::pattern::{BreakRegion, Pattern};
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg32;
use serde::{Deserialize, Serialize};

pub const DEFAULT_THRESHOLD_RATIO: f64 = 0.2;
pub const DEFAULT_PROBABILITY: f64 = 1e-4;
pub const DEFAULT_REGION_RATIO: f64 = 0.1;
pub const DEFAULT_BLOCK_RATIO: f64 = 0.05;

pub fn rng(seed: u64) -> Pcg32 {
    Pcg32::seed_from_u64(seed)
}

/// `s_i = start + sum_{j <= i} (u_j - 0.5)` with `u_j` uniform on `[0, 1)`.
pub fn random_walk(length: usize, start: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng(seed);
    random_walk_from_uniforms(start, (0..length).map(|_| rng.random::<f64>()))
}

/// Random walk driven by caller-supplied uniforms.
pub fn random_walk_from_uniforms(start: f64, uniforms: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut level = start;
    uniforms
        .into_iter()
        .map(|u| {
            level += u - 0.5;
            level
        })
        .collect()
}

/// How an instance is written into the stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpliceMode {
    /// Overwrite with the instance values as they are.
    #[default]
    Raw,
    /// Shift the instance so its first value equals the stream value it
    /// replaces.
    Shift,
}

impl std::str::FromStr for SpliceMode {
    type Err = FgmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Self::Raw),
            "shift" => Ok(Self::Shift),
            other => Err(FgmError::Parse(format!(
                "unknown splice mode '{other}'; expected raw or shift"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    /// 1-based start timestamp.
    pub start: u64,
    /// Index into the instance list.
    pub instance: usize,
}

/// Writes instances at Bernoulli-sampled, non-overlapping starts: every
/// free position starts an instance with probability `probability`.
pub fn embed_patterns(
    stream: &mut [f64],
    instances: &[Vec<f64>],
    probability: f64,
    splice: SpliceMode,
    seed: u64,
) -> Result<Vec<Embedding>> {
    if instances.is_empty() || instances.iter().any(Vec::is_empty) {
        return Err(FgmError::Generation("no instances to embed".into()));
    }
    let longest = instances.iter().map(Vec::len).max().unwrap_or(1);
    if !(0.0..=1.0 / longest as f64).contains(&probability) {
        return Err(FgmError::Generation(format!(
            "occurrence probability {probability} must lie in [0, 1/{longest}] to keep instances apart"
        )));
    }
    let mut rng = rng(seed);
    let mut out = Vec::new();
    let mut t = 0;
    while t < stream.len() {
        if probability > 0.0 && rng.random_bool(probability) {
            let which = rng.random_range(0..instances.len());
            let inst = &instances[which];
            if t + inst.len() <= stream.len() {
                let shift = match splice {
                    SpliceMode::Raw => 0.0,
                    SpliceMode::Shift => stream[t] - inst[0],
                };
                for (dst, v) in stream[t..t + inst.len()].iter_mut().zip(inst) {
                    *dst = v + shift;
                }
                out.push(Embedding {
                    start: t as u64 + 1,
                    instance: which,
                });
                t += inst.len();
                continue;
            }
        }
        t += 1;
    }
    Ok(out)
}

/// `ratio` times the value range of each segment's widest extent
/// `(l_{k-1}, r_k]`.
pub fn thresholds_from_ratio(
    elements: &[f64],
    regions: &[BreakRegion],
    ratio: f64,
) -> Result<Vec<f64>> {
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(FgmError::Generation(format!(
            "threshold ratio {ratio} must be positive"
        )));
    }
    let n = elements.len();
    (0..=regions.len())
        .map(|k| {
            let from = if k == 0 { 0 } else { regions[k - 1].left };
            let to = regions.get(k).map_or(n, |r| r.right);
            let span = elements
                .get(from..to)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| {
                    FgmError::Generation(format!("segment {} has an empty extent", k + 1))
                })?;
            let lo = span.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = span.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi <= lo {
                return Err(FgmError::Generation(format!(
                    "segment {} has zero value range",
                    k + 1
                )));
            }
            Ok(ratio * (hi - lo))
        })
        .collect()
}

/// `[bp - radius, bp + radius]` for each breakpoint, clamped to `[1, n-1]`.
pub fn extend_breakpoints(
    breakpoints: &[usize],
    radius: usize,
    n: usize,
) -> Result<Vec<BreakRegion>> {
    let regions: Vec<BreakRegion> = breakpoints
        .iter()
        .map(|&bp| {
            if bp == 0 || bp >= n {
                return Err(FgmError::Generation(format!(
                    "breakpoint {bp} outside [1, {}]",
                    n.saturating_sub(1)
                )));
            }
            Ok(BreakRegion::new(
                bp.saturating_sub(radius).max(1),
                (bp + radius).min(n - 1),
            ))
        })
        .collect::<Result<_>>()?;
    if let Some(pair) = regions.windows(2).find(|w| w[0].right >= w[1].left) {
        return Err(FgmError::Generation(format!(
            "radius {radius} makes regions {} and {} overlap",
            pair[0], pair[1]
        )));
    }
    Ok(regions)
}

/// Length of the shortest segment under fixed breakpoints.
pub fn shortest_segment(breakpoints: &[usize], n: usize) -> usize {
    let mut prev = 0;
    let mut shortest = usize::MAX;
    for &bp in breakpoints.iter().chain(std::iter::once(&n)) {
        shortest = shortest.min(bp - prev);
        prev = bp;
    }
    shortest
}

/// Radius whose region size `2r + 1` is about `ratio` times the shortest
/// segment.
pub fn radius_for_region_ratio(breakpoints: &[usize], n: usize, ratio: f64) -> usize {
    (ratio * shortest_segment(breakpoints, n) as f64 / 2.0).round() as usize
}

/// Fixed breakpoints of the built-in 235-point demo shape.
pub const DEMO_BREAKPOINTS: [usize; 4] = [43, 72, 140, 159];
pub const DEMO_LENGTH: usize = 235;

/// A smooth five-part shape of length 235: a rise, a plateau with ripple, a
/// long decline, a sharp dip and a slow recovery.
pub fn demo_shape() -> Vec<f64> {
    (1..=DEMO_LENGTH)
        .map(|i| {
            let x = i as f64;
            let trend = match i {
                1..=43 => -1.0 + 2.0 * x / 43.0,
                44..=72 => 1.0 + 0.15 * ((x - 43.0) / 29.0 * std::f64::consts::TAU).sin(),
                73..=140 => 1.0 - 1.6 * (x - 72.0) / 68.0,
                141..=159 => -0.6 - 0.8 * ((x - 140.0) / 19.0 * std::f64::consts::PI).sin(),
                _ => -0.6 + 0.9 * (x - 159.0) / 76.0,
            };
            trend + 0.05 * (x * 0.9).sin()
        })
        .collect()
}

/// Noisy copies of `base`: uniform noise of amplitude `noise` per element.
pub fn noisy_instances(base: &[f64], count: usize, noise: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            base.iter()
                .map(|v| {
                    v + if noise > 0.0 {
                        rng.random_range(-noise..noise)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Parameters of one synthetic dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub stream_len: usize,
    pub threshold_ratio: f64,
    pub region_ratio: f64,
    pub probability: f64,
    /// Noise amplitude of embedded instances, relative to the smallest
    /// segment threshold.
    pub noise_ratio: f64,
    pub instances: usize,
    pub walk_start: f64,
    pub splice: SpliceMode,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            stream_len: 1_000_000,
            threshold_ratio: DEFAULT_THRESHOLD_RATIO,
            region_ratio: DEFAULT_REGION_RATIO,
            probability: DEFAULT_PROBABILITY,
            noise_ratio: 0.5,
            instances: 10,
            walk_start: 0.0,
            splice: SpliceMode::Raw,
            seed: 7,
        }
    }
}

/// Ground truth written next to a generated stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub scenario: Scenario,
    pub breakpoints: Vec<usize>,
    pub radius: usize,
    pub embeddings: Vec<Embedding>,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub pattern: Pattern,
    pub stream: Vec<f64>,
    pub truth: GroundTruth,
}

impl Scenario {
    /// Pattern built from `shape` and fixed `breakpoints` with this
    /// scenario's region and threshold ratios.
    pub fn pattern(&self, shape: Vec<f64>, breakpoints: &[usize]) -> Result<(Pattern, usize)> {
        let n = shape.len();
        let radius = radius_for_region_ratio(breakpoints, n, self.region_ratio);
        let regions = extend_breakpoints(breakpoints, radius, n)?;
        let thresholds = thresholds_from_ratio(&shape, &regions, self.threshold_ratio)?;
        Ok((Pattern::new(shape, regions, thresholds)?, radius))
    }

    /// Generates a dataset around an arbitrary shape.
    pub fn generate_with(&self, shape: Vec<f64>, breakpoints: &[usize]) -> Result<Dataset> {
        let (pattern, radius) = self.pattern(shape, breakpoints)?;
        let tightest = pattern
            .thresholds()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let instances = noisy_instances(
            pattern.elements(),
            self.instances.max(1),
            self.noise_ratio * tightest,
            self.seed.wrapping_add(1),
        );
        let mut stream = random_walk(self.stream_len, self.walk_start, self.seed);
        let embeddings = embed_patterns(
            &mut stream,
            &instances,
            self.probability,
            self.splice,
            self.seed.wrapping_add(2),
        )?;
        Ok(Dataset {
            pattern,
            stream,
            truth: GroundTruth {
                scenario: self.clone(),
                breakpoints: breakpoints.to_vec(),
                radius,
                embeddings,
            },
        })
    }

    /// Generates a dataset around the built-in demo shape.
    pub fn generate(&self) -> Result<Dataset> {
        self.generate_with(demo_shape(), &DEMO_BREAKPOINTS)
    }
}
