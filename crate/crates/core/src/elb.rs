// SPDX-License-Identifier: MIT OR Apache-2.0

//! Equal-Length Block profiles.
//!
//! Both the pattern and the stream are cut into disjoint blocks of `w`
//! elements (the last `n mod w` pattern positions are ignored). Pattern block
//! `j` is summarised by `[lower_j, upper_j]`, a stream block by one scalar
//! feature. If any of `w` consecutive windows matches the pattern, the
//! features of the first window's blocks all lie inside their aligned
//! bounds, so one mismatch prunes the whole group.
//!
//! Two implementations are provided:
//!
//! * [`ElbVariant::Element`]: envelope `p_i ± theta_ele(i)`, feature = last
//!   value of the block.
//! * [`ElbVariant::Subsequence`]: envelope `mean(P[i-w+1..=i]) ± theta_seq(i)`,
//!   feature = block mean. The first block carries infinite bounds.

use crate::error::{FgmError, Result};
use crate::pattern::Pattern;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Relative widening applied to every envelope line so that floating-point
/// rounding in feature computation can never push an exact match outside.
const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElbVariant {
    #[serde(rename = "ele")]
    Element,
    #[serde(rename = "seq")]
    Subsequence,
}

impl ElbVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Element => "ele",
            Self::Subsequence => "seq",
        }
    }
}

impl fmt::Display for ElbVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElbVariant {
    type Err = FgmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ele" | "element" => Ok(Self::Element),
            "seq" | "subsequence" => Ok(Self::Subsequence),
            other => Err(FgmError::Parse(format!(
                "unknown ELB variant '{other}'; expected 'ele' or 'seq'"
            ))),
        }
    }
}

/// `md(k) = eps_k * sqrt(r_k - l_{k-1})`: the largest Euclidean distance
/// segment `k` can tolerate under any segmentation.
pub fn max_distance(pattern: &Pattern, segment: usize) -> Result<f64> {
    let b = pattern.segment_count();
    if segment >= b {
        return Err(FgmError::OutOfRange {
            what: "segment",
            index: segment,
            min: 0,
            max: b - 1,
        });
    }
    let span = pattern.right_edge(segment) - pattern.left_edge(segment);
    Ok(pattern.threshold(segment) * (span as f64).sqrt())
}

pub fn max_distances(pattern: &Pattern) -> Vec<f64> {
    (0..pattern.segment_count())
        .map(|k| max_distance(pattern, k).expect("segment index in range"))
        .collect()
}

fn check_position(pattern: &Pattern, position: usize, min: usize) -> Result<()> {
    if position < min || position > pattern.len() {
        return Err(FgmError::OutOfRange {
            what: "position",
            index: position,
            min,
            max: pattern.len(),
        });
    }
    Ok(())
}

/// Per-element tolerance: the largest `md` over the segments `position`
/// can belong to.
pub fn theta_ele(pattern: &Pattern, position: usize) -> Result<f64> {
    check_position(pattern, position, 1)?;
    let md = max_distances(pattern);
    Ok(theta_ele_with(pattern, &md, position))
}

fn theta_ele_with(pattern: &Pattern, md: &[f64], position: usize) -> f64 {
    let (lo, hi) = pattern.segment_span(position);
    md[lo..=hi]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Tolerance on the mean of the `width`-length subsequence ending at
/// `position`: `sqrt(sum md(k)^2 / w)` over every segment the subsequence
/// can touch.
pub fn theta_seq(pattern: &Pattern, position: usize, width: usize) -> Result<f64> {
    if width == 0 || width > pattern.len() {
        return Err(FgmError::OutOfRange {
            what: "block width",
            index: width,
            min: 1,
            max: pattern.len(),
        });
    }
    check_position(pattern, position, width)?;
    let md = max_distances(pattern);
    Ok(theta_seq_with(pattern, &md, position, width))
}

fn theta_seq_with(pattern: &Pattern, md: &[f64], position: usize, width: usize) -> f64 {
    let first = pattern.segment_span(position + 1 - width).0;
    let last = pattern.segment_span(position).1;
    let sum_sq: f64 = md[first..=last].iter().map(|d| d * d).sum();
    (sum_sq / width as f64).sqrt()
}

fn widen(center: f64, theta: f64) -> (f64, f64) {
    let slack = ROUNDING_SLACK * (center.abs() + theta);
    (center - theta - slack, center + theta + slack)
}

/// Feature of one stream block, tagged with its absolute 1-based global
/// block number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockFeature {
    pub block_index: u64,
    pub value: f64,
}

/// Pattern-side ELB summary for one variant and block width.
#[derive(Clone, Debug, PartialEq)]
pub struct ElbProfile {
    variant: ElbVariant,
    width: usize,
    block_lower: Vec<f64>,
    block_upper: Vec<f64>,
    envelope_lower: Vec<f64>,
    envelope_upper: Vec<f64>,
    first_defined: usize,
    max_distances: Vec<f64>,
}

impl ElbProfile {
    pub fn build(pattern: &Pattern, variant: ElbVariant, width: usize) -> Result<Self> {
        let n = pattern.len();
        if width == 0 || width > n {
            return Err(FgmError::OutOfRange {
                what: "block width",
                index: width,
                min: 1,
                max: n,
            });
        }
        let md = max_distances(pattern);
        let p = pattern.elements();
        let mut envelope_lower = vec![f64::NAN; n];
        let mut envelope_upper = vec![f64::NAN; n];
        let first_defined = match variant {
            ElbVariant::Element => 1,
            ElbVariant::Subsequence => width,
        };
        for position in first_defined..=n {
            let (center, theta) = match variant {
                ElbVariant::Element => (p[position - 1], theta_ele_with(pattern, &md, position)),
                ElbVariant::Subsequence => {
                    let block = &p[position - width..position];
                    let mean = block.iter().sum::<f64>() / width as f64;
                    (mean, theta_seq_with(pattern, &md, position, width))
                }
            };
            let (lo, hi) = widen(center, theta);
            envelope_lower[position - 1] = lo;
            envelope_upper[position - 1] = hi;
        }

        let blocks = n / width;
        let mut block_lower = Vec::with_capacity(blocks);
        let mut block_upper = Vec::with_capacity(blocks);
        for j in 0..blocks {
            if variant == ElbVariant::Subsequence && j == 0 {
                block_lower.push(f64::NEG_INFINITY);
                block_upper.push(f64::INFINITY);
                continue;
            }
            let span = j * width..(j + 1) * width;
            block_lower.push(
                envelope_lower[span.clone()]
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min),
            );
            block_upper.push(
                envelope_upper[span]
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max),
            );
        }

        Ok(Self {
            variant,
            width,
            block_lower,
            block_upper,
            envelope_lower,
            envelope_upper,
            first_defined,
            max_distances: md,
        })
    }

    /// A profile defined only by its block bounds (no envelope), e.g. one
    /// reloaded from a dump or written by hand.
    pub fn from_block_bounds(
        variant: ElbVariant,
        width: usize,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 {
            return Err(FgmError::OutOfRange {
                what: "block width",
                index: 0,
                min: 1,
                max: usize::MAX,
            });
        }
        if lower.is_empty() {
            return Err(FgmError::Empty);
        }
        if lower.len() != upper.len() {
            return Err(FgmError::LengthMismatch {
                left: lower.len(),
                right: upper.len(),
            });
        }
        if let Some(j) =
            (0..lower.len()).find(|&j| lower[j].partial_cmp(&upper[j]).is_none_or(|o| o.is_gt()))
        {
            return Err(FgmError::Parse(format!(
                "block {} has lower bound {} above upper bound {}",
                j + 1,
                lower[j],
                upper[j]
            )));
        }
        Ok(Self {
            variant,
            width,
            block_lower: lower,
            block_upper: upper,
            envelope_lower: Vec::new(),
            envelope_upper: Vec::new(),
            first_defined: 1,
            max_distances: Vec::new(),
        })
    }

    pub fn variant(&self) -> ElbVariant {
        self.variant
    }

    /// Block width `w`.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of pattern blocks `N`.
    pub fn block_count(&self) -> usize {
        self.block_lower.len()
    }

    pub fn block_lower(&self) -> &[f64] {
        &self.block_lower
    }

    pub fn block_upper(&self) -> &[f64] {
        &self.block_upper
    }

    /// `(lower, upper)` of zero-based pattern block `j`.
    pub fn block_bounds(&self, j: usize) -> (f64, f64) {
        (self.block_lower[j], self.block_upper[j])
    }

    /// `md(k)` for every segment; empty for profiles built from bounds.
    pub fn max_distances(&self) -> &[f64] {
        &self.max_distances
    }

    /// `(L_i, U_i)` at 1-based `position`, if defined.
    pub fn envelope(&self, position: usize) -> Option<(f64, f64)> {
        if position < self.first_defined || position > self.envelope_lower.len() {
            return None;
        }
        Some((
            self.envelope_lower[position - 1],
            self.envelope_upper[position - 1],
        ))
    }

    #[inline]
    pub fn feature_value(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.width);
        match self.variant {
            ElbVariant::Element => values[values.len() - 1],
            ElbVariant::Subsequence => values.iter().sum::<f64>() / values.len() as f64,
        }
    }

    /// Feature of a `w`-length stream block.
    pub fn block_feature(&self, values: &[f64], block_index: u64) -> Result<BlockFeature> {
        if values.len() != self.width {
            return Err(FgmError::LengthMismatch {
                left: self.width,
                right: values.len(),
            });
        }
        Ok(BlockFeature {
            block_index,
            value: self.feature_value(values),
        })
    }

    /// Inclusive bound check against zero-based pattern block `j`.
    #[inline]
    pub fn matches(&self, value: f64, j: usize) -> bool {
        self.block_lower[j] <= value && value <= self.block_upper[j]
    }

    pub fn block_matches(&self, feature: &BlockFeature, j: usize) -> Result<bool> {
        if j >= self.block_count() {
            return Err(FgmError::OutOfRange {
                what: "pattern block",
                index: j,
                min: 0,
                max: self.block_count() - 1,
            });
        }
        Ok(self.matches(feature.value, j))
    }

    pub fn dump(&self) -> ProfileDump {
        let finite = |v: f64| v.is_finite().then_some(v);
        ProfileDump {
            variant: self.variant,
            width: self.width,
            block_count: self.block_count(),
            blocks: (0..self.block_count())
                .map(|j| BlockBounds {
                    block: j + 1,
                    lower: finite(self.block_lower[j]),
                    upper: finite(self.block_upper[j]),
                })
                .collect(),
        }
    }

    pub fn from_dump(dump: &ProfileDump) -> Result<Self> {
        if dump.blocks.len() != dump.block_count {
            return Err(FgmError::LengthMismatch {
                left: dump.block_count,
                right: dump.blocks.len(),
            });
        }
        let lower = dump
            .blocks
            .iter()
            .map(|b| b.lower.unwrap_or(f64::NEG_INFINITY))
            .collect();
        let upper = dump
            .blocks
            .iter()
            .map(|b| b.upper.unwrap_or(f64::INFINITY))
            .collect();
        Self::from_block_bounds(dump.variant, dump.width, lower, upper)
    }
}

/// Serialisable block bounds. Missing bounds stand for ±infinity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileDump {
    pub variant: ElbVariant,
    pub width: usize,
    pub block_count: usize,
    pub blocks: Vec<BlockBounds>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockBounds {
    pub block: usize,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

pub fn build_profile_ele(pattern: &Pattern, width: usize) -> Result<ElbProfile> {
    ElbProfile::build(pattern, ElbVariant::Element, width)
}

pub fn build_profile_seq(pattern: &Pattern, width: usize) -> Result<ElbProfile> {
    ElbProfile::build(pattern, ElbVariant::Subsequence, width)
}
