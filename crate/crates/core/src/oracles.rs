// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reference implementations. These favour obviousness over speed and serve
//! as ground truth for tests and as baselines for benchmarks.

use crate::error::{FgmError, Result};
use crate::pattern::{
    is_fine_grained_match, normalized_euclidean, MatchReport, Pattern, Segmentation, Witness,
};
use crate::postprocess::{self, VerifyMode};

/// Largest number of segmentations [`exhaustive_verify`] will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// Slides over every window and verifies it with the baseline verifier.
pub fn sequential_scan(pattern: &Pattern, stream: &[f64]) -> Result<Vec<MatchReport>> {
    sequential_scan_with(pattern, stream, VerifyMode::Baseline)
}

pub fn sequential_scan_with(
    pattern: &Pattern,
    stream: &[f64],
    mode: VerifyMode,
) -> Result<Vec<MatchReport>> {
    let n = pattern.len();
    if stream.len() < n {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (s, window) in stream.windows(n).enumerate() {
        if let Some(w) = postprocess::verify(mode, window, pattern)? {
            out.push(MatchReport::new(s as u64 + 1, w));
        }
    }
    Ok(out)
}

/// Every valid witness of one window.
#[derive(Clone, Debug, PartialEq)]
pub struct ExhaustiveResult {
    pub enumerated: u128,
    pub witnesses: Vec<Witness>,
}

impl ExhaustiveResult {
    pub fn is_match(&self) -> bool {
        !self.witnesses.is_empty()
    }

    pub fn into_first(self) -> Option<Witness> {
        self.witnesses.into_iter().next()
    }
}

/// Every segmentation of `pattern`, in lexicographic breakpoint order.
pub fn all_segmentations(pattern: &Pattern) -> Result<Vec<Segmentation>> {
    let count = pattern.segmentation_count();
    if count > EXHAUSTIVE_LIMIT {
        return Err(FgmError::TooManySegmentations {
            count,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let regions = pattern.regions();
    let mut current: Vec<usize> = regions.iter().map(|r| r.left).collect();
    let mut out = Vec::with_capacity(count as usize);
    loop {
        out.push(Segmentation::new(pattern, current.clone())?);
        // Odometer increment, last region fastest.
        let mut k = regions.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            if current[k] < regions[k].right {
                current[k] += 1;
                break;
            }
            current[k] = regions[k].left;
        }
    }
}

/// Tries every segmentation.
pub fn exhaustive_verify(window: &[f64], pattern: &Pattern) -> Result<ExhaustiveResult> {
    let segmentations = all_segmentations(pattern)?;
    let enumerated = segmentations.len() as u128;
    let mut witnesses = Vec::new();
    for s in segmentations {
        if is_fine_grained_match(pattern, window, &s)? {
            witnesses.push(Witness::from_breakpoints(
                pattern,
                window,
                s.into_breakpoints(),
            ));
        }
    }
    Ok(ExhaustiveResult {
        enumerated,
        witnesses,
    })
}

/// A pattern piece with fixed boundaries: 1-based inclusive positions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedSegment {
    pub start: usize,
    pub end: usize,
    pub threshold: f64,
}

impl FixedSegment {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }
}

/// True iff every fixed segment of `window` is within its threshold.
pub fn fixed_segments_match(segments: &[FixedSegment], window: &[f64], pattern: &Pattern) -> bool {
    segments.iter().all(|s| {
        normalized_euclidean(
            &window[s.start - 1..s.end],
            &pattern.elements()[s.start - 1..s.end],
        )
        .is_ok_and(|d| d <= s.threshold)
    })
}

/// Freezes every breakpoint at one end of its region: the left end when the
/// next segment is at least as tolerant, the right end otherwise. Each
/// segment keeps its own threshold.
pub fn fixed_breakpoint_split(pattern: &Pattern) -> Vec<FixedSegment> {
    let eps = pattern.thresholds();
    let mut bps: Vec<usize> = pattern
        .regions()
        .iter()
        .enumerate()
        .map(|(k, r)| {
            if eps[k] <= eps[k + 1] {
                r.left
            } else {
                r.right
            }
        })
        .collect();
    bps.push(pattern.len());
    let mut start = 1;
    bps.iter()
        .zip(eps)
        .map(|(&end, &threshold)| {
            let s = FixedSegment {
                start,
                end,
                threshold,
            };
            start = end + 1;
            s
        })
        .collect()
}

/// Splits into the parts every segmentation agrees on and the break
/// regions in between. Cores keep their threshold; the part of a region
/// after its first position gets the larger neighbouring threshold.
pub fn region_split(pattern: &Pattern) -> Vec<FixedSegment> {
    let eps = pattern.thresholds();
    let mut out = Vec::with_capacity(2 * eps.len() - 1);
    let mut start = 1;
    for (k, r) in pattern.regions().iter().enumerate() {
        out.push(FixedSegment {
            start,
            end: r.left,
            threshold: eps[k],
        });
        if r.right > r.left {
            out.push(FixedSegment {
                start: r.left + 1,
                end: r.right,
                threshold: eps[k].max(eps[k + 1]),
            });
        }
        start = r.right + 1;
    }
    out.push(FixedSegment {
        start,
        end: pattern.len(),
        threshold: eps[eps.len() - 1],
    });
    out
}

/// Core-only pieces with thresholds inflated so that any fine-grained match
/// passes every piece. Suitable as a sound coarse prefilter for fixed
/// segment matchers.
pub fn core_prefilter(pattern: &Pattern) -> Vec<FixedSegment> {
    let b = pattern.segment_count();
    (0..b)
        .map(|k| {
            let core = pattern.core_range(k);
            let widest = pattern.right_edge(k) - pattern.left_edge(k);
            let scale = (widest as f64 / core.len() as f64).sqrt();
            FixedSegment {
                start: core.start + 1,
                end: core.end,
                threshold: pattern.threshold(k) * scale,
            }
        })
        .collect()
}
