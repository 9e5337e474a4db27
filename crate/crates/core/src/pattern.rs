// SPDX-License-Identifier: MIT OR Apache-2.0

//! Pattern data model and the normalized Euclidean distance.
//!
//! Positions are 1-based throughout: a pattern of length `n` has positions
//! `1..=n`, and breakpoint `bp` means "segment ends at position `bp`". A
//! segment `(bp_{k-1}, bp_k]` therefore maps onto the zero-based slice
//! `elements[bp_{k-1}..bp_k]` without any arithmetic. Segment and region
//! indices are zero-based.

use crate::error::{FgmError, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Range;

/// Inclusive interval `[left, right]` of positions a breakpoint may take.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct BreakRegion {
    pub left: usize,
    pub right: usize,
}

impl BreakRegion {
    pub const fn new(left: usize, right: usize) -> Self {
        Self { left, right }
    }

    /// A region of width one, i.e. a fixed breakpoint.
    pub const fn fixed(at: usize) -> Self {
        Self::new(at, at)
    }

    pub fn width(&self) -> usize {
        self.right + 1 - self.left
    }

    pub fn contains(&self, position: usize) -> bool {
        self.left <= position && position <= self.right
    }

    pub fn positions(&self) -> std::ops::RangeInclusive<usize> {
        self.left..=self.right
    }
}

impl From<[usize; 2]> for BreakRegion {
    fn from([left, right]: [usize; 2]) -> Self {
        Self { left, right }
    }
}

impl From<BreakRegion> for [usize; 2] {
    fn from(region: BreakRegion) -> Self {
        [region.left, region.right]
    }
}

impl fmt::Display for BreakRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.left, self.right)
    }
}

/// One broken pattern invariant. Region and segment numbers in messages are
/// 1-based to line up with the file format.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    EmptyPattern,
    NonFiniteElement {
        position: usize,
    },
    NoThresholds,
    ThresholdCount {
        regions: usize,
        thresholds: usize,
    },
    RegionOutOfRange {
        region: usize,
        bounds: BreakRegion,
        len: usize,
    },
    InvertedRegion {
        region: usize,
        bounds: BreakRegion,
    },
    OverlappingRegions {
        region: usize,
        first: BreakRegion,
        second: BreakRegion,
    },
    NonPositiveThreshold {
        segment: usize,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyPattern => write!(f, "empty pattern"),
            Self::NonFiniteElement { position } => {
                write!(f, "non-finite element at position {position}")
            }
            Self::NoThresholds => write!(f, "no thresholds given"),
            Self::ThresholdCount {
                regions,
                thresholds,
            } => write!(
                f,
                "threshold count mismatch: {regions} regions need {} thresholds, got {thresholds}",
                regions + 1
            ),
            Self::RegionOutOfRange {
                region,
                bounds,
                len,
            } => write!(
                f,
                "region out of range: BR_{} {bounds} must lie within [1, {}]",
                region + 1,
                len.saturating_sub(1)
            ),
            Self::InvertedRegion { region, bounds } => {
                write!(f, "inverted region: BR_{} {bounds}", region + 1)
            }
            Self::OverlappingRegions {
                region,
                first,
                second,
            } => write!(
                f,
                "overlapping regions: BR_{} {first} and BR_{} {second}",
                region + 1,
                region + 2
            ),
            Self::NonPositiveThreshold { segment, value } => write!(
                f,
                "non-positive threshold: segment {} has {value}",
                segment + 1
            ),
        }
    }
}

/// Checks every pattern invariant and reports all violations found.
pub fn validate_pattern(
    elements: &[f64],
    regions: &[BreakRegion],
    thresholds: &[f64],
) -> Vec<Violation> {
    let mut violations = Vec::new();
    let n = elements.len();
    if n == 0 {
        violations.push(Violation::EmptyPattern);
    }
    for (i, value) in elements.iter().enumerate() {
        if !value.is_finite() {
            violations.push(Violation::NonFiniteElement { position: i + 1 });
        }
    }
    if thresholds.is_empty() {
        violations.push(Violation::NoThresholds);
    } else if thresholds.len() != regions.len() + 1 {
        violations.push(Violation::ThresholdCount {
            regions: regions.len(),
            thresholds: thresholds.len(),
        });
    }
    for (k, region) in regions.iter().enumerate() {
        if region.left > region.right {
            violations.push(Violation::InvertedRegion {
                region: k,
                bounds: *region,
            });
        } else if region.left < 1 || region.right >= n {
            violations.push(Violation::RegionOutOfRange {
                region: k,
                bounds: *region,
                len: n,
            });
        }
    }
    for (k, pair) in regions.windows(2).enumerate() {
        if pair[0].right >= pair[1].left {
            violations.push(Violation::OverlappingRegions {
                region: k,
                first: pair[0],
                second: pair[1],
            });
        }
    }
    for (k, &eps) in thresholds.iter().enumerate() {
        // NaN fails this test too.
        if !(eps > 0.0 && eps.is_finite()) {
            violations.push(Violation::NonPositiveThreshold {
                segment: k,
                value: eps,
            });
        }
    }
    violations
}

/// A multi-segment query pattern with per-segment thresholds and fuzzy
/// break regions between consecutive segments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PatternParts", into = "PatternParts")]
pub struct Pattern {
    elements: Vec<f64>,
    regions: Vec<BreakRegion>,
    thresholds: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PatternParts {
    elements: Vec<f64>,
    #[serde(default)]
    regions: Vec<BreakRegion>,
    thresholds: Vec<f64>,
}

impl TryFrom<PatternParts> for Pattern {
    type Error = FgmError;

    fn try_from(parts: PatternParts) -> Result<Self> {
        Pattern::new(parts.elements, parts.regions, parts.thresholds)
    }
}

impl From<Pattern> for PatternParts {
    fn from(p: Pattern) -> Self {
        Self {
            elements: p.elements,
            regions: p.regions,
            thresholds: p.thresholds,
        }
    }
}

impl Pattern {
    pub fn new(
        elements: Vec<f64>,
        regions: Vec<BreakRegion>,
        thresholds: Vec<f64>,
    ) -> Result<Self> {
        let violations = validate_pattern(&elements, &regions, &thresholds);
        if !violations.is_empty() {
            return Err(FgmError::InvalidPattern(violations));
        }
        Ok(Self {
            elements,
            regions,
            thresholds,
        })
    }

    /// Classic whole-window matching: one segment, one threshold.
    pub fn single_segment(elements: Vec<f64>, threshold: f64) -> Result<Self> {
        Self::new(elements, Vec::new(), vec![threshold])
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[f64] {
        &self.elements
    }

    pub fn regions(&self) -> &[BreakRegion] {
        &self.regions
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Number of segments `b`.
    pub fn segment_count(&self) -> usize {
        self.thresholds.len()
    }

    pub fn threshold(&self, segment: usize) -> f64 {
        self.thresholds[segment]
    }

    /// Same pattern with different thresholds.
    pub fn with_thresholds(&self, thresholds: Vec<f64>) -> Result<Self> {
        Self::new(self.elements.clone(), self.regions.clone(), thresholds)
    }

    /// `l_{k-1}`: the earliest breakpoint that can precede `segment`
    /// (0 for the first segment).
    pub fn left_edge(&self, segment: usize) -> usize {
        if segment == 0 {
            0
        } else {
            self.regions[segment - 1].left
        }
    }

    /// `r_k`: the latest position `segment` can end at (`n` for the last).
    pub fn right_edge(&self, segment: usize) -> usize {
        if segment + 1 == self.segment_count() {
            self.len()
        } else {
            self.regions[segment].right
        }
    }

    /// Positions `(r_{k-1}, l_k]` that belong to `segment` under every
    /// segmentation, as a zero-based slice range.
    pub fn core_range(&self, segment: usize) -> Range<usize> {
        let start = if segment == 0 {
            0
        } else {
            self.regions[segment - 1].right
        };
        let end = if segment + 1 == self.segment_count() {
            self.len()
        } else {
            self.regions[segment].left
        };
        start..end
    }

    /// Smallest and largest segment index that `position` can fall into
    /// across all segmentations.
    pub fn segment_span(&self, position: usize) -> (usize, usize) {
        debug_assert!((1..=self.len()).contains(&position));
        // Positions up to l_k are always in a segment <= k; positions past
        // l_k may already be in k+1 and positions past r_k must be.
        let lowest = self
            .regions
            .iter()
            .take_while(|region| position > region.right)
            .count();
        let highest = self
            .regions
            .iter()
            .take_while(|region| position > region.left)
            .count();
        (lowest, highest)
    }

    /// Total number of distinct segmentations, `prod |BR_k|`.
    pub fn segmentation_count(&self) -> u128 {
        self.regions
            .iter()
            .map(|region| region.width() as u128)
            .product()
    }

    pub(crate) fn check_window(&self, window: &[f64]) -> Result<()> {
        if window.len() != self.len() {
            return Err(FgmError::LengthMismatch {
                left: self.len(),
                right: window.len(),
            });
        }
        Ok(())
    }
}

/// A concrete choice of breakpoints `bp_1 < ... < bp_{b-1}`, each inside
/// its break region.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Segmentation {
    breakpoints: Vec<usize>,
}

impl Segmentation {
    pub fn new(pattern: &Pattern, breakpoints: Vec<usize>) -> Result<Self> {
        if breakpoints.len() != pattern.regions().len() {
            return Err(FgmError::InvalidSegmentation(format!(
                "expected {} breakpoints, got {}",
                pattern.regions().len(),
                breakpoints.len()
            )));
        }
        for (k, (bp, region)) in breakpoints.iter().zip(pattern.regions()).enumerate() {
            if !region.contains(*bp) {
                return Err(FgmError::InvalidSegmentation(format!(
                    "bp_{} = {bp} lies outside BR_{} {region}",
                    k + 1,
                    k + 1
                )));
            }
        }
        Ok(Self { breakpoints })
    }

    /// Builds a segmentation without validation. Callers guarantee every
    /// breakpoint lies in its region.
    pub(crate) fn from_trusted(breakpoints: Vec<usize>) -> Self {
        Self { breakpoints }
    }

    pub fn breakpoints(&self) -> &[usize] {
        &self.breakpoints
    }

    pub fn into_breakpoints(self) -> Vec<usize> {
        self.breakpoints
    }

    /// Zero-based slice range of `segment`: `bp_{k-1}..bp_k`.
    pub fn range(&self, pattern: &Pattern, segment: usize) -> Range<usize> {
        let start = if segment == 0 {
            0
        } else {
            self.breakpoints[segment - 1]
        };
        let end = if segment == self.breakpoints.len() {
            pattern.len()
        } else {
            self.breakpoints[segment]
        };
        start..end
    }

    pub fn ranges<'a>(&'a self, pattern: &'a Pattern) -> impl Iterator<Item = Range<usize>> + 'a {
        (0..=self.breakpoints.len()).map(move |k| self.range(pattern, k))
    }
}

/// 1-based inclusive positions `(bp_{k-1} + 1, bp_k)` of `segment`
/// (zero-based segment index).
pub fn segment_bounds(
    pattern: &Pattern,
    segmentation: &Segmentation,
    segment: usize,
) -> Result<(usize, usize)> {
    let b = pattern.segment_count();
    if segment >= b {
        return Err(FgmError::OutOfRange {
            what: "segment",
            index: segment,
            min: 0,
            max: b - 1,
        });
    }
    let range = segmentation.range(pattern, segment);
    Ok((range.start + 1, range.end))
}

#[inline]
pub(crate) fn sum_squared_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

/// `sqrt((1/m) * sum |x_i - y_i|^2)` for two sequences of equal length `m`.
pub fn normalized_euclidean(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(FgmError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(FgmError::Empty);
    }
    Ok((sum_squared_diff(x, y) / x.len() as f64).sqrt())
}

/// Per-segment normalized distances of `window` against `pattern` under
/// `segmentation`.
pub fn segment_distances(
    pattern: &Pattern,
    window: &[f64],
    segmentation: &Segmentation,
) -> Result<Vec<f64>> {
    pattern.check_window(window)?;
    Ok(segmentation
        .ranges(pattern)
        .map(|range| {
            let m = range.len() as f64;
            (sum_squared_diff(&window[range.clone()], &pattern.elements()[range]) / m).sqrt()
        })
        .collect())
}

/// True iff every segment of `window` is within its threshold under the
/// given segmentation.
pub fn is_fine_grained_match(
    pattern: &Pattern,
    window: &[f64],
    segmentation: &Segmentation,
) -> Result<bool> {
    Ok(segment_distances(pattern, window, segmentation)?
        .iter()
        .zip(pattern.thresholds())
        .all(|(d, eps)| d <= eps))
}

/// Breakpoints and per-segment distances proving that a window matches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub breakpoints: Vec<usize>,
    pub segment_distances: Vec<f64>,
}

impl Witness {
    pub(crate) fn from_breakpoints(
        pattern: &Pattern,
        window: &[f64],
        breakpoints: Vec<usize>,
    ) -> Self {
        let segmentation = Segmentation::from_trusted(breakpoints);
        let segment_distances = segment_distances(pattern, window, &segmentation)
            .expect("caller checked the window length");
        Self {
            breakpoints: segmentation.into_breakpoints(),
            segment_distances,
        }
    }

    pub fn segmentation(&self) -> Segmentation {
        Segmentation::from_trusted(self.breakpoints.clone())
    }
}

/// One accepted sliding window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub window_start: u64,
    pub breakpoints: Vec<usize>,
    pub segment_distances: Vec<f64>,
}

impl MatchReport {
    pub fn new(window_start: u64, witness: Witness) -> Self {
        Self {
            window_start,
            breakpoints: witness.breakpoints,
            segment_distances: witness.segment_distances,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_segment_pattern() -> Pattern {
        Pattern::new(
            (1..=15).map(f64::from).collect(),
            vec![BreakRegion::new(4, 5), BreakRegion::new(11, 13)],
            vec![1.0, 2.0, 2.0],
        )
        .unwrap()
    }

    #[test]
    fn normalized_euclidean_basics() {
        let x = [0.3, -1.0, 2.5];
        assert_eq!(normalized_euclidean(&x, &x).unwrap(), 0.0);
        assert_eq!(normalized_euclidean(&[0.0; 4], &[2.0; 4]).unwrap(), 2.0);
        assert!(matches!(
            normalized_euclidean(&[1.0], &[1.0, 2.0]),
            Err(FgmError::LengthMismatch { .. })
        ));
        assert!(matches!(
            normalized_euclidean(&[], &[]),
            Err(FgmError::Empty)
        ));
    }

    #[test]
    fn normalized_euclidean_matches_summation_loop() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_pcg::Pcg32::seed_from_u64(11);
        for _ in 0..10 {
            let x: Vec<f64> = (0..7).map(|_| rng.random_range(-5.0..5.0)).collect();
            let y: Vec<f64> = (0..7).map(|_| rng.random_range(-5.0..5.0)).collect();
            let mut acc = 0.0;
            for i in 0..7 {
                acc += (x[i] - y[i]).abs().powi(2);
            }
            let oracle = (acc / 7.0).sqrt();
            let got = normalized_euclidean(&x, &y).unwrap();
            assert!((got - oracle).abs() <= 1e-12 * oracle.max(1.0));
        }
    }

    #[test]
    fn three_segment_bounds() {
        let p = three_segment_pattern();
        let s = Segmentation::new(&p, vec![4, 12]).unwrap();
        assert_eq!(segment_bounds(&p, &s, 0).unwrap(), (1, 4));
        assert_eq!(segment_bounds(&p, &s, 1).unwrap(), (5, 12));
        assert_eq!(segment_bounds(&p, &s, 2).unwrap(), (13, 15));
        assert!(segment_bounds(&p, &s, 3).is_err());
    }

    #[test]
    fn single_segment_spans_everything() {
        let p = Pattern::single_segment(vec![1.0; 6], 0.5).unwrap();
        let s = Segmentation::new(&p, vec![]).unwrap();
        assert_eq!(segment_bounds(&p, &s, 0).unwrap(), (1, 6));
    }

    #[test]
    fn segmentation_rejects_breakpoint_outside_region() {
        let p = three_segment_pattern();
        assert!(Segmentation::new(&p, vec![6, 12]).is_err());
        assert!(Segmentation::new(&p, vec![4]).is_err());
    }

    #[test]
    fn validate_three_segment_ok() {
        let p = three_segment_pattern();
        assert!(validate_pattern(p.elements(), p.regions(), p.thresholds()).is_empty());
    }

    #[test]
    fn validate_reports_overlap_and_nonpositive_threshold() {
        let elements = vec![0.0; 10];
        let v = validate_pattern(
            &elements,
            &[BreakRegion::new(4, 5), BreakRegion::new(5, 7)],
            &[1.0, 1.0, 1.0],
        );
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().starts_with("overlapping regions"));

        let v = validate_pattern(&elements, &[BreakRegion::new(4, 5)], &[1.0, 0.0]);
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().starts_with("non-positive threshold"));
    }

    #[test]
    fn validate_reports_range_and_count_problems() {
        let elements = vec![0.0; 5];
        let v = validate_pattern(&elements, &[BreakRegion::new(3, 5)], &[1.0]);
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::RegionOutOfRange { .. })));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::ThresholdCount { .. })));
        let v = validate_pattern(&elements, &[BreakRegion::new(0, 2)], &[1.0, 1.0]);
        assert!(matches!(v[0], Violation::RegionOutOfRange { .. }));
        let v = validate_pattern(&elements, &[BreakRegion::new(3, 2)], &[1.0, 1.0]);
        assert!(matches!(v[0], Violation::InvertedRegion { .. }));
        let v = validate_pattern(&[], &[], &[]);
        assert_eq!(v, vec![Violation::EmptyPattern, Violation::NoThresholds]);
    }

    #[test]
    fn fine_grained_match_examples() {
        let elements: Vec<f64> = (0..8).map(|i| (i as f64).sin()).collect();
        let p = Pattern::new(
            elements.clone(),
            vec![BreakRegion::new(3, 5)],
            vec![1.0, 1.0],
        )
        .unwrap();
        for bp in 3..=5 {
            let s = Segmentation::new(&p, vec![bp]).unwrap();
            assert!(is_fine_grained_match(&p, &elements, &s).unwrap());
        }
        let s = Segmentation::new(&p, vec![4]).unwrap();
        let mut w = elements.clone();
        for v in &mut w[4..] {
            *v += 10.0;
        }
        assert!(!is_fine_grained_match(&p, &w, &s).unwrap());
    }

    #[test]
    fn segment_span_positions() {
        let p = three_segment_pattern();
        let spans: Vec<_> = (1..=15).map(|i| p.segment_span(i)).collect();
        // BR_1 = [4,5]: position 5 may be in segment 0 or 1.
        assert_eq!(spans[3], (0, 0));
        assert_eq!(spans[4], (0, 1));
        assert_eq!(spans[5], (1, 1));
        // BR_2 = [11,13]: positions 12, 13 may be in segment 1 or 2.
        assert_eq!(spans[10], (1, 1));
        assert_eq!(spans[11], (1, 2));
        assert_eq!(spans[12], (1, 2));
        assert_eq!(spans[13], (2, 2));
        assert_eq!(p.segmentation_count(), 6);
    }

    #[test]
    fn pattern_json_roundtrip_validates() {
        let p = three_segment_pattern();
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"regions\":[[4,5],[11,13]]"));
        let back: Pattern = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"elements":[1,2,3],"regions":[[1,2]],"thresholds":[1.0,-1.0]}"#;
        assert!(serde_json::from_str::<Pattern>(bad).is_err());
    }
}
