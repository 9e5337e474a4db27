// SPDX-License-Identifier: MIT OR Apache-2.0

//! Exact verification of candidate windows.
//!
//! With `delta(i, eps) = |c_i - p_i|^2 - eps^2` and `Delta(l, r, eps)` its
//! sum over `[l, r]`, a stretch satisfies its threshold iff `Delta <= 0`.
//! The adaptive verifier walks the break regions left to right, keeping
//! for each region only the breakpoint that leaves the smallest `Delta`
//! for the next segment; any other feasible breakpoint is dominated by it.
//! Every position is scanned at most twice, so verification is `O(n)`.
//!
//! [`verify_baseline`] keeps full potential sets and checks every pair of
//! consecutive breakpoints from scratch, `O(n r^2)` in the worst case.

use crate::error::{FgmError, Result};
use crate::pattern::{normalized_euclidean, BreakRegion, Pattern, Witness};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Patterns longer than this accumulate `Delta` with compensated summation.
pub const COMPENSATED_SUM_ABOVE: usize = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    #[default]
    Adaptive,
    Baseline,
    Exhaustive,
}

impl VerifyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Adaptive => "adaptive",
            Self::Baseline => "baseline",
            Self::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for VerifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VerifyMode {
    type Err = FgmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adaptive" => Ok(Self::Adaptive),
            "baseline" => Ok(Self::Baseline),
            "exhaustive" => Ok(Self::Exhaustive),
            other => Err(FgmError::Parse(format!(
                "unknown verification mode '{other}'; expected adaptive, baseline or exhaustive"
            ))),
        }
    }
}

/// Verifies `window` with the chosen strategy.
pub fn verify(mode: VerifyMode, window: &[f64], pattern: &Pattern) -> Result<Option<Witness>> {
    match mode {
        VerifyMode::Adaptive => verify_adaptive(window, pattern),
        VerifyMode::Baseline => verify_baseline(window, pattern),
        VerifyMode::Exhaustive => {
            Ok(crate::oracles::exhaustive_verify(window, pattern)?.into_first())
        }
    }
}

fn check_inputs(window: &[f64], pattern: &Pattern) -> Result<()> {
    pattern.check_window(window)
}

fn check_position(pattern: &Pattern, position: usize) -> Result<()> {
    if position == 0 || position > pattern.len() {
        return Err(FgmError::OutOfRange {
            what: "position",
            index: position,
            min: 1,
            max: pattern.len(),
        });
    }
    Ok(())
}

/// `delta(i, eps) = |c_i - p_i|^2 - eps^2` at 1-based position `i`.
pub fn delta(window: &[f64], pattern: &Pattern, position: usize, eps: f64) -> Result<f64> {
    check_inputs(window, pattern)?;
    check_position(pattern, position)?;
    let d = window[position - 1] - pattern.elements()[position - 1];
    Ok(d * d - eps * eps)
}

/// `Delta(l, r, eps)`: sum of `delta` over `[l, r]`.
pub fn big_delta(
    window: &[f64],
    pattern: &Pattern,
    left: usize,
    right: usize,
    eps: f64,
) -> Result<f64> {
    check_inputs(window, pattern)?;
    if left > right {
        return Err(FgmError::InvalidInterval { left, right });
    }
    check_position(pattern, left)?;
    check_position(pattern, right)?;
    let mut acc = DeltaAccumulator::empty_at(eps, left, pattern.len() > COMPENSATED_SUM_ABOVE);
    let p = pattern.elements();
    while acc.right() < right {
        let i = acc.right() + 1;
        let d = window[i - 1] - p[i - 1];
        acc.push_right(d * d);
    }
    Ok(acc.value())
}

/// Running `Delta(l, r, eps)` over a contiguous interval that can grow in
/// either direction.
#[derive(Clone, Copy, Debug)]
pub struct DeltaAccumulator {
    eps_sq: f64,
    sum: f64,
    compensation: f64,
    compensated: bool,
    left: usize,
    right: usize,
}

impl DeltaAccumulator {
    /// Empty interval positioned so that the next `push_right` covers
    /// `position` and the next `push_left` covers `position - 1`.
    pub fn empty_at(eps: f64, position: usize, compensated: bool) -> Self {
        Self {
            eps_sq: eps * eps,
            sum: 0.0,
            compensation: 0.0,
            compensated,
            left: position,
            right: position - 1,
        }
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    pub fn is_empty(&self) -> bool {
        self.right < self.left
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    fn add(&mut self, term: f64) {
        if self.compensated {
            // Neumaier's variant of Kahan summation.
            let t = self.sum + term;
            if self.sum.abs() >= term.abs() {
                self.compensation += (self.sum - t) + term;
            } else {
                self.compensation += (term - t) + self.sum;
            }
            self.sum = t;
        } else {
            self.sum += term;
        }
    }

    /// Extends the interval by one position on the right, given the squared
    /// element-pair distance there.
    pub fn push_right(&mut self, squared_distance: f64) {
        self.add(squared_distance - self.eps_sq);
        self.right += 1;
    }

    /// Extends the interval by one position on the left.
    pub fn push_left(&mut self, squared_distance: f64) {
        debug_assert!(self.left > 1);
        self.add(squared_distance - self.eps_sq);
        self.left -= 1;
    }
}

/// Positions of one break region that can end the current segment given
/// a fixed segment start.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSet {
    /// Zero-based region index.
    pub region: usize,
    /// Segment start `L` the set was computed from.
    pub anchor: usize,
    /// Sorted member positions.
    pub members: Vec<usize>,
    /// `Delta(L, j, eps_k)` for each member.
    pub deltas: Vec<f64>,
}

impl PotentialSet {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, position: usize) -> bool {
        self.members.binary_search(&position).is_ok()
    }
}

/// Element-pair squared distances with an evaluation counter.
struct Scanner<'a> {
    window: &'a [f64],
    pattern: &'a [f64],
    evaluations: usize,
    compensated: bool,
}

impl<'a> Scanner<'a> {
    fn new(window: &'a [f64], pattern: &'a Pattern) -> Self {
        Self {
            window,
            pattern: pattern.elements(),
            evaluations: 0,
            compensated: pattern.len() > COMPENSATED_SUM_ABOVE,
        }
    }

    #[inline]
    fn squared(&mut self, position: usize) -> f64 {
        self.evaluations += 1;
        let d = self.window[position - 1] - self.pattern[position - 1];
        d * d
    }

    /// Grows `acc` rightwards through `region.right`, collecting the
    /// positions of `region` whose running `Delta` is non-positive. A
    /// non-empty `acc` may already end inside the region.
    fn collect_potential(
        &mut self,
        acc: &mut DeltaAccumulator,
        region: BreakRegion,
    ) -> (Vec<usize>, Vec<f64>) {
        let mut members = Vec::new();
        let mut deltas = Vec::new();
        if !acc.is_empty() && region.contains(acc.right()) && acc.value() <= 0.0 {
            members.push(acc.right());
            deltas.push(acc.value());
        }
        while acc.right() < region.right {
            let position = acc.right() + 1;
            let sq = self.squared(position);
            acc.push_right(sq);
            if position >= region.left && acc.value() <= 0.0 {
                members.push(position);
                deltas.push(acc.value());
            }
        }
        (members, deltas)
    }

    /// Right-to-left scan from `r_k + 1` down to `l_k + 1` with the next
    /// segment's threshold. Returns the member minimising
    /// `Delta(j + 1, r_k + 1, eps_next)` (rightmost on ties) together with
    /// the accumulator for that suffix.
    fn best_breakpoint(
        &mut self,
        region: BreakRegion,
        members: &[usize],
        eps_next: f64,
    ) -> Option<(usize, DeltaAccumulator)> {
        let mut acc = DeltaAccumulator::empty_at(eps_next, region.right + 2, self.compensated);
        let mut best: Option<(usize, DeltaAccumulator)> = None;
        let mut cursor = members.len();
        for position in (region.left + 1..=region.right + 1).rev() {
            let sq = self.squared(position);
            acc.push_left(sq);
            let candidate = position - 1;
            while cursor > 0 && members[cursor - 1] > candidate {
                cursor -= 1;
            }
            if cursor > 0 && members[cursor - 1] == candidate {
                let better = best
                    .as_ref()
                    .is_none_or(|(_, incumbent)| acc.value() < incumbent.value());
                if better {
                    best = Some((candidate, acc));
                }
            }
        }
        best
    }
}

/// Potential set of region `region` for a segment starting at `anchor`:
/// every `j` in the region with `Delta(anchor, j, eps_k) <= 0`.
pub fn potential_set(
    window: &[f64],
    pattern: &Pattern,
    region: usize,
    anchor: usize,
) -> Result<PotentialSet> {
    check_inputs(window, pattern)?;
    let regions = pattern.regions();
    if region >= regions.len() {
        return Err(FgmError::OutOfRange {
            what: "region",
            index: region,
            min: 0,
            max: regions.len().saturating_sub(1),
        });
    }
    let bounds = regions[region];
    if anchor == 0 || anchor > bounds.left {
        return Err(FgmError::OutOfRange {
            what: "anchor",
            index: anchor,
            min: 1,
            max: bounds.left,
        });
    }
    let mut scanner = Scanner::new(window, pattern);
    let mut acc =
        DeltaAccumulator::empty_at(pattern.threshold(region), anchor, scanner.compensated);
    let (members, deltas) = scanner.collect_potential(&mut acc, bounds);
    Ok(PotentialSet {
        region,
        anchor,
        members,
        deltas,
    })
}

/// The member of `ps` minimising `Delta(j + 1, r_k + 1, eps_{k+1})`, with
/// that minimum. Ties go to the rightmost member.
pub fn optimal_breakpoint(
    window: &[f64],
    pattern: &Pattern,
    ps: &PotentialSet,
) -> Result<(usize, f64)> {
    check_inputs(window, pattern)?;
    if ps.is_empty() {
        return Err(FgmError::EmptyPotentialSet);
    }
    let region = *pattern
        .regions()
        .get(ps.region)
        .ok_or(FgmError::OutOfRange {
            what: "region",
            index: ps.region,
            min: 0,
            max: pattern.regions().len().saturating_sub(1),
        })?;
    let mut scanner = Scanner::new(window, pattern);
    let (bp, acc) = scanner
        .best_breakpoint(region, &ps.members, pattern.threshold(ps.region + 1))
        .ok_or(FgmError::EmptyPotentialSet)?;
    Ok((bp, acc.value()))
}

/// Linear-time exact verification. Returns a witness segmentation built
/// from the optimal breakpoints, or `None` if no segmentation matches.
pub fn verify_adaptive(window: &[f64], pattern: &Pattern) -> Result<Option<Witness>> {
    Ok(verify_adaptive_counted(window, pattern)?.0)
}

/// [`verify_adaptive`] plus the number of element-pair distance
/// evaluations it performed (at most `2n`).
pub fn verify_adaptive_counted(
    window: &[f64],
    pattern: &Pattern,
) -> Result<(Option<Witness>, usize)> {
    check_inputs(window, pattern)?;
    let mut scanner = Scanner::new(window, pattern);
    let verdict = adaptive_scan(&mut scanner, pattern);
    let evaluations = scanner.evaluations;
    Ok((
        verdict.map(|bps| Witness::from_breakpoints(pattern, window, bps)),
        evaluations,
    ))
}

fn adaptive_scan(scanner: &mut Scanner<'_>, pattern: &Pattern) -> Option<Vec<usize>> {
    let thresholds = pattern.thresholds();
    let mut acc = DeltaAccumulator::empty_at(thresholds[0], 1, scanner.compensated);
    let mut breakpoints = Vec::with_capacity(pattern.regions().len());
    for (k, &region) in pattern.regions().iter().enumerate() {
        let (members, _) = scanner.collect_potential(&mut acc, region);
        if members.is_empty() {
            return None;
        }
        let (bp, suffix) = scanner.best_breakpoint(region, &members, thresholds[k + 1])?;
        breakpoints.push(bp);
        // Delta(bp + 1, r_k + 1, eps_{k+1}) is where the next segment's
        // forward scan resumes.
        acc = suffix;
    }
    while acc.right() < pattern.len() {
        let sq = scanner.squared(acc.right() + 1);
        acc.push_right(sq);
    }
    (acc.value() <= 0.0).then_some(breakpoints)
}

fn within(window: &[f64], pattern: &[f64], from: usize, to: usize, eps: f64) -> bool {
    // 1-based inclusive [from, to].
    normalized_euclidean(&window[from - 1..to], &pattern[from - 1..to])
        .expect("non-empty equal-length slices")
        <= eps
}

/// Quadratic-per-region verification with full potential sets.
pub fn verify_baseline(window: &[f64], pattern: &Pattern) -> Result<Option<Witness>> {
    check_inputs(window, pattern)?;
    let n = pattern.len();
    let p = pattern.elements();
    let thresholds = pattern.thresholds();
    // For every region, (member, predecessor breakpoint) pairs.
    let mut levels: Vec<Vec<(usize, usize)>> = Vec::with_capacity(pattern.regions().len());
    for (k, region) in pattern.regions().iter().enumerate() {
        let previous: Vec<usize> = match levels.last() {
            Some(level) => level.iter().map(|&(j, _)| j).collect(),
            None => vec![0],
        };
        let level: Vec<(usize, usize)> = region
            .positions()
            .filter_map(|j| {
                previous
                    .iter()
                    .find(|&&i| within(window, p, i + 1, j, thresholds[k]))
                    .map(|&i| (j, i))
            })
            .collect();
        if level.is_empty() {
            return Ok(None);
        }
        levels.push(level);
    }
    let last_eps = thresholds[thresholds.len() - 1];
    let tail = match levels.last() {
        None => within(window, p, 1, n, last_eps).then_some(0),
        Some(level) => level
            .iter()
            .map(|&(j, _)| j)
            .find(|&i| within(window, p, i + 1, n, last_eps)),
    };
    let Some(mut bp) = tail else {
        return Ok(None);
    };
    let mut breakpoints = vec![0; levels.len()];
    for (k, level) in levels.iter().enumerate().rev() {
        breakpoints[k] = bp;
        bp = level
            .iter()
            .find(|&&(j, _)| j == bp)
            .map(|&(_, pred)| pred)
            .expect("chain member recorded");
    }
    Ok(Some(Witness::from_breakpoints(
        pattern,
        window,
        breakpoints,
    )))
}
