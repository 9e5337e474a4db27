// SPDX-License-Identifier: MIT OR Apache-2.0

//! Block-skipping pruning.
//!
//! The sorted, deduplicated finite block bounds cut the real line into open
//! value regions. For each region the lookup table lists the pattern blocks
//! whose bounds it misses entirely, so one binary search tells which aligned
//! positions a stream block feature rules out. A block `m` mismatching
//! pattern block `j` (0-based) prunes queue `m - j`; those queue indices are
//! collected ahead of the processing cursor and skipped without any
//! comparison when their turn comes.

use crate::elb::{BlockFeature, ElbProfile};
use crate::error::{FgmError, Result};
use serde::{Deserialize, Serialize};

/// Position of a feature value relative to the region boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    /// Strictly inside open region `i` (0-based; region 0 is below the
    /// smallest boundary).
    Open(usize),
    /// Exactly on boundary `i`, between open regions `i` and `i + 1`.
    Boundary(usize),
    /// NaN: mismatches every block.
    Unordered,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LookupTable {
    boundaries: Vec<f64>,
    open: Vec<Vec<usize>>,
    on_boundary: Vec<Vec<usize>>,
    all_blocks: Vec<usize>,
}

impl LookupTable {
    pub fn build(profile: &ElbProfile) -> Self {
        Self::from_bounds(profile.block_lower(), profile.block_upper())
    }

    /// Builds the table from zero-based block bounds. Infinite bounds add
    /// no boundary.
    pub fn from_bounds(lower: &[f64], upper: &[f64]) -> Self {
        debug_assert_eq!(lower.len(), upper.len());
        let mut boundaries: Vec<f64> = lower
            .iter()
            .chain(upper)
            .copied()
            .filter(|v| v.is_finite())
            .collect();
        boundaries.sort_by(f64::total_cmp);
        boundaries.dedup();

        let blocks = 0..lower.len();
        // Open region i spans (b[i-1], b[i]) with sentinels at +-infinity.
        // Every bound is a boundary, so a block misses the region iff its
        // upper bound is at or below the region floor or its lower bound is
        // at or above the region ceiling.
        let open = (0..=boundaries.len())
            .map(|i| {
                let floor = if i == 0 {
                    f64::NEG_INFINITY
                } else {
                    boundaries[i - 1]
                };
                let ceiling = boundaries.get(i).copied().unwrap_or(f64::INFINITY);
                blocks
                    .clone()
                    .filter(|&j| upper[j] <= floor || lower[j] >= ceiling)
                    .collect()
            })
            .collect();
        // Exact boundary values: the intersection of both neighbours'
        // entries, which for a single point is plain bound violation.
        let on_boundary = boundaries
            .iter()
            .map(|&beta| {
                blocks
                    .clone()
                    .filter(|&j| beta < lower[j] || beta > upper[j])
                    .collect()
            })
            .collect();
        Self {
            boundaries,
            open,
            on_boundary,
            all_blocks: blocks.collect(),
        }
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Number of open regions, one more than the boundary count.
    pub fn region_count(&self) -> usize {
        self.open.len()
    }

    pub fn block_count(&self) -> usize {
        self.all_blocks.len()
    }

    #[inline]
    pub fn region_of(&self, value: f64) -> Region {
        if value.is_nan() {
            return Region::Unordered;
        }
        let i = self.boundaries.partition_point(|&b| b < value);
        if self.boundaries.get(i) == Some(&value) {
            Region::Boundary(i)
        } else {
            Region::Open(i)
        }
    }

    /// Zero-based pattern blocks that a feature in `region` cannot match.
    #[inline]
    pub fn entries(&self, region: Region) -> &[usize] {
        match region {
            Region::Open(i) => &self.open[i],
            Region::Boundary(i) => &self.on_boundary[i],
            Region::Unordered => &self.all_blocks,
        }
    }

    /// Entries of open region `i`.
    pub fn table(&self, region: usize) -> Result<&[usize]> {
        self.open
            .get(region)
            .map(Vec::as_slice)
            .ok_or(FgmError::OutOfRange {
                what: "value region",
                index: region,
                min: 0,
                max: self.open.len() - 1,
            })
    }

    /// 1-based queue indices that `feature` prunes, ascending.
    pub fn skip_set(&self, feature: &BlockFeature) -> Vec<u64> {
        let mut out: Vec<u64> = self
            .entries(self.region_of(feature.value))
            .iter()
            .filter_map(|&j| feature.block_index.checked_sub(j as u64))
            .filter(|&q| q >= 1)
            .collect();
        out.sort_unstable();
        out
    }

    pub fn dump(&self) -> LookupDump {
        let finite = |v: f64| v.is_finite().then_some(v);
        LookupDump {
            boundaries: self.boundaries.clone(),
            regions: (0..self.open.len())
                .map(|i| RegionEntry {
                    region: i + 1,
                    lower: i.checked_sub(1).and_then(|k| finite(self.boundaries[k])),
                    upper: self.boundaries.get(i).copied(),
                    mismatched_blocks: self.open[i].iter().map(|j| j + 1).collect(),
                })
                .collect(),
        }
    }
}

/// Serialisable view of a lookup table. Regions and blocks are 1-based;
/// `null` bounds stand for infinity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LookupDump {
    pub boundaries: Vec<f64>,
    pub regions: Vec<RegionEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionEntry {
    pub region: usize,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub mismatched_blocks: Vec<usize>,
}

/// Result of checking one queue with skipping enabled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkipDecision {
    /// Already known pruned; no comparison spent.
    Skipped,
    /// Pruned after `comparisons` probes.
    Pruned { comparisons: usize },
    /// Every block matched.
    Passed { comparisons: usize },
}

/// Per-stream skipping state: cached regions of the newest `N` blocks and
/// the set of queue indices already known to be pruned, as a ring bitmap
/// over `[cursor, cursor + N)`.
#[derive(Clone, Debug)]
pub struct SkipState {
    lookup: LookupTable,
    regions: Vec<Region>,
    skippable: Vec<bool>,
    cursor: u64,
}

impl SkipState {
    pub fn new(lookup: LookupTable) -> Self {
        let n = lookup.block_count();
        Self {
            lookup,
            regions: vec![Region::Unordered; n],
            skippable: vec![false; n],
            cursor: 1,
        }
    }

    pub fn lookup(&self) -> &LookupTable {
        &self.lookup
    }

    /// Next queue index to decide.
    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    fn slot(&self, index: u64) -> usize {
        (index % self.skippable.len() as u64) as usize
    }

    /// True if queue `index` is already known pruned.
    pub fn is_skippable(&self, index: u64) -> bool {
        index >= self.cursor
            && index < self.cursor + self.skippable.len() as u64
            && self.skippable[self.slot(index)]
    }

    /// Caches the value region of a newly arrived block.
    #[inline]
    pub fn observe(&mut self, feature: &BlockFeature) {
        let slot = self.slot(feature.block_index);
        self.regions[slot] = self.lookup.region_of(feature.value);
    }

    /// Decides queue `cursor`, whose blocks `cursor..cursor + N` must all
    /// have been observed, then advances the cursor.
    pub fn step(&mut self) -> SkipDecision {
        let queue = self.cursor;
        let n = self.skippable.len() as u64;
        let decision = if self.skippable[self.slot(queue)] {
            SkipDecision::Skipped
        } else {
            let mut comparisons = 0;
            let mut pruned = false;
            for offset in (0..n).rev() {
                comparisons += 1;
                let block = queue + offset;
                let region = self.regions[self.slot(block)];
                for &j in self.lookup.entries(region) {
                    // block >= queue >= 1 and j < N, so the index is
                    // within [block - N + 1, block]; keep what lies ahead.
                    if let Some(target) = block.checked_sub(j as u64) {
                        if target >= queue {
                            let slot = self.slot(target);
                            self.skippable[slot] = true;
                        }
                    }
                }
                if self.skippable[self.slot(queue)] {
                    pruned = true;
                    break;
                }
            }
            if pruned {
                SkipDecision::Pruned { comparisons }
            } else {
                SkipDecision::Passed { comparisons }
            }
        };
        let slot = self.slot(queue);
        self.skippable[slot] = false;
        self.cursor += 1;
        decision
    }
}
