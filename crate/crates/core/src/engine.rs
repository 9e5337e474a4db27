// SPDX-License-Identifier: MIT OR Apache-2.0

//! Streaming block-based matcher.
//!
//! The stream is cut into disjoint global blocks `B_1, B_2, ...` of width
//! `w`. Queue `Q_i` holds the features of `B_i..B_{i+N-1}` and covers the
//! `w` windows starting at `(i-1)w + 1`. A queue whose `j`-th feature lies
//! outside pattern block `j`'s bounds prunes all of those windows at once;
//! otherwise each of them is verified exactly once its last value arrives.

use crate::bsp::{LookupTable, SkipDecision, SkipState};
use crate::elb::{BlockFeature, ElbProfile, ElbVariant};
use crate::error::{FgmError, Result};
use crate::pattern::{MatchReport, Pattern};
use crate::postprocess::{self, VerifyMode};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// FIFO of the newest `N` block features.
#[derive(Clone, Debug)]
pub struct FeatureQueue {
    features: VecDeque<BlockFeature>,
    capacity: usize,
    next_index: u64,
}

impl FeatureQueue {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "queue capacity must be positive");
        Self {
            features: VecDeque::with_capacity(capacity),
            capacity,
            next_index: 1,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.features.len() == self.capacity
    }

    /// Block index `i` of the oldest feature, i.e. this is `Q_i`.
    pub fn oldest_block_index(&self) -> Option<u64> {
        self.features.front().map(|f| f.block_index)
    }

    /// Zero-based position `j` from the oldest feature.
    pub fn get(&self, j: usize) -> Option<&BlockFeature> {
        self.features.get(j)
    }

    pub fn iter(&self) -> impl Iterator<Item = &BlockFeature> {
        self.features.iter()
    }

    /// Appends the next block, evicting the oldest when full.
    pub fn push(&mut self, feature: BlockFeature) -> Result<Option<BlockFeature>> {
        if feature.block_index != self.next_index {
            return Err(FgmError::NonConsecutiveBlock {
                expected: self.next_index,
                got: feature.block_index,
            });
        }
        self.next_index += 1;
        let evicted = if self.is_full() {
            self.features.pop_front()
        } else {
            None
        };
        self.features.push_back(feature);
        Ok(evicted)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueueDecision {
    /// A comparison found a mismatch.
    Pruned,
    /// Known pruned from earlier skip sets; nothing compared.
    Skipped,
    /// All `N` blocks matched; the covered windows need verification.
    Candidates,
}

impl QueueDecision {
    pub fn is_pruned(self) -> bool {
        !matches!(self, Self::Candidates)
    }
}

/// Decision for queue `Q_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueueOutcome {
    pub queue_index: u64,
    pub decision: QueueDecision,
    /// First covered window start, `(i-1)w + 1`.
    pub first_window: u64,
    /// Number of covered windows, `w`.
    pub window_count: u64,
}

impl QueueOutcome {
    pub fn windows(&self) -> std::ops::Range<u64> {
        self.first_window..self.first_window + self.window_count
    }
}

/// What happened when one block arrived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockOutcome {
    pub feature: BlockFeature,
    /// `None` until the queue first fills.
    pub queue: Option<QueueOutcome>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrunerStats {
    pub blocks: u64,
    pub queues: u64,
    pub pruned: u64,
    pub skipped: u64,
    pub candidates: u64,
    pub block_comparisons: u64,
    pub table_lookups: u64,
}

/// Feature-level pruning: sequential checks, or newest-first probing with
/// block skipping.
#[derive(Clone, Debug)]
pub struct BlockPruner {
    profile: ElbProfile,
    queue: FeatureQueue,
    skip: Option<SkipState>,
    stats: PrunerStats,
}

impl BlockPruner {
    pub fn new(profile: ElbProfile, skipping: bool) -> Self {
        let n = profile.block_count();
        let skip = skipping.then(|| SkipState::new(LookupTable::build(&profile)));
        Self {
            profile,
            queue: FeatureQueue::new(n),
            skip,
            stats: PrunerStats::default(),
        }
    }

    pub fn profile(&self) -> &ElbProfile {
        &self.profile
    }

    pub fn queue(&self) -> &FeatureQueue {
        &self.queue
    }

    pub fn stats(&self) -> &PrunerStats {
        &self.stats
    }

    pub fn skipping(&self) -> bool {
        self.skip.is_some()
    }

    /// Feeds the next block feature and decides the queue it completes.
    pub fn push(&mut self, feature: BlockFeature) -> Result<BlockOutcome> {
        self.queue.push(feature)?;
        self.stats.blocks += 1;
        if let Some(skip) = self.skip.as_mut() {
            skip.observe(&feature);
            self.stats.table_lookups += 1;
        }
        if !self.queue.is_full() {
            return Ok(BlockOutcome {
                feature,
                queue: None,
            });
        }
        let queue_index = self
            .queue
            .oldest_block_index()
            .expect("full queue has an oldest block");
        let decision = match self.skip.as_mut() {
            Some(skip) => {
                debug_assert_eq!(skip.cursor(), queue_index);
                match skip.step() {
                    SkipDecision::Skipped => QueueDecision::Skipped,
                    SkipDecision::Pruned { comparisons } => {
                        self.stats.block_comparisons += comparisons as u64;
                        QueueDecision::Pruned
                    }
                    SkipDecision::Passed { comparisons } => {
                        self.stats.block_comparisons += comparisons as u64;
                        QueueDecision::Candidates
                    }
                }
            }
            None => {
                let mut decision = QueueDecision::Candidates;
                for (j, f) in self.queue.iter().enumerate() {
                    self.stats.block_comparisons += 1;
                    if !self.profile.matches(f.value, j) {
                        decision = QueueDecision::Pruned;
                        break;
                    }
                }
                decision
            }
        };
        self.stats.queues += 1;
        match decision {
            QueueDecision::Pruned => self.stats.pruned += 1,
            QueueDecision::Skipped => self.stats.skipped += 1,
            QueueDecision::Candidates => self.stats.candidates += 1,
        }
        let w = self.profile.width() as u64;
        Ok(BlockOutcome {
            feature,
            queue: Some(QueueOutcome {
                queue_index,
                decision,
                first_window: (queue_index - 1) * w + 1,
                window_count: w,
            }),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub variant: ElbVariant,
    pub block_width: usize,
    pub skipping: bool,
    pub verify: VerifyMode,
}

impl EngineConfig {
    /// Block width as a fraction of the pattern length, at least 1.
    pub fn width_for_ratio(pattern_len: usize, ratio: f64) -> usize {
        ((pattern_len as f64 * ratio).round() as usize).clamp(1, pattern_len.max(1))
    }

    /// ELB-SEQ, block width 5% of the pattern, skipping on, adaptive
    /// verification.
    pub fn defaults_for(pattern: &Pattern) -> Self {
        Self {
            variant: ElbVariant::Subsequence,
            block_width: Self::width_for_ratio(pattern.len(), 0.05),
            skipping: true,
            verify: VerifyMode::Adaptive,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineStats {
    pub values: u64,
    /// Feature computations, one per complete block.
    pub features: u64,
    pub queues: u64,
    pub queues_pruned: u64,
    pub queues_skipped: u64,
    pub queues_candidate: u64,
    pub windows_pruned: u64,
    pub windows_verified: u64,
    pub matches: u64,
    pub block_comparisons: u64,
    pub table_lookups: u64,
    /// Element-pair evaluations in adaptive verification.
    pub delta_evaluations: u64,
}

/// Single-stream matcher.
#[derive(Clone, Debug)]
pub struct Engine {
    pattern: Pattern,
    config: EngineConfig,
    pruner: BlockPruner,
    block: Vec<f64>,
    history: VecDeque<f64>,
    history_capacity: usize,
    window: Vec<f64>,
    pending: VecDeque<u64>,
    early_pruned: VecDeque<std::ops::Range<u64>>,
    ts: u64,
    stats: EngineStats,
}

impl Engine {
    pub fn new(pattern: Pattern, config: EngineConfig) -> Result<Self> {
        let profile = ElbProfile::build(&pattern, config.variant, config.block_width)?;
        Ok(Self::with_profile(pattern, profile, config))
    }

    /// Uses a prebuilt profile; its variant and width override `config`.
    pub fn with_profile(pattern: Pattern, profile: ElbProfile, mut config: EngineConfig) -> Self {
        config.variant = profile.variant();
        config.block_width = profile.width();
        let n = pattern.len();
        let w = profile.width();
        Self {
            pruner: BlockPruner::new(profile, config.skipping),
            block: Vec::with_capacity(w),
            history: VecDeque::with_capacity(n + w),
            history_capacity: n + w,
            window: vec![0.0; n],
            pending: VecDeque::new(),
            early_pruned: VecDeque::new(),
            ts: 0,
            stats: EngineStats::default(),
            pattern,
            config,
        }
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn profile(&self) -> &ElbProfile {
        self.pruner.profile()
    }

    pub fn stats(&self) -> EngineStats {
        let p = self.pruner.stats();
        EngineStats {
            block_comparisons: p.block_comparisons,
            table_lookups: p.table_lookups,
            ..self.stats
        }
    }

    /// Timestamp of the last value ingested.
    pub fn timestamp(&self) -> u64 {
        self.ts
    }

    /// Ingests the value at timestamp `ts` (1-based, consecutive) and returns
    /// the windows confirmed as matches by this arrival.
    pub fn push_value(&mut self, ts: u64, value: f64) -> Result<Vec<MatchReport>> {
        if ts != self.ts + 1 {
            return Err(FgmError::TimestampGap {
                expected: self.ts + 1,
                got: ts,
            });
        }
        if !value.is_finite() {
            return Err(FgmError::Parse(format!(
                "non-finite value at timestamp {ts}"
            )));
        }
        self.ts = ts;
        self.stats.values += 1;
        if self.history.len() == self.history_capacity {
            self.history.pop_front();
        }
        self.history.push_back(value);
        self.block.push(value);

        if self.block.len() == self.config.block_width {
            let index = ts / self.config.block_width as u64;
            let feature = BlockFeature {
                block_index: index,
                value: self.pruner.profile().feature_value(&self.block),
            };
            self.block.clear();
            self.stats.features += 1;
            self.push_block(feature)?;
        }
        self.verify_due()
    }

    /// Convenience loop over a whole series starting at the next timestamp.
    pub fn push_all(&mut self, values: &[f64]) -> Result<Vec<MatchReport>> {
        let mut out = Vec::new();
        for &v in values {
            out.extend(self.push_value(self.ts + 1, v)?);
        }
        Ok(out)
    }

    fn push_block(&mut self, feature: BlockFeature) -> Result<()> {
        let outcome = self.pruner.push(feature)?;
        let Some(queue) = outcome.queue else {
            return Ok(());
        };
        self.stats.queues += 1;
        match queue.decision {
            QueueDecision::Pruned => self.stats.queues_pruned += 1,
            QueueDecision::Skipped => self.stats.queues_skipped += 1,
            QueueDecision::Candidates => self.stats.queues_candidate += 1,
        }
        if queue.decision.is_pruned() {
            self.stats.windows_pruned += queue.window_count;
            self.early_pruned.push_back(queue.windows());
        } else {
            self.pending.extend(queue.windows());
        }
        Ok(())
    }

    fn verify_due(&mut self) -> Result<Vec<MatchReport>> {
        let n = self.pattern.len() as u64;
        while self
            .early_pruned
            .front()
            .is_some_and(|r| r.end - 1 + n - 1 <= self.ts)
        {
            self.early_pruned.pop_front();
        }
        let mut out = Vec::new();
        while let Some(&start) = self.pending.front() {
            if start + n - 1 > self.ts {
                break;
            }
            self.pending.pop_front();
            let offset = self.history.len() - (self.ts - start + 1) as usize;
            for (dst, src) in self.window.iter_mut().zip(self.history.range(offset..)) {
                *dst = *src;
            }
            self.stats.windows_verified += 1;
            let witness = match self.config.verify {
                VerifyMode::Adaptive => {
                    let (w, evaluations) =
                        postprocess::verify_adaptive_counted(&self.window, &self.pattern)?;
                    self.stats.delta_evaluations += evaluations as u64;
                    w
                }
                mode => postprocess::verify(mode, &self.window, &self.pattern)?,
            };
            if let Some(witness) = witness {
                self.stats.matches += 1;
                out.push(MatchReport::new(start, witness));
            }
        }
        Ok(out)
    }

    /// Window starts already pruned whose last value has not arrived yet.
    pub fn early_window_decision(&self) -> Vec<u64> {
        let n = self.pattern.len() as u64;
        self.early_pruned
            .iter()
            .flat_map(|r| r.clone())
            .filter(|&t| t + n - 1 > self.ts)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::BreakRegion;
    use rand::{RngExt, SeedableRng};

    fn config(variant: ElbVariant, w: usize, skipping: bool) -> EngineConfig {
        EngineConfig {
            variant,
            block_width: w,
            skipping,
            verify: VerifyMode::Adaptive,
        }
    }

    #[test]
    fn queue_rejects_gaps_and_evicts_oldest() {
        let mut q = FeatureQueue::new(2);
        let f = |i| BlockFeature {
            block_index: i,
            value: i as f64,
        };
        assert!(q.push(f(2)).is_err());
        assert_eq!(q.push(f(1)).unwrap(), None);
        assert_eq!(q.push(f(2)).unwrap(), None);
        assert_eq!(q.push(f(3)).unwrap(), Some(f(1)));
        assert_eq!(q.oldest_block_index(), Some(2));
        assert!(matches!(
            q.push(f(5)),
            Err(FgmError::NonConsecutiveBlock {
                expected: 4,
                got: 5
            })
        ));
    }

    #[test]
    fn pruner_emits_candidates_when_all_blocks_match() {
        let profile =
            ElbProfile::from_block_bounds(ElbVariant::Element, 3, vec![0.0; 3], vec![1.0; 3])
                .unwrap();
        let mut pruner = BlockPruner::new(profile, false);
        for i in 1..=2 {
            let out = pruner
                .push(BlockFeature {
                    block_index: i,
                    value: 0.5,
                })
                .unwrap();
            assert!(out.queue.is_none());
        }
        let out = pruner
            .push(BlockFeature {
                block_index: 3,
                value: 1.0,
            })
            .unwrap()
            .queue
            .unwrap();
        assert_eq!(out.decision, QueueDecision::Candidates);
        assert_eq!(out.windows(), 1..4);
        let out = pruner
            .push(BlockFeature {
                block_index: 4,
                value: 2.0,
            })
            .unwrap()
            .queue
            .unwrap();
        assert_eq!(out.decision, QueueDecision::Pruned);
        assert_eq!(out.windows(), 4..7);
        assert_eq!(pruner.stats().block_comparisons, 3 + 3);
    }

    #[test]
    fn early_pruning_of_pending_windows() {
        // n = 9, w = 3, N = 3; the first block already misses.
        let p = Pattern::single_segment(vec![0.0; 9], 0.1).unwrap();
        let mut engine = Engine::new(p, config(ElbVariant::Element, 3, false)).unwrap();
        for ts in 1..=8 {
            engine.push_value(ts, 5.0).unwrap();
            assert!(engine.early_window_decision().is_empty());
        }
        engine.push_value(9, 5.0).unwrap();
        assert_eq!(engine.stats().queues_pruned, 1);
        assert_eq!(engine.early_window_decision(), vec![2, 3]);
        engine.push_value(10, 5.0).unwrap();
        assert_eq!(engine.early_window_decision(), vec![3]);
    }

    #[test]
    fn nothing_before_first_complete_window() {
        let p = Pattern::single_segment(vec![1.0; 6], 100.0).unwrap();
        let mut engine = Engine::new(p, config(ElbVariant::Subsequence, 2, true)).unwrap();
        for ts in 1..6 {
            assert!(engine.push_value(ts, 1.0).unwrap().is_empty());
        }
        assert_eq!(engine.push_value(6, 1.0).unwrap().len(), 1);
    }

    #[test]
    fn repeated_pattern_with_loose_threshold_matches_everywhere() {
        let elements: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).sin()).collect();
        let p = Pattern::single_segment(elements.clone(), 10.0).unwrap();
        let stream: Vec<f64> = elements.iter().cycle().take(40).copied().collect();
        for skipping in [false, true] {
            let mut engine =
                Engine::new(p.clone(), config(ElbVariant::Element, 2, skipping)).unwrap();
            let reports = engine.push_all(&stream).unwrap();
            let starts: Vec<u64> = reports.iter().map(|r| r.window_start).collect();
            assert_eq!(starts, (1..=33).collect::<Vec<_>>());
        }
    }

    #[test]
    fn timestamp_gap_and_non_finite_are_errors() {
        let p = Pattern::single_segment(vec![0.0; 4], 1.0).unwrap();
        let mut engine = Engine::new(p, config(ElbVariant::Element, 2, false)).unwrap();
        engine.push_value(1, 0.0).unwrap();
        assert!(matches!(
            engine.push_value(3, 0.0),
            Err(FgmError::TimestampGap {
                expected: 2,
                got: 3
            })
        ));
        assert!(engine.push_value(2, f64::NAN).is_err());
    }

    #[test]
    fn every_window_decided_once_and_matches_brute_force() {
        let mut rng = rand_pcg::Pcg32::seed_from_u64(17);
        for _ in 0..40 {
            let n = rng.random_range(8..30);
            let elements: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = Pattern::new(
                elements.clone(),
                vec![BreakRegion::new(n / 3, n / 3 + 2)],
                vec![0.6, 0.8],
            )
            .unwrap();
            let mut stream: Vec<f64> = (0..300).map(|_| rng.random_range(-1.5..1.5)).collect();
            let at = rng.random_range(0..250);
            stream[at..at + n].copy_from_slice(&elements);
            let w = rng.random_range(1..=n / 2);
            let variant = if rng.random_bool(0.5) {
                ElbVariant::Element
            } else {
                ElbVariant::Subsequence
            };
            let expected: Vec<u64> = (0..=stream.len() - n)
                .filter(|&s| {
                    crate::postprocess::verify_baseline(&stream[s..s + n], &p)
                        .unwrap()
                        .is_some()
                })
                .map(|s| s as u64 + 1)
                .collect();
            assert!(expected.contains(&(at as u64 + 1)));
            let mut runs = Vec::new();
            for skipping in [false, true] {
                let mut engine = Engine::new(p.clone(), config(variant, w, skipping)).unwrap();
                let got: Vec<u64> = engine
                    .push_all(&stream)
                    .unwrap()
                    .iter()
                    .map(|r| r.window_start)
                    .collect();
                assert_eq!(got, expected);
                let s = engine.stats();
                let decided_windows = s.queues * w as u64;
                assert_eq!(
                    s.windows_pruned + s.queues_candidate * w as u64,
                    decided_windows
                );
                assert_eq!(s.features, stream.len() as u64 / w as u64);
                runs.push(s);
            }
            assert!(runs[1].block_comparisons <= runs[0].block_comparisons);
            assert_eq!(runs[0].queues_candidate, runs[1].queues_candidate);
        }
    }
}
