// SPDX-License-Identifier: MIT OR Apache-2.0

#![forbid(unsafe_code)]

//! Fine-grained pattern matching over streaming time series.
//!
//! A [`Pattern`] is split into segments, each with its own normalized
//! Euclidean threshold. Consecutive segments are separated by break regions
//! whose exact breakpoint is chosen per candidate window at match time.
//!
//! The streaming [`Engine`] processes `w` consecutive sliding windows at a
//! time: pattern blocks carry `[lower, upper]` bounds ([`ElbProfile`]), each
//! `w`-length block of the stream carries one scalar feature, and a window
//! group is pruned as soon as one feature falls outside its aligned bounds.
//! Surviving windows are verified exactly by a linear-time breakpoint search
//! ([`postprocess::verify_adaptive`]).

pub mod bsp;
pub mod datagen;
pub mod elb;
pub mod engine;
mod error;
pub mod io;
pub mod oracles;
pub mod pattern;
pub mod postprocess;

pub use crate::bsp::{LookupTable, Region, SkipState};
pub use crate::elb::{BlockFeature, ElbProfile, ElbVariant};
pub use crate::engine::{
    BlockOutcome, BlockPruner, Engine, EngineConfig, EngineStats, FeatureQueue, QueueDecision,
    QueueOutcome,
};
pub use crate::error::{FgmError, Result};
pub use crate::pattern::{
    normalized_euclidean, BreakRegion, MatchReport, Pattern, Segmentation, Violation, Witness,
};
pub use crate::postprocess::VerifyMode;
