// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::pattern::Violation;

pub type Result<T, E = FgmError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum FgmError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    Empty,

    #[error("invalid pattern: {}", join_violations(.0))]
    InvalidPattern(Vec<Violation>),

    #[error("invalid segmentation: {0}")]
    InvalidSegmentation(String),

    #[error("{what} {index} out of range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        index: usize,
        min: usize,
        max: usize,
    },

    #[error("invalid interval [{left}, {right}]")]
    InvalidInterval { left: usize, right: usize },

    #[error("timestamp gap: expected {expected}, got {got}")]
    TimestampGap { expected: u64, got: u64 },

    #[error("non-consecutive block: expected B_{expected}, got B_{got}")]
    NonConsecutiveBlock { expected: u64, got: u64 },

    #[error("potential set is empty")]
    EmptyPotentialSet,

    #[error("{count} segmentations exceed the enumeration guard of {limit}")]
    TooManySegmentations { count: u128, limit: u128 },

    #[error("data generation: {0}")]
    Generation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
