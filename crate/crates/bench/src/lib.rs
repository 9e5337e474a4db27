// SPDX-License-Identifier: MIT OR Apache-2.0

#![forbid(unsafe_code)]

//! Shared fixtures for the benchmarks.

use fgm_core::datagen::{Dataset, Scenario};

/// Demo-shape dataset at default ratios with `len` stream values.
pub fn dataset(len: usize, seed: u64) -> Dataset {
    Scenario {
        stream_len: len,
        probability: 1e-3,
        seed,
        ..Scenario::default()
    }
    .generate()
    .expect("default scenario is valid")
}

/// Windows of `data` that the pattern matches, for verification benches.
pub fn matching_windows(data: &Dataset) -> Vec<&[f64]> {
    let n = data.pattern.len();
    data.truth
        .embeddings
        .iter()
        .map(|e| &data.stream[e.start as usize - 1..e.start as usize - 1 + n])
        .collect()
}
