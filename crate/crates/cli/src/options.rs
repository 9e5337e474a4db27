// SPDX-License-Identifier: MIT OR Apache-2.0

use anyhow::{bail, Result};
use clap::ValueEnum;
use fgm_core::{ElbVariant, EngineConfig, VerifyMode};
use std::str::FromStr;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElbArg {
    Ele,
    Seq,
}

impl From<ElbArg> for ElbVariant {
    fn from(a: ElbArg) -> Self {
        match a {
            ElbArg::Ele => ElbVariant::Element,
            ElbArg::Seq => ElbVariant::Subsequence,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Toggle {
    On,
    Off,
}

impl From<Toggle> for bool {
    fn from(t: Toggle) -> Self {
        t == Toggle::On
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyArg {
    Adaptive,
    Baseline,
    Exhaustive,
}

impl From<VerifyArg> for VerifyMode {
    fn from(a: VerifyArg) -> Self {
        match a {
            VerifyArg::Adaptive => VerifyMode::Adaptive,
            VerifyArg::Baseline => VerifyMode::Baseline,
            VerifyArg::Exhaustive => VerifyMode::Exhaustive,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Jsonl,
    Csv,
}

/// Block width as an absolute count (`12`) or a share of the pattern
/// length (`5%`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BlockSpec {
    Count(usize),
    Percent(f64),
}

impl BlockSpec {
    pub fn resolve(self, pattern_len: usize) -> Result<usize> {
        let w = match self {
            Self::Count(w) => w,
            Self::Percent(p) => EngineConfig::width_for_ratio(pattern_len, p / 100.0),
        };
        if w == 0 || w > pattern_len {
            bail!("block width {w} outside [1, {pattern_len}]");
        }
        Ok(w)
    }
}

impl FromStr for BlockSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(p) = s.strip_suffix('%') {
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| format!("bad percentage '{s}'"))?;
            if !(p > 0.0 && p <= 100.0) {
                return Err(format!("percentage {p} outside (0, 100]"));
            }
            Ok(Self::Percent(p))
        } else {
            s.parse()
                .map(Self::Count)
                .map_err(|_| format!("'{s}' is neither a count nor a percentage"))
        }
    }
}
