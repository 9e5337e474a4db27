// SPDX-License-Identifier: MIT OR Apache-2.0

//! Pattern and series files.
//!
//! A pattern is either one JSON document
//! `{"elements": [...], "regions": [[l, r], ...], "thresholds": [...]}` or a
//! CSV of elements plus a sidecar JSON holding `regions` and `thresholds`.
//! Series are CSV with the value in the last column; a non-numeric first
//! row is taken as a header.

use crate::error::{FgmError, Result};
use crate::pattern::{BreakRegion, Pattern};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

/// Regions and thresholds stored beside a CSV pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    #[serde(default)]
    pub regions: Vec<BreakRegion>,
    pub thresholds: Vec<f64>,
}

/// Default sidecar for `dir/name.csv`: `dir/name.meta.json`.
pub fn default_sidecar(pattern_csv: &Path) -> PathBuf {
    pattern_csv.with_extension("meta.json")
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Loads a pattern from JSON, or from CSV plus sidecar (explicit or the
/// default location).
pub fn read_pattern(path: &Path, sidecar: Option<&Path>) -> Result<Pattern> {
    if is_json(path) && sidecar.is_none() {
        return Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?);
    }
    let elements = read_series(File::open(path)?)?;
    let side_path = sidecar.map_or_else(|| default_sidecar(path), Path::to_path_buf);
    let side: Sidecar = serde_json::from_reader(BufReader::new(File::open(&side_path)?))?;
    Pattern::new(elements, side.regions, side.thresholds)
}

pub fn write_pattern(path: &Path, pattern: &Pattern) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, pattern)?;
    writeln!(out)?;
    Ok(())
}

/// Reads numeric values from the last column of CSV input.
pub fn read_series(reader: impl Read) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| FgmError::Parse(e.to_string()))?;
        let Some(field) = record.iter().next_back().filter(|f| !f.is_empty()) else {
            continue;
        };
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => {
                return Err(FgmError::Parse(format!(
                    "row {}: non-finite value {v}",
                    row + 1
                )))
            }
            Err(_) if row == 0 => continue,
            Err(_) => {
                return Err(FgmError::Parse(format!(
                    "row {}: '{field}' is not a number",
                    row + 1
                )))
            }
        }
    }
    Ok(values)
}

pub fn read_series_file(path: &Path) -> Result<Vec<f64>> {
    read_series(BufReader::new(File::open(path)?))
}

/// Writes one value per line under a `value` header.
pub fn write_series(writer: impl Write, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| FgmError::Parse(e.to_string());
    w.write_record(["value"]).map_err(io)?;
    for v in values {
        w.write_record([v.to_string()]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
