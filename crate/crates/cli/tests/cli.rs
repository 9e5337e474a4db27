// SPDX-License-Identifier: MIT OR Apache-2.0

use fgm_core::elb::ProfileDump;
use fgm_core::{io, BlockFeature, ElbProfile, ElbVariant, MatchReport};
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn fgm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fgm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn generate(dir: &Path, len: usize) {
    let out = fgm(&[
        "gen",
        "--len",
        &len.to_string(),
        "--prob",
        "1e-3",
        "--seed",
        "5",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn reports(out: &Output) -> Vec<MatchReport> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn match_sets_agree_across_flags() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), 30_000);
    let pattern = dir.path().join("pattern.json");
    let stream = dir.path().join("stream.csv");
    let mut baseline: Option<Vec<u64>> = None;
    for (elb, bsp, verify, block) in [
        ("seq", "on", "adaptive", "5%"),
        ("ele", "off", "adaptive", "5%"),
        ("seq", "off", "baseline", "12"),
        ("ele", "on", "exhaustive", "20%"),
    ] {
        let out = fgm(&[
            "match",
            "--pattern",
            pattern.to_str().unwrap(),
            "--stream",
            stream.to_str().unwrap(),
            "--elb",
            elb,
            "--bsp",
            bsp,
            "--verify",
            verify,
            "--block",
            block,
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let stats: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        let starts: Vec<u64> = reports(&out).iter().map(|r| r.window_start).collect();
        assert_eq!(stats["matches"].as_u64().unwrap(), starts.len() as u64);
        assert!(stats["mean_window_ns"].as_f64().unwrap() > 0.0);
        match &baseline {
            None => {
                assert!(!starts.is_empty());
                baseline = Some(starts);
            }
            Some(b) => assert_eq!(&starts, b, "elb {elb} bsp {bsp} verify {verify}"),
        }
    }
}

#[test]
fn reads_stream_from_stdin_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let pattern = dir.path().join("p.csv");
    std::fs::write(&pattern, "0\n1\n2\n3\n2\n1\n").unwrap();
    std::fs::write(
        dir.path().join("p.meta.json"),
        r#"{"regions": [[2, 3]], "thresholds": [0.5, 0.5]}"#,
    )
    .unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_fgm"))
        .args([
            "match",
            "--pattern",
            pattern.to_str().unwrap(),
            "--stream",
            "-",
            "--report",
            "csv",
            "--block",
            "2",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"value\n9\n9\n0\n1\n2\n3\n2\n1\n9\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "window_start,breakpoints,segment_distances");
    assert_eq!(lines.len(), 2);
    // An exact match leaves the most slack for the next segment at bp 2.
    assert!(lines[1].starts_with("3,2,0;0"), "{}", lines[1]);
}

#[test]
fn malformed_input_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let pattern = dir.path().join("bad.json");
    std::fs::write(
        &pattern,
        r#"{"elements": [1, 2, 3], "regions": [[1, 2]], "thresholds": [0, 1]}"#,
    )
    .unwrap();
    let out = fgm(&[
        "match",
        "--pattern",
        pattern.to_str().unwrap(),
        "--stream",
        "-",
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("non-positive threshold"), "{err}");

    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"{"elements": [1, 2, 3], "thresholds": [1]}"#).unwrap();
    let stream = dir.path().join("s.csv");
    std::fs::write(&stream, "1\n2\nabc\n").unwrap();
    let out = fgm(&[
        "match",
        "--pattern",
        good.to_str().unwrap(),
        "--stream",
        stream.to_str().unwrap(),
        "--block",
        "1",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a number"));
}

#[test]
fn inspect_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), 2_000);
    let pattern_path = dir.path().join("pattern.json");
    let out = fgm(&[
        "inspect",
        "--pattern",
        pattern_path.to_str().unwrap(),
        "--elb",
        "seq",
        "--block",
        "5%",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let dump: ProfileDump = serde_json::from_value(v["profile"].clone()).unwrap();
    assert!(dump.blocks[0].lower.is_none() && dump.blocks[0].upper.is_none());
    assert!(!v["lookup"]["regions"].as_array().unwrap().is_empty());

    let reloaded = ElbProfile::from_dump(&dump).unwrap();
    let pattern = io::read_pattern(&pattern_path, None).unwrap();
    let original = ElbProfile::build(&pattern, ElbVariant::Subsequence, dump.width).unwrap();
    let stream = io::read_series_file(&dir.path().join("stream.csv")).unwrap();
    for (i, block) in stream.chunks_exact(dump.width).enumerate() {
        let f = BlockFeature {
            block_index: i as u64 + 1,
            value: original.feature_value(block),
        };
        for j in 0..dump.block_count {
            assert_eq!(
                reloaded.block_matches(&f, j).unwrap(),
                original.block_matches(&f, j).unwrap()
            );
        }
    }
}

#[test]
fn bench_cross_checks_and_requires_truth() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), 20_000);
    let csv = dir.path().join("bench.csv");
    let out = fgm(&[
        "bench",
        "--data",
        dir.path().to_str().unwrap(),
        "--axis",
        "block-ratio",
        "--values",
        "0.01,0.4",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    // Header plus six methods for each of two values.
    assert_eq!(text.lines().count(), 1 + 2 * 6);
    assert!(text.contains("elb-seq,on"));

    let out = fgm(&[
        "bench",
        "--data",
        dir.path().to_str().unwrap(),
        "--axis",
        "region-ratio",
        "--values",
        "0.7",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    std::fs::remove_file(dir.path().join("truth.json")).unwrap();
    let out = fgm(&["bench", "--data", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ground truth"));
}
