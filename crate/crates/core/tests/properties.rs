// SPDX-License-Identifier: MIT OR Apache-2.0

use fgm_core::oracles::{exhaustive_verify, sequential_scan};
use fgm_core::postprocess::{verify_adaptive_counted, verify_baseline};
use fgm_core::{
    normalized_euclidean, BlockFeature, BreakRegion, ElbProfile, ElbVariant, Engine, EngineConfig,
    LookupTable, Pattern, Region, VerifyMode,
};
use proptest::prelude::*;

fn pattern_strategy() -> impl Strategy<Value = Pattern> {
    (8usize..40, 1usize..=4)
        .prop_flat_map(|(n, b)| {
            (
                prop::collection::vec(-2.0f64..2.0, n),
                prop::collection::vec((1usize..6, 0usize..5), b - 1),
                prop::collection::vec(0.1f64..1.5, b),
            )
        })
        .prop_filter_map("regions must fit", |(elements, gaps, thresholds)| {
            let n = elements.len();
            let mut regions = Vec::new();
            let mut next = 0;
            for (gap, width) in gaps {
                let left = next + gap;
                let right = left + width;
                if right >= n {
                    return None;
                }
                regions.push(BreakRegion::new(left, right));
                next = right;
            }
            let b = regions.len() + 1;
            Pattern::new(elements, regions, thresholds[..b].to_vec()).ok()
        })
}

fn instance() -> impl Strategy<Value = (Pattern, Vec<f64>)> {
    pattern_strategy().prop_flat_map(|p| {
        let n = p.len();
        (Just(p), prop::collection::vec(-1.0f64..1.0, n), 0.0f64..1.5).prop_map(
            |(p, noise, scale)| {
                let c = p
                    .elements()
                    .iter()
                    .zip(&noise)
                    .map(|(v, e)| v + scale * e)
                    .collect();
                (p, c)
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn distance_is_a_metric(
        x in prop::collection::vec(-5.0f64..5.0, 7),
        y in prop::collection::vec(-5.0f64..5.0, 7),
        z in prop::collection::vec(-5.0f64..5.0, 7),
    ) {
        let d = |a: &[f64], b: &[f64]| normalized_euclidean(a, b).unwrap();
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        let direct = (x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / 7.0).sqrt();
        prop_assert!((d(&x, &y) - direct).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn verifiers_agree((p, c) in instance()) {
        let oracle = exhaustive_verify(&c, &p).unwrap().is_match();
        let (adaptive, work) = verify_adaptive_counted(&c, &p).unwrap();
        prop_assert_eq!(adaptive.is_some(), oracle);
        prop_assert_eq!(verify_baseline(&c, &p).unwrap().is_some(), oracle);
        prop_assert!(work <= 2 * p.len());
        if let Some(w) = adaptive {
            prop_assert!(fgm_core::pattern::is_fine_grained_match(&p, &c, &w.segmentation()).unwrap());
        }
    }

    #[test]
    fn enlarging_thresholds_never_shrinks_envelopes(p in pattern_strategy(), grow in 1.0f64..3.0) {
        let wider = p.with_thresholds(p.thresholds().iter().map(|e| e * grow).collect()).unwrap();
        for variant in [ElbVariant::Element, ElbVariant::Subsequence] {
            let w = (p.len() / 4).max(1);
            let a = ElbProfile::build(&p, variant, w).unwrap();
            let b = ElbProfile::build(&wider, variant, w).unwrap();
            for pos in 1..=p.len() {
                if let (Some((la, ua)), Some((lb, ub))) = (a.envelope(pos), b.envelope(pos)) {
                    prop_assert!(lb <= la && ua <= ub);
                }
            }
        }
    }

    #[test]
    fn lookup_table_is_sound_and_complete(
        lower in prop::collection::vec(-10i32..10, 1..10),
        widths in prop::collection::vec(0i32..8, 10),
        value in -24i32..24,
    ) {
        let lower: Vec<f64> = lower.into_iter().map(f64::from).collect();
        let upper: Vec<f64> = lower.iter().zip(&widths).map(|(l, w)| l + f64::from(*w)).collect();
        let profile = ElbProfile::from_block_bounds(ElbVariant::Element, 1, lower, upper).unwrap();
        let table = LookupTable::build(&profile);
        // Half-integers sit strictly inside regions; integers may hit a boundary.
        for v in [f64::from(value), f64::from(value) + 0.5] {
            let region = table.region_of(v);
            let entries = table.entries(region);
            let feature = BlockFeature { block_index: 1, value: v };
            for j in 0..profile.block_count() {
                let matches = profile.block_matches(&feature, j).unwrap();
                prop_assert_eq!(entries.contains(&j), !matches, "value {} block {} region {:?}", v, j, region);
            }
            if let Region::Open(_) = region {
                prop_assert!(!table.boundaries().contains(&v));
            }
        }
    }

    #[test]
    fn engine_equals_sequential_scan(
        (p, _) in instance(),
        noise in prop::collection::vec(-1.0f64..1.0, 200),
        at in 0usize..150,
        w_frac in 0.05f64..0.5,
        seq in any::<bool>(),
        skipping in any::<bool>(),
    ) {
        let n = p.len();
        let mut stream: Vec<f64> = noise.iter().map(|v| 2.0 * v).collect();
        let at = at.min(stream.len() - n);
        for (s, v) in stream[at..at + n].iter_mut().zip(p.elements()) {
            *s = v + 0.1 * *s;
        }
        let expected: Vec<u64> = sequential_scan(&p, &stream).unwrap().iter().map(|r| r.window_start).collect();
        let config = EngineConfig {
            variant: if seq { ElbVariant::Subsequence } else { ElbVariant::Element },
            block_width: EngineConfig::width_for_ratio(n, w_frac),
            skipping,
            verify: VerifyMode::Adaptive,
        };
        let mut engine = Engine::new(p, config).unwrap();
        let got: Vec<u64> = engine.push_all(&stream).unwrap().iter().map(|r| r.window_start).collect();
        prop_assert_eq!(got, expected);
        prop_assert_eq!(engine.stats().features, (stream.len() / config.block_width) as u64);
    }
}
