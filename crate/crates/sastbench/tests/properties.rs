//! Property tests for the normalization, sampling and metrics invariants.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::{b_recall_oracle, finding, micro_benchmark};
use sastbench::bench::{self, Benchmark, GroundTruthInstance, Variant};
use sastbench::metrics;
use sastbench::normalizer::{dedupe, DedupGranularity, NormalizedFinding, TypeLabel};

fn arb_label() -> impl Strategy<Value = TypeLabel> {
    prop_oneof![
        (0..5u32).prop_map(|i| TypeLabel::Unified(format!("CAT.T{i}"))),
        Just(TypeLabel::OutOfScope),
        Just(TypeLabel::Unmapped),
    ]
}

fn arb_finding() -> impl Strategy<Value = NormalizedFinding> {
    (
        0..3u32,
        0..4u32,
        arb_label(),
        prop::option::of(0..3u32),
        prop::option::of(1..50u32),
    )
        .prop_map(|(tool, apk, label, file, line)| NormalizedFinding {
            tool: format!("tool{tool}"),
            apk: format!("app{apk}"),
            unified_type: label,
            raw: "raw".into(),
            file: file.map(|f| format!("src/F{f}.java")),
            line,
            message: String::new(),
        })
}

proptest! {
    #[test]
    fn dedupe_is_idempotent_and_a_subset(findings in prop::collection::vec(arb_finding(), 0..60)) {
        for granularity in [DedupGranularity::PerType, DedupGranularity::PerLocation] {
            let once = dedupe(&findings, granularity);
            let twice = dedupe(&once, granularity);
            prop_assert_eq!(&once, &twice);
            prop_assert!(once.len() <= findings.len());
            for f in &once {
                prop_assert!(findings.contains(f));
            }
        }
    }

    #[test]
    fn per_type_dedupe_keys_hold(findings in prop::collection::vec(arb_finding(), 0..60)) {
        let deduped = dedupe(&findings, DedupGranularity::PerType);
        let keys: BTreeSet<_> = deduped
            .iter()
            .map(|f| (f.tool.clone(), f.apk.clone(), f.unified_type.clone()))
            .collect();
        prop_assert_eq!(keys.len(), deduped.len());
    }

    #[test]
    fn b_recall_matches_the_oracle(seed in 0..2000u64) {
        let (truth, findings) = micro_benchmark(seed);
        let got = metrics::b_recall(&findings, &truth).unwrap();
        let want = b_recall_oracle(&findings, &truth).unwrap();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn adding_a_finding_never_decreases_b_recall(seed in 0..500u64, apk in 0..10u32, ty in 0..8u32) {
        let (truth, mut findings) = micro_benchmark(seed);
        let before = metrics::b_recall(&findings, &truth).unwrap();
        findings.push(finding("tool", &format!("app{apk}"), TypeLabel::Unified(format!("CAT.TYPE_{ty}"))));
        let after = metrics::b_recall(&findings, &truth).unwrap();
        prop_assert!(after >= before);
    }

    #[test]
    fn removing_a_finding_never_increases_b_recall(seed in 0..500u64) {
        let (truth, findings) = micro_benchmark(seed);
        if findings.is_empty() {
            return Ok(());
        }
        let full = metrics::b_recall(&findings, &truth).unwrap();
        let reduced = metrics::b_recall(&findings[..findings.len() - 1], &truth).unwrap();
        prop_assert!(reduced <= full);
    }

    #[test]
    fn unsupported_findings_never_move_confusion_counts(seed in 0..300u64, extra in 1..20usize) {
        let (truth, findings) = micro_benchmark(seed);
        let supported: BTreeSet<String> = (0..4u32).map(|i| format!("CAT.TYPE_{i}")).collect();
        let base = metrics::confusion("tool", &findings, &truth, &supported);
        let mut noisy = findings.clone();
        for i in 0..extra {
            noisy.push(finding("tool", &format!("app{}", i % 10), TypeLabel::Unified(format!("CAT.UNSUPPORTED_{i}"))));
            noisy.push(finding("tool", &format!("app{}", i % 10), TypeLabel::OutOfScope));
            noisy.push(finding("tool", &format!("app{}", i % 10), TypeLabel::Unmapped));
        }
        let with_noise = metrics::confusion("tool", &noisy, &truth, &supported);
        prop_assert_eq!(base, with_noise);
    }

    #[test]
    fn ratios_stay_in_unit_range(tp in 0..200u64, fp in 0..200u64, fn_ in 0..200u64, tn in prop::option::of(0..200u64)) {
        let counts = metrics::ConfusionCounts {
            tool: "t".into(),
            benchmark: "b".into(),
            type_filter: None,
            tp, fp, fn_, tn,
        };
        let row = metrics::effectiveness(&counts);
        for x in [row.precision, row.recall, row.fpr, row.f1].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&x), "{x}");
        }
    }

    #[test]
    fn sampling_is_a_capped_deterministic_subset(
        seed in 0..500u64,
        cap in 1..6usize,
        counts in prop::collection::vec(1..20usize, 1..6),
    ) {
        let mut instances = Vec::new();
        for (t, n) in counts.iter().enumerate() {
            for i in 0..*n {
                instances.push(GroundTruthInstance {
                    apk: format!("t{t}-app{i}"),
                    unified_type: format!("CAT.T{t}"),
                    variant: Variant::Vulnerable,
                    source_ref: None,
                });
            }
        }
        let b = Benchmark::new("P", instances).unwrap();
        let one = bench::undersample(&b, cap, seed);
        let two = bench::undersample(&b, cap, seed);
        prop_assert_eq!(&one, &two);
        for i in &one.instances {
            prop_assert!(b.instances.contains(i));
        }
        for (t, n) in counts.iter().enumerate() {
            let ty = format!("CAT.T{t}");
            let kept = one.instances.iter().filter(|i| i.unified_type == ty).count();
            prop_assert_eq!(kept, cap.min(*n));
        }
    }
}

#[test]
fn f1_identity_on_a_rational_grid() {
    for p_num in 0..=20u32 {
        for r_num in 0..=20u32 {
            let p = f64::from(p_num) / 20.0;
            let r = f64::from(r_num) / 20.0;
            match metrics::f1_from_pr(p, r) {
                Some(f1) => assert!((f1 - 2.0 * p * r / (p + r)).abs() < 1e-12),
                None => assert_eq!(p + r, 0.0),
            }
        }
    }
}
