//! Effectiveness metrics against ground truth.
//!
//! Matching granularity is (apk, unified type): ground truth is labeled at
//! that level and duplicate alerts are collapsed before counting. Ratios with
//! a zero denominator are undefined — surfaced as `None`, never silently 0 —
//! because a tool with no supported types in a benchmark has no meaningful
//! precision.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::bench::{Benchmark, Variant};
use crate::normalizer::{NormalizedFinding, TypeLabel};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("benchmark {0} has no vulnerable instances")]
    EmptyBenchmark(String),
}

/// Confusion counts for one (tool, benchmark) cell.
///
/// `tn` is populated only when the benchmark provides secure variants:
/// without safe labels there is no universe of negatives to count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tool: String,
    pub benchmark: String,
    pub type_filter: Option<String>,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: Option<u64>,
}

/// Derived ratios; every field is in [0, 1] when defined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectivenessRow {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub fpr: Option<f64>,
    pub f1: Option<f64>,
    pub b_recall: Option<f64>,
    pub support: ConfusionCounts,
}

/// The (apk, type) pairs a findings set asserts, restricted to unified types.
fn asserted_pairs<'a>(
    findings: &'a [NormalizedFinding],
    supported: Option<&BTreeSet<String>>,
) -> HashSet<(&'a str, &'a str)> {
    findings
        .iter()
        .filter_map(|f| match &f.unified_type {
            TypeLabel::Unified(t) => {
                let in_scope = supported.is_none_or(|s| s.contains(t));
                in_scope.then_some((f.apk.as_str(), t.as_str()))
            }
            // out-of-scope and unmapped findings never count toward metrics
            TypeLabel::OutOfScope | TypeLabel::Unmapped => None,
        })
        .collect()
}

/// Confusion counts over the evaluation universe of (apk, type) pairs whose
/// type the tool supports. Vulnerable pairs become TP/FN; secure-variant
/// pairs become FP/TN. Findings for unsupported, out-of-scope or unmapped
/// types change no count.
pub fn confusion(
    tool: &str,
    findings: &[NormalizedFinding],
    truth: &Benchmark,
    supported: &BTreeSet<String>,
) -> ConfusionCounts {
    let asserted = asserted_pairs(findings, Some(supported));
    let mut c = ConfusionCounts {
        tool: tool.to_string(),
        benchmark: truth.benchmark_id.clone(),
        type_filter: None,
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: truth.has_secure_variants().then_some(0),
    };
    for inst in &truth.instances {
        if !supported.contains(&inst.unified_type) {
            continue;
        }
        let hit = asserted.contains(&(inst.apk.as_str(), inst.unified_type.as_str()));
        match (inst.variant, hit) {
            (Variant::Vulnerable, true) => c.tp += 1,
            (Variant::Vulnerable, false) => c.fn_ += 1,
            (Variant::Secure, true) => c.fp += 1,
            (Variant::Secure, false) => {
                if let Some(tn) = c.tn.as_mut() {
                    *tn += 1;
                }
            }
        }
    }
    c
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// F1 from precision and recall; undefined when P + R is zero.
pub fn f1_from_pr(precision: f64, recall: f64) -> Option<f64> {
    let sum = precision + recall;
    (sum > 0.0).then(|| 2.0 * precision * recall / sum)
}

/// Derives precision, recall, FPR and F1 from confusion counts. Benchmark
/// recall is a separate measurement (see [`b_recall`]) and starts out unset.
pub fn effectiveness(c: &ConfusionCounts) -> EffectivenessRow {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let fpr = c.tn.and_then(|tn| ratio(c.fp, c.fp + tn));
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) => f1_from_pr(p, r),
        _ => None,
    };
    EffectivenessRow {
        precision,
        recall,
        fpr,
        f1,
        b_recall: None,
        support: c.clone(),
    }
}

/// Benchmark recall: correctly identified vulnerable (apk, type) pairs over
/// all vulnerable pairs. Secure variants never enter the denominator, and no
/// support filter applies — the denominator is the whole benchmark.
pub fn b_recall(findings: &[NormalizedFinding], truth: &Benchmark) -> Result<f64, MetricsError> {
    let total = truth.vulnerable().count() as u64;
    if total == 0 {
        return Err(MetricsError::EmptyBenchmark(truth.benchmark_id.clone()));
    }
    let asserted = asserted_pairs(findings, None);
    let matched = truth
        .vulnerable()
        .filter(|i| asserted.contains(&(i.apk.as_str(), i.unified_type.as_str())))
        .count() as u64;
    Ok(matched as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeRecallRow {
    pub unified_type: String,
    pub instance_count: usize,
    pub b_recall: f64,
}

/// Benchmark recall per type, restricted to types with at least
/// `min_instances` vulnerable instances so tiny samples do not masquerade as
/// signal. Rows are sorted by type id.
pub fn per_type_b_recall(
    findings: &[NormalizedFinding],
    truth: &Benchmark,
    min_instances: usize,
) -> Vec<TypeRecallRow> {
    let asserted = asserted_pairs(findings, None);
    truth
        .per_type_counts()
        .into_iter()
        .filter(|(_, n)| *n >= min_instances)
        .map(|(ty, n)| {
            let matched = truth
                .vulnerable()
                .filter(|i| i.unified_type == ty)
                .filter(|i| asserted.contains(&(i.apk.as_str(), i.unified_type.as_str())))
                .count();
            TypeRecallRow {
                unified_type: ty.to_string(),
                instance_count: n,
                b_recall: matched as f64 / n as f64,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::GroundTruthInstance;

    fn inst(apk: &str, ty: &str, variant: Variant) -> GroundTruthInstance {
        GroundTruthInstance {
            apk: apk.into(),
            unified_type: ty.into(),
            variant,
            source_ref: None,
        }
    }

    fn finding(apk: &str, ty: &str) -> NormalizedFinding {
        NormalizedFinding {
            tool: "T".into(),
            apk: apk.into(),
            unified_type: TypeLabel::Unified(ty.into()),
            raw: "r".into(),
            file: None,
            line: None,
            message: String::new(),
        }
    }

    fn supported(types: &[&str]) -> BTreeSet<String> {
        types.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn vulnerable_pair_with_finding_is_tp() {
        let truth = Benchmark::new("B", vec![inst("a", "X", Variant::Vulnerable)]).unwrap();
        let c = confusion("T", &[finding("a", "X")], &truth, &supported(&["X"]));
        assert_eq!((c.tp, c.fp, c.fn_, c.tn), (1, 0, 0, None));
    }

    #[test]
    fn secure_pair_with_finding_is_fp() {
        let truth = Benchmark::new(
            "B",
            vec![
                inst("a", "X", Variant::Vulnerable),
                inst("a-secure", "X", Variant::Secure),
            ],
        )
        .unwrap();
        let c = confusion(
            "T",
            &[finding("a", "X"), finding("a-secure", "X")],
            &truth,
            &supported(&["X"]),
        );
        assert_eq!((c.tp, c.fp, c.fn_, c.tn), (1, 1, 0, Some(0)));
    }

    #[test]
    fn unsupported_type_findings_change_nothing() {
        let truth = Benchmark::new("B", vec![inst("a", "X", Variant::Vulnerable)]).unwrap();
        let c = confusion("T", &[finding("a", "Y")], &truth, &supported(&["X"]));
        assert_eq!((c.tp, c.fp, c.fn_), (0, 0, 1));
        // and a truth pair of an unsupported type leaves the universe
        let truth2 = Benchmark::new("B", vec![inst("a", "Y", Variant::Vulnerable)]).unwrap();
        let c2 = confusion("T", &[finding("a", "Y")], &truth2, &supported(&["X"]));
        assert_eq!((c2.tp, c2.fp, c2.fn_), (0, 0, 0));
    }

    #[test]
    fn published_f1_values_reproduce() {
        // counts engineered so tp/(tp+fp) = 0.76 and tp/(tp+fn) = 0.905
        let c = ConfusionCounts {
            tool: "T".into(),
            benchmark: "B".into(),
            type_filter: None,
            tp: 3439,
            fp: 1086,
            fn_: 361,
            tn: None,
        };
        let row = effectiveness(&c);
        assert!((row.precision.unwrap() - 0.76).abs() < 1e-12);
        assert!((row.recall.unwrap() - 0.905).abs() < 1e-12);
        assert!((row.f1.unwrap() - 0.826).abs() < 1e-3);

        assert!((f1_from_pr(0.667, 0.333).unwrap() - 0.444).abs() < 1e-3);
    }

    #[test]
    fn zero_denominators_are_undefined_not_zero() {
        let c = ConfusionCounts {
            tool: "T".into(),
            benchmark: "B".into(),
            type_filter: None,
            tp: 0,
            fp: 0,
            fn_: 0,
            tn: None,
        };
        let row = effectiveness(&c);
        assert_eq!(row.precision, None);
        assert_eq!(row.recall, None);
        assert_eq!(row.f1, None);
        assert_eq!(row.fpr, None);
    }

    #[test]
    fn b_recall_edge_values() {
        let truth = Benchmark::new(
            "B",
            (0..20)
                .map(|i| inst(&format!("a{i}"), "X", Variant::Vulnerable))
                .collect(),
        )
        .unwrap();
        assert_eq!(b_recall(&[], &truth).unwrap(), 0.0);
        let all: Vec<_> = (0..20).map(|i| finding(&format!("a{i}"), "X")).collect();
        assert_eq!(b_recall(&all, &truth).unwrap(), 1.0);
        let eighteen: Vec<_> = (0..18).map(|i| finding(&format!("a{i}"), "X")).collect();
        assert_eq!(b_recall(&eighteen, &truth).unwrap(), 0.9);
    }

    #[test]
    fn empty_benchmark_is_an_error() {
        let truth = Benchmark::new("B", vec![inst("s", "X", Variant::Secure)]).unwrap();
        assert!(matches!(
            b_recall(&[], &truth),
            Err(MetricsError::EmptyBenchmark(_))
        ));
    }

    #[test]
    fn per_type_rows_respect_the_instance_floor() {
        let mut instances: Vec<_> = (0..5)
            .map(|i| inst(&format!("a{i}"), "X", Variant::Vulnerable))
            .collect();
        instances.extend((0..4).map(|i| inst(&format!("b{i}"), "Y", Variant::Vulnerable)));
        let truth = Benchmark::new("B", instances).unwrap();
        let findings: Vec<_> = (0..5).map(|i| finding(&format!("a{i}"), "X")).collect();
        let rows = per_type_b_recall(&findings, &truth, 5);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].unified_type, "X");
        assert_eq!(rows[0].instance_count, 5);
        assert_eq!(rows[0].b_recall, 1.0);
    }

    #[test]
    fn per_type_with_no_findings_is_all_zero() {
        let instances: Vec<_> = (0..6)
            .map(|i| inst(&format!("a{i}"), "X", Variant::Vulnerable))
            .collect();
        let truth = Benchmark::new("B", instances).unwrap();
        let rows = per_type_b_recall(&[], &truth, 5);
        assert_eq!(rows[0].b_recall, 0.0);
    }
}
