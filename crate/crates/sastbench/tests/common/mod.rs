//! Shared test helpers: an independent brute-force oracle for benchmark
//! recall and a seeded micro-benchmark generator. The oracle uses nothing
//! but nested loops, so it cannot share a bug with the set-based
//! implementation it checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sastbench::bench::{Benchmark, GroundTruthInstance, Variant};
use sastbench::normalizer::{NormalizedFinding, TypeLabel};

/// Benchmark recall by exhaustive enumeration over all (instance, finding)
/// pairs.
pub fn b_recall_oracle(findings: &[NormalizedFinding], truth: &Benchmark) -> Option<f64> {
    let mut total = 0u64;
    let mut matched = 0u64;
    for inst in &truth.instances {
        if inst.variant != Variant::Vulnerable {
            continue;
        }
        total += 1;
        let mut hit = false;
        for f in findings {
            if f.apk != inst.apk {
                continue;
            }
            if let TypeLabel::Unified(t) = &f.unified_type {
                if *t == inst.unified_type {
                    hit = true;
                }
            }
        }
        if hit {
            matched += 1;
        }
    }
    (total > 0).then(|| matched as f64 / total as f64)
}

pub fn finding(tool: &str, apk: &str, label: TypeLabel) -> NormalizedFinding {
    NormalizedFinding {
        tool: tool.to_string(),
        apk: apk.to_string(),
        unified_type: label,
        raw: "raw".into(),
        file: None,
        line: None,
        message: String::new(),
    }
}

/// A random micro-benchmark (at most 10 apks and 8 types, at least one
/// vulnerable instance) together with a random findings set that overlaps it
/// partially and carries some noise.
pub fn micro_benchmark(seed: u64) -> (Benchmark, Vec<NormalizedFinding>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_apks = rng.gen_range(1..=10usize);
    let n_types = rng.gen_range(1..=8usize);
    let apks: Vec<String> = (0..n_apks).map(|i| format!("app{i}")).collect();
    let types: Vec<String> = (0..n_types).map(|i| format!("CAT.TYPE_{i}")).collect();

    let mut instances = Vec::new();
    for apk in &apks {
        for ty in &types {
            if rng.gen_bool(0.4) {
                instances.push(GroundTruthInstance {
                    apk: apk.clone(),
                    unified_type: ty.clone(),
                    variant: Variant::Vulnerable,
                    source_ref: None,
                });
            } else if rng.gen_bool(0.15) {
                instances.push(GroundTruthInstance {
                    apk: apk.clone(),
                    unified_type: ty.clone(),
                    variant: Variant::Secure,
                    source_ref: None,
                });
            }
        }
    }
    if !instances.iter().any(|i| i.variant == Variant::Vulnerable) {
        instances.push(GroundTruthInstance {
            apk: apks[0].clone(),
            unified_type: types[0].clone(),
            variant: Variant::Vulnerable,
            source_ref: None,
        });
    }
    let truth = Benchmark::new(format!("micro-{seed}"), instances).unwrap();

    let mut findings = Vec::new();
    for apk in &apks {
        for ty in &types {
            if rng.gen_bool(0.45) {
                findings.push(finding("tool", apk, TypeLabel::Unified(ty.clone())));
            }
        }
    }
    // noise: findings outside the benchmark and sentinel labels
    findings.push(finding(
        "tool",
        "app-outside",
        TypeLabel::Unified(types[0].clone()),
    ));
    findings.push(finding(
        "tool",
        &apks[0],
        TypeLabel::Unified("CAT.NOT_IN_TRUTH".into()),
    ));
    findings.push(finding("tool", &apks[0], TypeLabel::OutOfScope));
    findings.push(finding("tool", &apks[0], TypeLabel::Unmapped));
    (truth, findings)
}
