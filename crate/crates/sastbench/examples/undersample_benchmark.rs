//! Balance a skewed benchmark by per-type under-sampling, and run the
//! incremental variance probe that justifies sampling in the first place.
//!
//! ```bash
//! cargo run -p sastbench --example undersample_benchmark
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use sastbench::bench::{
    cap_sample, load_ground_truth, undersample, variance_probe, BenchmarkState, VARIANCE_THRESHOLD,
};
use sastbench::normalizer::{NormalizedFinding, TypeLabel};
use sastbench::taxonomy::load_taxonomy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tax = load_taxonomy(&root.join("data/taxonomy.json"))?;
    let cve = load_ground_truth(&root.join("fixtures/benchmarks/cve_based.json"), &tax)?;

    println!(
        "benchmark {}: {} instances, {} types, {} apks",
        cve.benchmark_id,
        cve.instances.len(),
        cve.type_set().len(),
        cve.apks().len()
    );

    let balanced = undersample(&cve, 3, 42);
    println!(
        "under-sampled at cap 3 (seed 42): {} instances\n",
        balanced.instances.len()
    );
    println!("top five types before -> after:");
    let before = cve.per_type_counts();
    let after = balanced.per_type_counts();
    let mut by_count: Vec<_> = before.iter().collect();
    by_count.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
    for (ty, n) in by_count.into_iter().take(5) {
        println!("  {ty:<44} {n:>3} -> {}", after[ty]);
    }

    // A detector stub that always finds what the benchmark lists makes the
    // recall series constant, so its sample variance across the growing
    // states is exactly zero.
    let heavy: Vec<String> = [
        "NET.USE_INVALID_SERVER_VERIFICATION",
        "NET.USE_INVALID_HOSTNAME_VERIFICATION",
        "NET.USE_ALLOW_ALL_HOSTNAME_VERIFICATION",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let findings: Vec<NormalizedFinding> = cve
        .vulnerable()
        .map(|i| NormalizedFinding {
            tool: "stub".into(),
            apk: i.apk.clone(),
            unified_type: TypeLabel::Unified(i.unified_type.clone()),
            raw: "stub".into(),
            file: None,
            line: None,
            message: String::new(),
        })
        .collect();
    let states: Vec<BenchmarkState> = [5, 10, 15, 20]
        .into_iter()
        .map(|size| {
            let capped = cap_sample(&cve, &heavy, size, 42).expect("types exist");
            BenchmarkState {
                benchmark: capped,
                findings_by_tool: BTreeMap::from([("stub".to_string(), findings.clone())]),
            }
        })
        .collect();

    println!("\nvariance probe over per-type sizes 5, 10, 15, 20:");
    for (tool, row) in variance_probe(&states)? {
        println!(
            "  {tool}: recalls {:?}, variance {:.2e} ({} the {VARIANCE_THRESHOLD} gate)",
            row.b_recalls,
            row.variance,
            if row.passes { "passes" } else { "fails" }
        );
    }
    Ok(())
}
