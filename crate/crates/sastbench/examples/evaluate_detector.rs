//! Full pipeline on the fixture bundles: scan with the reference detector,
//! normalize and dedup the findings, then score them against hand-labeled
//! ground truth.
//!
//! ```bash
//! cargo run -p sastbench --example evaluate_detector
//! ```

use std::path::Path;

use sastbench::bench::load_ground_truth;
use sastbench::metrics::{b_recall, confusion, effectiveness, per_type_b_recall};
use sastbench::normalizer::{dedupe, normalize, DedupGranularity};
use sastbench::refdetector::{scan_findings, AppBundle, Rulepack, SqlMode, TOOL_ID};
use sastbench::taxonomy::load_taxonomy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tax = load_taxonomy(&root.join("data/taxonomy.json"))?;
    let pack = Rulepack::load(&root.join("data/rulepack.json"))?;
    let truth = load_ground_truth(&root.join("fixtures/benchmarks/refdet_fixtures.json"), &tax)?;

    let mut findings = Vec::new();
    for name in ["alpha_vuln", "beta_vuln", "gamma_min", "delta_clean"] {
        let bundle = AppBundle::load(&root.join("fixtures/bundles").join(name))?;
        let raws = scan_findings(&bundle, &pack, SqlMode::SinkReach)?;
        println!("{name}: {} raw findings", raws.len());
        findings.extend(normalize(&tax, name, &raws)?);
    }

    let deduped = dedupe(&findings, DedupGranularity::PerType);
    println!(
        "\n{} findings total, {} after per-type dedup",
        findings.len(),
        deduped.len()
    );

    let supported = tax.supported_types(TOOL_ID);
    let counts = confusion(TOOL_ID, &deduped, &truth, &supported);
    let mut row = effectiveness(&counts);
    row.b_recall = Some(b_recall(&deduped, &truth)?);

    println!("\nagainst benchmark {}:", truth.benchmark_id);
    println!(
        "  tp={} fp={} fn={} tn={:?}",
        counts.tp, counts.fp, counts.fn_, counts.tn
    );
    let fmt = |v: Option<f64>| {
        v.map(|x| format!("{x:.3}"))
            .unwrap_or_else(|| "undefined".into())
    };
    println!("  precision = {}", fmt(row.precision));
    println!("  recall    = {}", fmt(row.recall));
    println!("  fpr       = {}", fmt(row.fpr));
    println!("  f1        = {}", fmt(row.f1));
    println!("  b_recall  = {}", fmt(row.b_recall));

    println!("\nper-type benchmark recall (types with >= 2 instances):");
    for r in per_type_b_recall(&deduped, &truth, 2) {
        println!(
            "  {:<40} n={} recall={:.2}",
            r.unified_type, r.instance_count, r.b_recall
        );
    }
    Ok(())
}
