//! Scan the fixture app bundles with the built-in reference detector through
//! the runner, then print the scan matrix.
//!
//! ```bash
//! cargo run -p sastbench --example scan_bundles
//! ```

use std::path::Path;

use sastbench::runner::{load_adapters, run_matrix, ScanContext};
use sastbench::taxonomy::load_taxonomy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tax = load_taxonomy(&root.join("data/taxonomy.json"))?;
    let adapters = load_adapters(&root.join("data/adapters.json"))?;

    let bundles: Vec<_> = ["alpha_vuln", "beta_vuln", "gamma_min", "delta_clean"]
        .iter()
        .map(|n| root.join("fixtures/bundles").join(n))
        .collect();

    let work = std::env::temp_dir().join("sastbench-example-scan");
    let ctx = ScanContext::new(&tax, &work);
    let matrix = run_matrix(&adapters, &bundles, 1, 2, &ctx)?;

    println!(
        "{:<12} {:<12} {:<8} {:>9} {:>9}",
        "apk", "tool", "status", "time (s)", "findings"
    );
    for o in &matrix.outcomes {
        println!(
            "{:<12} {:<12} {:<8} {:>9.3} {:>9}",
            o.apk_id,
            o.tool_id,
            format!("{:?}", o.status).to_lowercase(),
            o.duration_seconds,
            o.findings.len()
        );
    }

    println!("\nfindings for alpha_vuln:");
    for o in matrix.outcomes.iter().filter(|o| o.apk_id == "alpha_vuln") {
        for f in &o.findings {
            println!(
                "  {:<32} {}:{}",
                f.unified_type.to_string(),
                f.file.as_deref().unwrap_or("-"),
                f.line.unwrap_or(0)
            );
        }
    }
    Ok(())
}
