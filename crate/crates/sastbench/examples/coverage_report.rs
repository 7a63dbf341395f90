//! Load the shipped taxonomy and print each tool's coverage of the unified
//! vulnerability types.
//!
//! ```bash
//! cargo run -p sastbench --example coverage_report
//! ```

use std::path::Path;

use sastbench::taxonomy::{coverage_report, load_taxonomy, support_groups};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/taxonomy.json");
    let tax = load_taxonomy(&data)?;

    println!(
        "taxonomy v{}: {} unified types in {} categories\n",
        tax.version(),
        tax.types().len(),
        tax.categories().len()
    );

    println!(
        "{:<12} {:>10} {:>9} {:>8} {:>13}",
        "tool", "overlapped", "coverage", "unique", "out of scope"
    );
    for row in coverage_report(&tax) {
        println!(
            "{:<12} {:>10} {:>8}% {:>8} {:>13}",
            row.tool,
            row.overlapped_count,
            row.overlapped_pct,
            row.unique_count,
            row.out_of_scope_count
        );
    }

    // partition an arbitrary type set by tool support
    let sample = [
        "SDE.LOGGING_DATA_EXPOSURE",
        "NET.USING_HTTP_ISSUE",
        "Password Field Autocomplete Enabled", // tool-only type
        "GHERA.DYNAMIC_PRIVILEGE_ESCALATION",  // supported by nothing
    ];
    let part = support_groups(&tax, sample.iter().copied());
    println!("\nsupport partition of {} sample types:", sample.len());
    println!("  overlapped:  {:?}", part.overlapped);
    println!("  unique:      {:?}", part.unique);
    println!("  unsupported: {:?}", part.unsupported);
    Ok(())
}
