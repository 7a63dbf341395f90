//! Resolve raw tool identifiers through the mapping database.
//!
//! Different scanners name the same weakness differently; some only ship a
//! prose description. The mapping database folds all of that onto unified
//! type ids, tags non-vulnerability alerts as out of scope, and leaves
//! genuinely unknown identifiers visible as unmapped.
//!
//! ```bash
//! cargo run -p sastbench --example map_identifiers
//! ```

use std::path::Path;

use sastbench::taxonomy::{load_taxonomy, map_raw_finding};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/taxonomy.json");
    let tax = load_taxonomy(&data)?;

    let samples = [
        ("AUSERA", "Logging data leakage"),
        ("SUPER", "Unchecked output in Logs"),
        (
            "MobSF",
            "The App logs information. Logs may contain sensitive data.",
        ),
        ("AndroBugs", "SSL_X509"),
        ("AndroBugs", "MANIFEST_GCM"),
        ("MobSF", "totally-new-rule-xyz"),
        ("refdetector", "SQL_CONCAT_INJECTION"),
    ];
    for (tool, raw) in samples {
        let mapped = map_raw_finding(&tax, tool, raw)?;
        println!("{tool:<12} {raw:<60} -> {mapped}");
    }

    match map_raw_finding(&tax, "NotARealScanner", "anything") {
        Err(e) => println!("\nunknown tools are rejected: {e}"),
        Ok(_) => unreachable!("the mapping database has no such tool"),
    }
    Ok(())
}
