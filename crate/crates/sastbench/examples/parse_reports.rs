//! Parse the sample tool reports through the parser registry and normalize
//! the raw findings into the uniform format.
//!
//! ```bash
//! cargo run -p sastbench --example parse_reports
//! ```

use std::path::Path;

use sastbench::normalizer::{normalize, parse_report, write_findings_jsonl};
use sastbench::taxonomy::load_taxonomy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tax = load_taxonomy(&root.join("data/taxonomy.json"))?;

    let samples = [
        ("refdetector", "refdetector_sample.tsv"),
        ("super", "super_sample.txt"),
        ("ausera", "ausera_sample.txt"),
        ("mobsf", "mobsf_sample.txt"),
        ("androbugs", "androbugs_sample.txt"),
    ];
    for (parser_id, file) in samples {
        let bytes = std::fs::read(root.join("fixtures/reports").join(file))?;
        let raws = parse_report(parser_id, &bytes)?;
        println!("{file}: {} findings via parser {parser_id:?}", raws.len());
        let normalized = normalize(&tax, "sample_app", &raws)?;
        let mut out = Vec::new();
        write_findings_jsonl(&normalized, &mut out)?;
        print!("{}", String::from_utf8_lossy(&out));
        println!();
    }

    // a structurally broken report is an error, not an empty result
    let broken = std::fs::read(root.join("fixtures/reports/super_truncated.txt"))?;
    match parse_report("super", &broken) {
        Err(e) => println!("super_truncated.txt rejected: {e}"),
        Ok(_) => unreachable!("fixture is malformed on purpose"),
    }
    Ok(())
}
