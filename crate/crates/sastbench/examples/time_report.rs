//! Summarize scan timing and failure counts from a recorded matrix.
//!
//! ```bash
//! cargo run -p sastbench --example time_report
//! ```

use std::path::Path;

use sastbench::runner::{time_stats, ScanMatrix, SizeBucket};
use sastbench::tables::time_stats_markdown;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let matrix = ScanMatrix::load(&root.join("fixtures/matrices/recorded_timing.json"))?;
    println!("{} recorded outcomes\n", matrix.outcomes.len());

    let buckets = [
        SizeBucket {
            lo_mb: 0.0,
            hi_mb: 10.0,
        },
        SizeBucket {
            lo_mb: 10.0,
            hi_mb: 100.0,
        },
    ];
    let stats = time_stats(&matrix, &buckets)?;
    print!("{}", time_stats_markdown(&stats, &buckets));
    Ok(())
}
