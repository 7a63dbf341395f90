//! Command-line surface: scan, evaluate, coverage, sample, report.
//!
//! Exit codes: 0 success, 1 when scan-time spawn failures are present
//! (classified tool failures are recorded in the matrix, not fatal), 2 on
//! configuration or schema errors (the failing path is named on stderr).
//! All emitted artifacts are byte-deterministic for fixed inputs and seed;
//! re-running over an unchanged output directory overwrites identically.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench;
use crate::metrics;
use crate::normalizer::{self, DedupGranularity, NormalizedFinding};
use crate::runner::{self, ScanContext, ScanStatus, SizeBucket};
use crate::tables::{self, MetricsRecord};
use crate::taxonomy::{self, Taxonomy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOOL_FAILURES: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sastbench",
    about = "Meta-evaluation harness for Android SAST tools",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run adapters over app bundles and write findings plus a scan matrix.
    Scan(ScanArgs),
    /// Compute effectiveness metrics and coverage against ground truth.
    Evaluate(EvaluateArgs),
    /// Print per-tool coverage of the unified taxonomy.
    Coverage(CoverageArgs),
    /// Under-sample a ground-truth benchmark with a per-type cap.
    Sample(SampleArgs),
    /// Summarize timing and failures from a recorded scan matrix.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
    Md,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Taxonomy data file.
    #[arg(long)]
    taxonomy: PathBuf,
    /// Adapter configuration file (JSON array).
    #[arg(long)]
    adapters: PathBuf,
    /// Output directory for findings, reports and the matrix.
    #[arg(long)]
    out: PathBuf,
    /// Override every adapter's timeout, in seconds.
    #[arg(long)]
    timeout: Option<u64>,
    /// Worker pool size.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Runs per (tool, apk) cell; the reported duration is the mean.
    #[arg(long, default_value_t = runner::DEFAULT_REPEATS)]
    repeats: u32,
    /// App bundle directories (manifest.xml + src/ tree).
    #[arg(required = true)]
    apks: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    taxonomy: PathBuf,
    /// Directory of *.jsonl findings files produced by scan.
    #[arg(long)]
    findings: PathBuf,
    /// Ground-truth file; repeat for several benchmarks.
    #[arg(long, required = true)]
    truth: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct CoverageArgs {
    #[arg(long)]
    taxonomy: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Md)]
    format: OutputFormat,
    /// Also write the table under this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    taxonomy: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Per-type cap on vulnerable instances.
    #[arg(long, default_value_t = 3)]
    cap: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Restrict sampling to these type ids (comma separated); other types
    /// pass through untouched.
    #[arg(long, value_delimiter = ',')]
    types: Vec<String>,
    /// Sampled benchmark output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Recorded scan matrix (JSON).
    #[arg(long)]
    matrix: PathBuf,
    /// Size bucket boundaries in MB, ascending.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 1.0, 10.0, 100.0, 1000.0])]
    buckets: Vec<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Md)]
    format: OutputFormat,
    /// Also write the table under this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Entry point used by the binary; returns the process exit code.
pub fn run_from_args() -> i32 {
    run(Cli::parse())
}

pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Scan(a) => cmd_scan(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Coverage(a) => cmd_coverage(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_CONFIG
        }
    }
}

fn load_taxonomy(path: &Path) -> Result<Taxonomy, String> {
    taxonomy::load_taxonomy(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), String> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
    }
    fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_scan(args: ScanArgs) -> Result<i32, String> {
    let tax = load_taxonomy(&args.taxonomy)?;
    let cfgs = runner::load_adapters(&args.adapters)
        .map_err(|e| format!("{}: {e}", args.adapters.display()))?;
    for apk in &args.apks {
        if !apk.is_dir() {
            return Err(format!("{}: not a bundle directory", apk.display()));
        }
    }
    let mut ctx = ScanContext::new(&tax, args.out.join("reports"));
    ctx.timeout_override = args.timeout;

    let matrix = runner::run_matrix(&cfgs, &args.apks, args.repeats.max(1), args.jobs, &ctx)
        .map_err(|e| e.to_string())?;

    let findings_dir = args.out.join("findings");
    for o in &matrix.outcomes {
        let mut buf = Vec::new();
        normalizer::write_findings_jsonl(&o.findings, &mut buf).map_err(|e| e.to_string())?;
        write_file(
            &findings_dir.join(format!("{}__{}.jsonl", o.tool_id, o.apk_id)),
            &buf,
        )?;
    }
    let mut matrix_json = serde_json::to_string_pretty(&matrix).expect("serializable matrix");
    matrix_json.push('\n');
    write_file(&args.out.join("matrix.json"), matrix_json.as_bytes())?;

    let spawn_failures = matrix
        .outcomes
        .iter()
        .filter(|o| o.status == ScanStatus::SpawnError)
        .count();
    let ok = matrix
        .outcomes
        .iter()
        .filter(|o| o.status == ScanStatus::Ok)
        .count();
    println!(
        "scanned {} cells: {} ok, {} failed ({} spawn errors)",
        matrix.outcomes.len(),
        ok,
        matrix.outcomes.len() - ok,
        spawn_failures
    );
    Ok(if spawn_failures > 0 {
        EXIT_TOOL_FAILURES
    } else {
        EXIT_OK
    })
}

fn read_findings_dir(dir: &Path) -> Result<BTreeMap<String, Vec<NormalizedFinding>>, String> {
    let mut by_tool: BTreeMap<String, Vec<NormalizedFinding>> = BTreeMap::new();
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    for path in files {
        let file = fs::File::open(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let findings = normalizer::read_findings_jsonl(BufReader::new(file))
            .map_err(|e| format!("{}: {e}", path.display()))?;
        for f in findings {
            by_tool.entry(f.tool.clone()).or_default().push(f);
        }
    }
    Ok(by_tool)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<i32, String> {
    let tax = load_taxonomy(&args.taxonomy)?;
    let mut benchmarks = Vec::new();
    for path in &args.truth {
        let b =
            bench::load_ground_truth(path, &tax).map_err(|e| format!("{}: {e}", path.display()))?;
        benchmarks.push(b);
    }
    let by_tool = read_findings_dir(&args.findings)?;

    // every tool from the coverage report plus every tool seen in findings
    let mut tools: Vec<String> = tax.tools();
    for t in by_tool.keys() {
        if !tools.contains(t) {
            tools.push(t.clone());
        }
    }

    let empty: Vec<NormalizedFinding> = Vec::new();
    let mut records: Vec<MetricsRecord> = Vec::new();
    let mut per_type_csv = String::from(tables::PER_TYPE_HEADER);
    per_type_csv.push('\n');
    for b in &benchmarks {
        for tool in &tools {
            let findings = by_tool.get(tool).unwrap_or(&empty);
            let deduped = normalizer::dedupe(findings, DedupGranularity::PerType);
            let supported = tax.supported_types(tool);
            let counts = metrics::confusion(tool, &deduped, b, &supported);
            let mut row = metrics::effectiveness(&counts);
            row.b_recall = metrics::b_recall(&deduped, b).ok();
            records.push(MetricsRecord::new(&row, supported.len()));
            per_type_csv.push_str(&tables::per_type_csv(
                tool,
                &b.benchmark_id,
                &metrics::per_type_b_recall(&deduped, b, 5),
            ));
        }
    }

    let coverage = taxonomy::coverage_report(&tax);
    let mut groups = BTreeMap::new();
    for b in &benchmarks {
        groups.insert(
            b.benchmark_id.clone(),
            taxonomy::support_groups(&tax, b.type_set()),
        );
    }
    let mut groups_json = serde_json::to_string_pretty(&groups).expect("serializable groups");
    groups_json.push('\n');

    write_file(
        &args.out.join("metrics.csv"),
        tables::metrics_csv(&records).as_bytes(),
    )?;
    write_file(
        &args.out.join("metrics.json"),
        tables::metrics_json(&records).as_bytes(),
    )?;
    write_file(&args.out.join("per_type.csv"), per_type_csv.as_bytes())?;
    write_file(
        &args.out.join("coverage.csv"),
        tables::coverage_csv(&coverage).as_bytes(),
    )?;
    write_file(
        &args.out.join("support_groups.json"),
        groups_json.as_bytes(),
    )?;

    match args.format {
        OutputFormat::Csv => print!("{}", tables::metrics_csv(&records)),
        OutputFormat::Json => print!("{}", tables::metrics_json(&records)),
        OutputFormat::Md => print!("{}", tables::metrics_markdown(&records)),
    }
    Ok(EXIT_OK)
}

fn cmd_coverage(args: CoverageArgs) -> Result<i32, String> {
    let tax = load_taxonomy(&args.taxonomy)?;
    let rows = taxonomy::coverage_report(&tax);
    let rendered = match args.format {
        OutputFormat::Csv => tables::coverage_csv(&rows),
        OutputFormat::Md => tables::coverage_markdown(&rows),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&rows).expect("serializable rows");
            s.push('\n');
            s
        }
    };
    if let Some(out) = &args.out {
        let name = match args.format {
            OutputFormat::Csv => "coverage.csv",
            OutputFormat::Json => "coverage.json",
            OutputFormat::Md => "coverage.md",
        };
        write_file(&out.join(name), rendered.as_bytes())?;
    }
    print!("{rendered}");
    Ok(EXIT_OK)
}

fn cmd_sample(args: SampleArgs) -> Result<i32, String> {
    let tax = load_taxonomy(&args.taxonomy)?;
    let b = bench::load_ground_truth(&args.truth, &tax)
        .map_err(|e| format!("{}: {e}", args.truth.display()))?;
    if args.cap == 0 {
        return Err("cap must be at least 1".into());
    }
    let sampled = if args.types.is_empty() {
        bench::undersample(&b, args.cap, args.seed)
    } else {
        bench::cap_sample(&b, &args.types, args.cap, args.seed)
            .map_err(|e| format!("{}: {e}", args.truth.display()))?
    };
    let mut json = serde_json::to_string_pretty(&sampled).expect("serializable benchmark");
    json.push('\n');
    write_file(&args.out, json.as_bytes())?;
    println!(
        "sampled {} -> {} instances over {} types (seed {})",
        b.instances.len(),
        sampled.instances.len(),
        sampled.type_set().len(),
        args.seed
    );
    for (ty, n) in sampled.per_type_counts() {
        println!("  {ty}: {n}");
    }
    Ok(EXIT_OK)
}

fn cmd_report(args: ReportArgs) -> Result<i32, String> {
    let matrix = runner::ScanMatrix::load(&args.matrix)
        .map_err(|e| format!("{}: {e}", args.matrix.display()))?;
    if args.buckets.len() < 2 {
        return Err("need at least two bucket boundaries".into());
    }
    let buckets: Vec<SizeBucket> = args
        .buckets
        .windows(2)
        .map(|w| SizeBucket {
            lo_mb: w[0],
            hi_mb: w[1],
        })
        .collect();
    let stats = runner::time_stats(&matrix, &buckets)
        .map_err(|e| format!("{}: {e}", args.matrix.display()))?;
    let rendered = match args.format {
        OutputFormat::Csv => tables::time_stats_csv(&stats, &buckets),
        OutputFormat::Md => tables::time_stats_markdown(&stats, &buckets),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&stats).expect("serializable stats");
            s.push('\n');
            s
        }
    };
    if let Some(out) = &args.out {
        let name = match args.format {
            OutputFormat::Csv => "time_stats.csv",
            OutputFormat::Json => "time_stats.json",
            OutputFormat::Md => "time_stats.md",
        };
        write_file(&out.join(name), rendered.as_bytes())?;
    }
    print!("{rendered}");
    Ok(EXIT_OK)
}
