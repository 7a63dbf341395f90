//! Adapter execution: spawning scans, enforcing timeouts, classifying
//! failures, and aggregating a deterministic scan matrix.
//!
//! An adapter is either an external command (invocation template with
//! `{apk_path}` and `{out_path}` placeholders) or the built-in reference
//! detector (`builtin:refdetector ...`). Durations are monotonic wall clock
//! around the child process; report parsing happens after the clock stops and
//! is not part of the measured duration.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalizer::{self, NormalizedFinding};
use crate::refdetector::{self, AppBundle, Rulepack};
use crate::taxonomy::Taxonomy;

/// Scan timeout when the adapter config does not override it (15 minutes).
pub const DEFAULT_TIMEOUT_SECONDS: u64 = 900;
/// Teardown allowance after the timeout fires before the child is reaped.
pub const DEFAULT_GRACE_SECONDS: f64 = 5.0;
/// How often each scan cell is repeated by default.
pub const DEFAULT_REPEATS: u32 = 3;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("adapter config error: {0}")]
    Config(String),
    #[error("cannot spawn {invocation:?} for {tool}: {detail}")]
    Spawn {
        tool: String,
        invocation: String,
        detail: String,
    },
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("size buckets invalid: {0}")]
    Buckets(String),
    #[error("scan matrix invariant violated: {0}")]
    Matrix(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureClass {
    DecompileFailure,
    AnalysisFailure,
    ToolLogicError,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureSignature {
    /// Regex matched against the combined stdout/stderr of the adapter.
    pub pattern: String,
    pub class: FailureClass,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdapterConfig {
    pub tool_id: String,
    /// Command template; must contain `{apk_path}` and `{out_path}`.
    pub invocation: String,
    pub parser_id: String,
    #[serde(default = "default_timeout")]
    pub timeout_seconds: u64,
    #[serde(default)]
    pub failure_signatures: Vec<FailureSignature>,
    /// Rulepack path for the built-in detector; ignored by external tools.
    #[serde(default)]
    pub rulepack: Option<PathBuf>,
}

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_SECONDS
}

impl AdapterConfig {
    pub fn validate(&self) -> Result<(), RunnerError> {
        if self.timeout_seconds == 0 {
            return Err(RunnerError::Config(format!(
                "{}: timeout_seconds must be positive",
                self.tool_id
            )));
        }
        if !self.invocation.contains("{apk_path}") || !self.invocation.contains("{out_path}") {
            return Err(RunnerError::Config(format!(
                "{}: invocation template must contain {{apk_path}} and {{out_path}}",
                self.tool_id
            )));
        }
        if normalizer::parser_for(&self.parser_id).is_none() {
            return Err(RunnerError::Config(format!(
                "{}: unknown parser {}",
                self.tool_id, self.parser_id
            )));
        }
        for sig in &self.failure_signatures {
            regex::Regex::new(&sig.pattern).map_err(|e| {
                RunnerError::Config(format!(
                    "{}: failure signature {:?} does not compile: {e}",
                    self.tool_id, sig.pattern
                ))
            })?;
        }
        Ok(())
    }

    fn is_builtin(&self) -> bool {
        self.invocation
            .trim_start()
            .starts_with("builtin:refdetector")
    }
}

/// Loads and validates an adapter configuration file (a JSON array).
pub fn load_adapters(path: &Path) -> Result<Vec<AdapterConfig>, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunnerError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let cfgs: Vec<AdapterConfig> =
        serde_json::from_str(&text).map_err(|e| RunnerError::Config(e.to_string()))?;
    for c in &cfgs {
        c.validate()?;
    }
    Ok(cfgs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanStatus {
    Ok,
    Timeout,
    DecompileFailure,
    AnalysisFailure,
    ToolLogicError,
    /// The adapter command could not be started at all. Distinct from a
    /// classified tool failure; only reachable through matrix aggregation.
    SpawnError,
}

impl From<FailureClass> for ScanStatus {
    fn from(c: FailureClass) -> Self {
        match c {
            FailureClass::DecompileFailure => ScanStatus::DecompileFailure,
            FailureClass::AnalysisFailure => ScanStatus::AnalysisFailure,
            FailureClass::ToolLogicError => ScanStatus::ToolLogicError,
        }
    }
}

/// Result of running one tool on one app.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanOutcome {
    #[serde(rename = "tool")]
    pub tool_id: String,
    #[serde(rename = "apk")]
    pub apk_id: String,
    pub status: ScanStatus,
    pub duration_seconds: f64,
    pub apk_size_mb: f64,
    /// Empty unless status is Ok.
    #[serde(default)]
    pub findings: Vec<NormalizedFinding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScanMatrix {
    pub outcomes: Vec<ScanOutcome>,
}

impl ScanMatrix {
    /// Sorts by (apk, tool) and checks the one-outcome-per-cell invariant.
    pub fn normalize(mut outcomes: Vec<ScanOutcome>) -> Result<Self, RunnerError> {
        outcomes.sort_by(|a, b| (&a.apk_id, &a.tool_id).cmp(&(&b.apk_id, &b.tool_id)));
        for w in outcomes.windows(2) {
            if w[0].apk_id == w[1].apk_id && w[0].tool_id == w[1].tool_id {
                return Err(RunnerError::Matrix(format!(
                    "duplicate outcome for ({}, {})",
                    w[0].tool_id, w[0].apk_id
                )));
            }
        }
        for o in &outcomes {
            if o.status != ScanStatus::Ok && !o.findings.is_empty() {
                return Err(RunnerError::Matrix(format!(
                    "({}, {}) is {:?} but carries findings",
                    o.tool_id, o.apk_id, o.status
                )));
            }
        }
        Ok(Self { outcomes })
    }

    pub fn load(path: &Path) -> Result<Self, RunnerError> {
        let text = std::fs::read_to_string(path).map_err(|source| RunnerError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let m: ScanMatrix =
            serde_json::from_str(&text).map_err(|e| RunnerError::Matrix(e.to_string()))?;
        Self::normalize(m.outcomes)
    }
}

/// Shared knobs for scan execution.
pub struct ScanContext<'a> {
    pub taxonomy: &'a Taxonomy,
    /// Directory for adapter report files.
    pub work_dir: PathBuf,
    pub grace_seconds: f64,
    /// Overrides every adapter's timeout when set.
    pub timeout_override: Option<u64>,
}

impl<'a> ScanContext<'a> {
    pub fn new(taxonomy: &'a Taxonomy, work_dir: impl Into<PathBuf>) -> Self {
        Self {
            taxonomy,
            work_dir: work_dir.into(),
            grace_seconds: DEFAULT_GRACE_SECONDS,
            timeout_override: None,
        }
    }

    fn timeout_for(&self, cfg: &AdapterConfig) -> u64 {
        self.timeout_override.unwrap_or(cfg.timeout_seconds)
    }
}

/// Classifies a failed scan from its exit code and combined output: the
/// first matching configured signature wins; with no match the failure
/// defaults to an analysis failure.
pub fn classify_failure(
    cfg: &AdapterConfig,
    _exit_code: Option<i32>,
    output: &str,
) -> FailureClass {
    for sig in &cfg.failure_signatures {
        let re = regex::Regex::new(&sig.pattern).expect("validated at load");
        if re.is_match(output) {
            return sig.class;
        }
    }
    FailureClass::AnalysisFailure
}

/// Recursive size of an app bundle in megabytes.
pub fn bundle_size_mb(path: &Path) -> f64 {
    fn walk(p: &Path, total: &mut u64) {
        if let Ok(meta) = std::fs::metadata(p) {
            if meta.is_file() {
                *total += meta.len();
                return;
            }
        }
        if let Ok(rd) = std::fs::read_dir(p) {
            for e in rd.flatten() {
                walk(&e.path(), total);
            }
        }
    }
    let mut total = 0;
    walk(path, &mut total);
    total as f64 / (1024.0 * 1024.0)
}

/// Splits an invocation into argv, honoring single and double quotes.
fn tokenize(invocation: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    let mut pending = false;
    for c in invocation.chars() {
        match quote {
            Some(q) => {
                if c == q {
                    quote = None;
                } else {
                    cur.push(c);
                }
            }
            None => match c {
                '\'' | '"' => {
                    quote = Some(c);
                    pending = true;
                }
                c if c.is_whitespace() => {
                    if pending || !cur.is_empty() {
                        out.push(std::mem::take(&mut cur));
                        pending = false;
                    }
                }
                _ => cur.push(c),
            },
        }
    }
    if pending || !cur.is_empty() {
        out.push(cur);
    }
    out
}

struct ChildRun {
    exit_code: Option<i32>,
    timed_out: bool,
    duration: Duration,
    output: String,
}

fn run_child(argv: &[String], timeout: Duration, grace: Duration) -> Result<ChildRun, String> {
    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    // Own process group, so a timeout kill reaches the adapter's helper
    // processes (decompilers and the like), not just the shell wrapper.
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        cmd.process_group(0);
    }
    let start = Instant::now();
    let mut child = cmd.spawn().map_err(|e| e.to_string())?;

    // Drain pipes on threads so a chatty adapter cannot deadlock the poll loop.
    let mut stdout = child.stdout.take().expect("piped");
    let mut stderr = child.stderr.take().expect("piped");
    let out_handle = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout.read_to_string(&mut buf);
        buf
    });
    let err_handle = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });

    let deadline = start + timeout;
    let mut timed_out = false;
    let exit_code = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status.code(),
            Ok(None) => {
                if Instant::now() >= deadline {
                    timed_out = true;
                    #[cfg(unix)]
                    unsafe {
                        libc::kill(-(child.id() as i32), libc::SIGKILL);
                    }
                    let _ = child.kill();
                    let hard_deadline = Instant::now() + grace;
                    loop {
                        match child.try_wait() {
                            Ok(Some(_)) => break,
                            Ok(None) if Instant::now() < hard_deadline => {
                                std::thread::sleep(Duration::from_millis(5));
                            }
                            _ => break,
                        }
                    }
                    break None;
                }
                std::thread::sleep(Duration::from_millis(10));
            }
            Err(e) => return Err(e.to_string()),
        }
    };
    let duration = start.elapsed();
    let mut output = out_handle.join().unwrap_or_default();
    output.push_str(&err_handle.join().unwrap_or_default());
    Ok(ChildRun {
        exit_code,
        timed_out,
        duration,
        output,
    })
}

/// Executes one adapter over one app bundle.
///
/// The child is terminated at the timeout plus a small teardown grace; on a
/// clean exit the report file is parsed and normalized. An unstartable
/// command is a [`RunnerError::Spawn`], not a classified tool failure.
pub fn run_scan(
    cfg: &AdapterConfig,
    apk: &Path,
    ctx: &ScanContext<'_>,
) -> Result<ScanOutcome, RunnerError> {
    let apk_id = apk
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| apk.to_string_lossy().into_owned());
    let apk_size_mb = bundle_size_mb(apk);
    std::fs::create_dir_all(&ctx.work_dir).map_err(|source| RunnerError::Io {
        path: ctx.work_dir.clone(),
        source,
    })?;
    let out_path = ctx
        .work_dir
        .join(format!("{}__{}.report.txt", cfg.tool_id, apk_id));
    let timeout = Duration::from_secs(ctx.timeout_for(cfg));
    let grace = Duration::from_secs_f64(ctx.grace_seconds);

    let mut outcome = ScanOutcome {
        tool_id: cfg.tool_id.clone(),
        apk_id: apk_id.clone(),
        status: ScanStatus::AnalysisFailure,
        duration_seconds: 0.0,
        apk_size_mb,
        findings: Vec::new(),
        detail: None,
    };

    if cfg.is_builtin() {
        let start = Instant::now();
        let scanned = AppBundle::load(apk).and_then(|bundle| {
            let pack_path = cfg
                .rulepack
                .clone()
                .unwrap_or_else(refdetector::shipped_rulepack_path);
            let pack = Rulepack::load(&pack_path)?;
            refdetector::scan_app(&bundle, &pack)
        });
        outcome.duration_seconds = start.elapsed().as_secs_f64();
        match scanned {
            Ok(report) => {
                std::fs::write(&out_path, &report).map_err(|source| RunnerError::Io {
                    path: out_path.clone(),
                    source,
                })?;
                let raws = normalizer::parse_report(&cfg.parser_id, report.as_bytes())
                    .map_err(|e| RunnerError::Config(format!("{}: {e}", cfg.tool_id)))?;
                finish_ok(cfg, &apk_id, &raws, &mut outcome, ctx)?;
            }
            Err(e) => {
                outcome.status = ScanStatus::AnalysisFailure;
                outcome.detail = Some(e.to_string());
            }
        }
        return Ok(outcome);
    }

    let rendered = cfg
        .invocation
        .replace("{apk_path}", &apk.to_string_lossy())
        .replace("{out_path}", &out_path.to_string_lossy());
    let argv = tokenize(&rendered);
    if argv.is_empty() {
        return Err(RunnerError::Config(format!(
            "{}: empty invocation",
            cfg.tool_id
        )));
    }
    let run = run_child(&argv, timeout, grace).map_err(|detail| RunnerError::Spawn {
        tool: cfg.tool_id.clone(),
        invocation: rendered.clone(),
        detail,
    })?;
    outcome.duration_seconds = run.duration.as_secs_f64();

    if run.timed_out {
        outcome.status = ScanStatus::Timeout;
        return Ok(outcome);
    }

    let report = std::fs::read(&out_path).ok();
    let parsed = match (&run.exit_code, report) {
        (Some(0), Some(bytes)) => normalizer::parse_report(&cfg.parser_id, &bytes).ok(),
        _ => None,
    };
    match parsed {
        Some(raws) => finish_ok(cfg, &apk_id, &raws, &mut outcome, ctx)?,
        None => {
            outcome.status = classify_failure(cfg, run.exit_code, &run.output).into();
            let trimmed: String = run.output.chars().take(200).collect();
            outcome.detail = (!trimmed.is_empty()).then_some(trimmed);
        }
    }
    Ok(outcome)
}

// Parsing and mapping run after the clock stopped; they are not part of the
// measured scan duration.
fn finish_ok(
    cfg: &AdapterConfig,
    apk_id: &str,
    raws: &[normalizer::RawFinding],
    outcome: &mut ScanOutcome,
    ctx: &ScanContext<'_>,
) -> Result<(), RunnerError> {
    let findings = normalizer::normalize(ctx.taxonomy, apk_id, raws)
        .map_err(|e| RunnerError::Config(format!("{}: {e}", cfg.tool_id)))?;
    outcome.status = ScanStatus::Ok;
    outcome.findings = findings;
    Ok(())
}

/// Runs every (tool, apk) cell `repeats` times with a bounded worker pool.
///
/// The reported duration is the mean over repeats; findings come from the
/// first Ok run. Spawn errors become `SpawnError` outcomes instead of
/// aborting the matrix. Output order is (apk, tool), independent of worker
/// count.
pub fn run_matrix(
    cfgs: &[AdapterConfig],
    apks: &[PathBuf],
    repeats: u32,
    jobs: usize,
    ctx: &ScanContext<'_>,
) -> Result<ScanMatrix, RunnerError> {
    assert!(repeats >= 1, "repeats must be at least 1");
    let jobs = jobs.max(1);
    let cells: Vec<(usize, usize)> = (0..apks.len())
        .flat_map(|a| (0..cfgs.len()).map(move |t| (a, t)))
        .collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<ScanOutcome>>> = Mutex::new(vec![None; cells.len()]);

    std::thread::scope(|scope| {
        for _ in 0..jobs.min(cells.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= cells.len() {
                    break;
                }
                let (a, t) = cells[i];
                let outcome = run_cell(&cfgs[t], &apks[a], repeats, ctx);
                results.lock().expect("no poisoned workers")[i] = Some(outcome);
            });
        }
    });

    let outcomes = results
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|o| o.expect("every cell ran"))
        .collect();
    ScanMatrix::normalize(outcomes)
}

fn run_cell(cfg: &AdapterConfig, apk: &Path, repeats: u32, ctx: &ScanContext<'_>) -> ScanOutcome {
    let mut runs = Vec::with_capacity(repeats as usize);
    for _ in 0..repeats {
        match run_scan(cfg, apk, ctx) {
            Ok(o) => runs.push(o),
            Err(e) => {
                let apk_id = apk
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                runs.push(ScanOutcome {
                    tool_id: cfg.tool_id.clone(),
                    apk_id,
                    status: ScanStatus::SpawnError,
                    duration_seconds: 0.0,
                    apk_size_mb: bundle_size_mb(apk),
                    findings: Vec::new(),
                    detail: Some(e.to_string()),
                });
            }
        }
    }
    let mean = runs.iter().map(|r| r.duration_seconds).sum::<f64>() / runs.len() as f64;
    let pick = runs
        .iter()
        .position(|r| r.status == ScanStatus::Ok)
        .unwrap_or(0);
    let mut cell = runs.swap_remove(pick);
    cell.duration_seconds = mean;
    cell
}

/// Half-open size interval in megabytes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeBucket {
    pub lo_mb: f64,
    pub hi_mb: f64,
}

impl SizeBucket {
    pub fn contains(&self, size: f64) -> bool {
        size >= self.lo_mb && size < self.hi_mb
    }
}

/// Per-tool timing summary over a matrix.
#[derive(Debug, Clone, Serialize)]
pub struct ToolTimeStats {
    pub tool: String,
    /// Mean over Ok outcomes; absent when a tool never succeeded.
    pub mean_seconds: Option<f64>,
    pub failed_count: usize,
    /// Mean over Ok outcomes falling in each bucket, in bucket order.
    pub bucket_means: Vec<Option<f64>>,
}

/// Per-tool mean durations (Ok outcomes only), failure counts, and per-bucket
/// means. Buckets must be disjoint and cover every observed size.
pub fn time_stats(
    matrix: &ScanMatrix,
    buckets: &[SizeBucket],
) -> Result<Vec<ToolTimeStats>, RunnerError> {
    for (i, a) in buckets.iter().enumerate() {
        if a.lo_mb >= a.hi_mb {
            return Err(RunnerError::Buckets(format!(
                "bucket {i} is empty ({} >= {})",
                a.lo_mb, a.hi_mb
            )));
        }
        for b in &buckets[i + 1..] {
            if a.lo_mb < b.hi_mb && b.lo_mb < a.hi_mb {
                return Err(RunnerError::Buckets(format!(
                    "buckets overlap around {}..{}",
                    b.lo_mb, a.hi_mb
                )));
            }
        }
    }
    for o in &matrix.outcomes {
        if !buckets.is_empty() && !buckets.iter().any(|b| b.contains(o.apk_size_mb)) {
            return Err(RunnerError::Buckets(format!(
                "size {} MB of ({}, {}) falls in no bucket",
                o.apk_size_mb, o.tool_id, o.apk_id
            )));
        }
    }

    let mut tools: Vec<&str> = matrix.outcomes.iter().map(|o| o.tool_id.as_str()).collect();
    tools.sort_unstable();
    tools.dedup();

    let mut out = Vec::new();
    for tool in tools {
        let ok: Vec<&ScanOutcome> = matrix
            .outcomes
            .iter()
            .filter(|o| o.tool_id == tool && o.status == ScanStatus::Ok)
            .collect();
        let failed_count = matrix
            .outcomes
            .iter()
            .filter(|o| o.tool_id == tool && o.status != ScanStatus::Ok)
            .count();
        let mean = |xs: &[&ScanOutcome]| {
            (!xs.is_empty())
                .then(|| xs.iter().map(|o| o.duration_seconds).sum::<f64>() / xs.len() as f64)
        };
        let bucket_means = buckets
            .iter()
            .map(|b| {
                let in_bucket: Vec<&ScanOutcome> = ok
                    .iter()
                    .copied()
                    .filter(|o| b.contains(o.apk_size_mb))
                    .collect();
                mean(&in_bucket)
            })
            .collect();
        out.push(ToolTimeStats {
            tool: tool.to_string(),
            mean_seconds: mean(&ok),
            failed_count,
            bucket_means,
        });
    }
    Ok(out)
}

/// Timing summaries keyed by tool, for callers that prefer lookup to order.
pub fn time_stats_by_tool(
    matrix: &ScanMatrix,
    buckets: &[SizeBucket],
) -> Result<BTreeMap<String, ToolTimeStats>, RunnerError> {
    Ok(time_stats(matrix, buckets)?
        .into_iter()
        .map(|s| (s.tool.clone(), s))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_honors_quotes() {
        assert_eq!(
            tokenize(r#"sh -c 'sleep 1; echo "a b"' x"#),
            vec!["sh", "-c", r#"sleep 1; echo "a b""#, "x"]
        );
        assert_eq!(tokenize("a  b"), vec!["a", "b"]);
        assert_eq!(tokenize("cmd ''"), vec!["cmd", ""]);
    }

    #[test]
    fn config_requires_placeholders_and_known_parser() {
        let mut cfg = AdapterConfig {
            tool_id: "t".into(),
            invocation: "run {apk_path}".into(),
            parser_id: "refdetector".into(),
            timeout_seconds: 10,
            failure_signatures: vec![],
            rulepack: None,
        };
        assert!(cfg.validate().is_err());
        cfg.invocation = "run {apk_path} {out_path}".into();
        assert!(cfg.validate().is_ok());
        cfg.parser_id = "nope".into();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn first_matching_signature_wins() {
        let cfg = AdapterConfig {
            tool_id: "t".into(),
            invocation: "x {apk_path} {out_path}".into(),
            parser_id: "refdetector".into(),
            timeout_seconds: 10,
            failure_signatures: vec![
                FailureSignature {
                    pattern: "Dex2Jar".into(),
                    class: FailureClass::DecompileFailure,
                },
                FailureSignature {
                    pattern: "0xa0".into(),
                    class: FailureClass::ToolLogicError,
                },
            ],
            rulepack: None,
        };
        assert_eq!(
            classify_failure(&cfg, Some(1), "Dex2Jar conversion error near 0xa0"),
            FailureClass::DecompileFailure
        );
        assert_eq!(
            classify_failure(&cfg, Some(1), "int('0xa0') crashed"),
            FailureClass::ToolLogicError
        );
        assert_eq!(
            classify_failure(&cfg, Some(1), "something else"),
            FailureClass::AnalysisFailure
        );
    }

    #[test]
    fn matrix_rejects_duplicate_cells() {
        let o = ScanOutcome {
            tool_id: "t".into(),
            apk_id: "a".into(),
            status: ScanStatus::Timeout,
            duration_seconds: 1.0,
            apk_size_mb: 0.0,
            findings: vec![],
            detail: None,
        };
        assert!(ScanMatrix::normalize(vec![o.clone(), o]).is_err());
    }

    #[test]
    fn matrix_rejects_findings_on_failures() {
        let f = crate::normalizer::NormalizedFinding {
            tool: "t".into(),
            apk: "a".into(),
            unified_type: crate::normalizer::TypeLabel::Unmapped,
            raw: "r".into(),
            file: None,
            line: None,
            message: String::new(),
        };
        let o = ScanOutcome {
            tool_id: "t".into(),
            apk_id: "a".into(),
            status: ScanStatus::Timeout,
            duration_seconds: 1.0,
            apk_size_mb: 0.0,
            findings: vec![f],
            detail: None,
        };
        assert!(ScanMatrix::normalize(vec![o]).is_err());
    }

    #[test]
    fn buckets_must_cover_and_not_overlap() {
        let m = ScanMatrix {
            outcomes: vec![ScanOutcome {
                tool_id: "t".into(),
                apk_id: "a".into(),
                status: ScanStatus::Ok,
                duration_seconds: 10.0,
                apk_size_mb: 150.0,
                findings: vec![],
                detail: None,
            }],
        };
        let disjoint = [
            SizeBucket {
                lo_mb: 0.0,
                hi_mb: 100.0,
            },
            SizeBucket {
                lo_mb: 100.0,
                hi_mb: 200.0,
            },
        ];
        assert!(time_stats(&m, &disjoint).is_ok());
        let overlapping = [
            SizeBucket {
                lo_mb: 0.0,
                hi_mb: 100.0,
            },
            SizeBucket {
                lo_mb: 50.0,
                hi_mb: 200.0,
            },
        ];
        assert!(time_stats(&m, &overlapping).is_err());
        let gap = [SizeBucket {
            lo_mb: 0.0,
            hi_mb: 100.0,
        }];
        assert!(time_stats(&m, &gap).is_err());
    }

    #[test]
    fn stats_mean_and_failed_counts() {
        let mk = |tool: &str, status, dur| ScanOutcome {
            tool_id: tool.into(),
            apk_id: format!("a{dur}"),
            status,
            duration_seconds: dur,
            apk_size_mb: 1.0,
            findings: vec![],
            detail: None,
        };
        let m = ScanMatrix {
            outcomes: vec![
                mk("t", ScanStatus::Ok, 10.0),
                mk("t", ScanStatus::Ok, 20.0),
                mk("t", ScanStatus::Timeout, 900.0),
            ],
        };
        let stats = time_stats(
            &m,
            &[SizeBucket {
                lo_mb: 0.0,
                hi_mb: 10.0,
            }],
        )
        .unwrap();
        assert_eq!(stats[0].mean_seconds, Some(15.0));
        assert_eq!(stats[0].failed_count, 1);
    }
}
