//! CSV / JSON / Markdown table rendering for report emission.
//!
//! Undefined ratios serialize as empty CSV cells and JSON nulls. All output
//! is byte-deterministic for fixed inputs: rows arrive pre-sorted and floats
//! are printed with a fixed number of decimals.

use serde::Serialize;

use crate::metrics::{EffectivenessRow, TypeRecallRow};
use crate::runner::{SizeBucket, ToolTimeStats};
use crate::taxonomy::CoverageRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

/// One effectiveness row flattened for table output.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsRecord {
    pub tool: String,
    pub benchmark: String,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: Option<u64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub fpr: Option<f64>,
    pub f1: Option<f64>,
    pub b_recall: Option<f64>,
    /// How many unified types the tool supports — printed with every row
    /// because the absolute ratios are not comparable across tools with
    /// different support sets.
    pub supported_types: usize,
}

impl MetricsRecord {
    pub fn new(row: &EffectivenessRow, supported_types: usize) -> Self {
        Self {
            tool: row.support.tool.clone(),
            benchmark: row.support.benchmark.clone(),
            tp: row.support.tp,
            fp: row.support.fp,
            fn_: row.support.fn_,
            tn: row.support.tn,
            precision: row.precision,
            recall: row.recall,
            fpr: row.fpr,
            f1: row.f1,
            b_recall: row.b_recall,
            supported_types,
        }
    }
}

fn fmt_ratio(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

fn fmt_count(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const METRICS_HEADER: &str =
    "tool,benchmark,tp,fp,fn,tn,precision,recall,fpr,f1,b_recall,supported_types";

pub fn metrics_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.tool,
            r.benchmark,
            r.tp,
            r.fp,
            r.fn_,
            fmt_count(r.tn),
            fmt_ratio(r.precision),
            fmt_ratio(r.recall),
            fmt_ratio(r.fpr),
            fmt_ratio(r.f1),
            fmt_ratio(r.b_recall),
            r.supported_types,
        ));
    }
    out
}

pub fn metrics_json(records: &[MetricsRecord]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("serializable records");
    s.push('\n');
    s
}

pub fn metrics_markdown(records: &[MetricsRecord]) -> String {
    let mut out = String::from(
        "| tool | benchmark | tp | fp | fn | tn | precision | recall | fpr | f1 | b_recall | supported |\n\
         |---|---|---|---|---|---|---|---|---|---|---|---|\n",
    );
    let dash = |s: String| if s.is_empty() { "-".to_string() } else { s };
    for r in records {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            r.tool,
            r.benchmark,
            r.tp,
            r.fp,
            r.fn_,
            dash(fmt_count(r.tn)),
            dash(fmt_ratio(r.precision)),
            dash(fmt_ratio(r.recall)),
            dash(fmt_ratio(r.fpr)),
            dash(fmt_ratio(r.f1)),
            dash(fmt_ratio(r.b_recall)),
            r.supported_types,
        ));
    }
    out
}

pub fn coverage_csv(rows: &[CoverageRow]) -> String {
    let mut out =
        String::from("tool,overlapped_count,overlapped_pct,unique_count,out_of_scope_count\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.tool, r.overlapped_count, r.overlapped_pct, r.unique_count, r.out_of_scope_count
        ));
    }
    out
}

pub fn coverage_markdown(rows: &[CoverageRow]) -> String {
    let mut out = String::from(
        "| tool | overlapped | coverage | unique | out of scope |\n|---|---|---|---|---|\n",
    );
    for r in rows {
        out.push_str(&format!(
            "| {} | {} | {}% | {} | {} |\n",
            r.tool, r.overlapped_count, r.overlapped_pct, r.unique_count, r.out_of_scope_count
        ));
    }
    out
}

pub fn per_type_csv(tool: &str, benchmark: &str, rows: &[TypeRecallRow]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.4}\n",
            tool, benchmark, r.unified_type, r.instance_count, r.b_recall
        ));
    }
    out
}

pub const PER_TYPE_HEADER: &str = "tool,benchmark,type,instances,b_recall";

pub fn time_stats_csv(stats: &[ToolTimeStats], buckets: &[SizeBucket]) -> String {
    let mut out = String::from("tool,mean_seconds,failed_count");
    for b in buckets {
        out.push_str(&format!(",mean_{}_{}_mb", b.lo_mb, b.hi_mb));
    }
    out.push('\n');
    for s in stats {
        out.push_str(&format!(
            "{},{},{}",
            s.tool,
            fmt_ratio(s.mean_seconds),
            s.failed_count
        ));
        for m in &s.bucket_means {
            out.push(',');
            out.push_str(&fmt_ratio(*m));
        }
        out.push('\n');
    }
    out
}

pub fn time_stats_markdown(stats: &[ToolTimeStats], buckets: &[SizeBucket]) -> String {
    let mut out = String::from("| tool | mean (s) | failed |");
    for b in buckets {
        out.push_str(&format!(" {}-{} MB |", b.lo_mb, b.hi_mb));
    }
    out.push('\n');
    out.push_str("|---|---|---|");
    out.push_str(&"---|".repeat(buckets.len()));
    out.push('\n');
    let dash = |s: String| if s.is_empty() { "-".to_string() } else { s };
    for s in stats {
        out.push_str(&format!(
            "| {} | {} | {} |",
            s.tool,
            dash(fmt_ratio(s.mean_seconds)),
            s.failed_count
        ));
        for m in &s.bucket_means {
            out.push_str(&format!(" {} |", dash(fmt_ratio(*m))));
        }
        out.push('\n');
    }
    out
}
