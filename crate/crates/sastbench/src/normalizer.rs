//! Report parsing and normalization into the uniform findings format.
//!
//! Each supported tool gets its own parser behind a registry keyed by
//! `parser_id`; parsers are stateless and reentrant. Normalization maps every
//! raw finding through the taxonomy's mapping database; nothing is dropped, so
//! mapping-database gaps stay observable as `UNMAPPED` findings.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy::{map_raw_finding, MapResult, Taxonomy, TaxonomyError};

#[derive(Debug, Error)]
pub enum NormalizerError {
    #[error("unknown parser: {0}")]
    UnknownParser(String),
    #[error("malformed {parser} report: {detail}")]
    MalformedReport { parser: String, detail: String },
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("findings i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad findings line {line}: {detail}")]
    BadFindingsLine { line: usize, detail: String },
}

/// Source location of a finding, relative to the scanned bundle.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub file: String,
    pub line: u32,
}

/// One vulnerability occurrence as reported by a tool, before unification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawFinding {
    pub tool_id: String,
    pub raw_identifier: String,
    pub location: Option<Location>,
    pub message: String,
}

/// Unified type label of a normalized finding.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeLabel {
    Unified(String),
    OutOfScope,
    Unmapped,
}

impl TypeLabel {
    pub fn as_unified(&self) -> Option<&str> {
        match self {
            TypeLabel::Unified(id) => Some(id),
            _ => None,
        }
    }
}

impl From<MapResult> for TypeLabel {
    fn from(r: MapResult) -> Self {
        match r {
            MapResult::Unified(id) => TypeLabel::Unified(id),
            MapResult::OutOfScope => TypeLabel::OutOfScope,
            MapResult::Unmapped => TypeLabel::Unmapped,
        }
    }
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeLabel::Unified(id) => f.write_str(id),
            TypeLabel::OutOfScope => f.write_str("OUT_OF_SCOPE"),
            TypeLabel::Unmapped => f.write_str("UNMAPPED"),
        }
    }
}

impl FromStr for TypeLabel {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "OUT_OF_SCOPE" => TypeLabel::OutOfScope,
            "UNMAPPED" => TypeLabel::Unmapped,
            other => TypeLabel::Unified(other.to_string()),
        })
    }
}

impl Serialize for TypeLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TypeLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(s.parse().expect("infallible"))
    }
}

/// One finding in the uniform format. Field order matches the JSON-lines key
/// order (tool, apk, type, raw, file, line, message).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedFinding {
    pub tool: String,
    pub apk: String,
    #[serde(rename = "type")]
    pub unified_type: TypeLabel,
    pub raw: String,
    pub file: Option<String>,
    pub line: Option<u32>,
    pub message: String,
}

impl NormalizedFinding {
    pub fn location(&self) -> Option<Location> {
        self.file.as_ref().map(|f| Location {
            file: f.clone(),
            line: self.line.unwrap_or(1),
        })
    }
}

/// Ground truth is labeled per (apk, type), so `PerType` is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DedupGranularity {
    #[default]
    PerType,
    PerLocation,
}

/// A report parser for one tool's textual report shape.
pub trait ReportParser: Sync {
    /// Canonical tool id the parser emits findings for.
    fn tool_id(&self) -> &'static str;
    fn parse(&self, text: &str) -> Result<Vec<RawFinding>, NormalizerError>;
}

/// Looks up a parser by id. Parser ids are bound to tools by the adapter
/// configuration file.
pub fn parser_for(parser_id: &str) -> Option<&'static dyn ReportParser> {
    match parser_id {
        "refdetector" => Some(&RefdetectorTsvParser),
        "super" => Some(&SuperTxtParser),
        "ausera" => Some(&AuseraTxtParser),
        "mobsf" => Some(&MobsfTxtParser),
        "androbugs" => Some(&AndrobugsTxtParser),
        _ => None,
    }
}

/// Parses one report into raw findings, in report order. Non-finding lines
/// (banners, progress, comments) are discarded. Input is decoded as UTF-8
/// with lossy replacement.
pub fn parse_report(parser_id: &str, report: &[u8]) -> Result<Vec<RawFinding>, NormalizerError> {
    let parser =
        parser_for(parser_id).ok_or_else(|| NormalizerError::UnknownParser(parser_id.into()))?;
    let text = String::from_utf8_lossy(report);
    parser.parse(&text)
}

/// Maps raw findings onto unified types. `|output| == |input|`; order is
/// preserved; out-of-scope and unmapped findings are retained with their
/// sentinel labels.
pub fn normalize(
    tax: &Taxonomy,
    apk_id: &str,
    raws: &[RawFinding],
) -> Result<Vec<NormalizedFinding>, NormalizerError> {
    debug_assert!(
        raws.windows(2).all(|w| w[0].tool_id == w[1].tool_id),
        "normalize expects findings from a single tool"
    );
    let mut out = Vec::with_capacity(raws.len());
    for raw in raws {
        let mapped = map_raw_finding(tax, &raw.tool_id, &raw.raw_identifier)?;
        out.push(NormalizedFinding {
            tool: raw.tool_id.clone(),
            apk: apk_id.to_string(),
            unified_type: mapped.into(),
            raw: raw.raw_identifier.clone(),
            file: raw.location.as_ref().map(|l| l.file.clone()),
            line: raw.location.as_ref().map(|l| l.line),
            message: raw.message.clone(),
        });
    }
    Ok(out)
}

/// Collapses duplicate findings; first occurrence wins, order is stable, and
/// the operation is idempotent. `PerType` keys on (tool, apk, type) — the
/// granularity ground truth is labeled at — while `PerLocation` additionally
/// keys on the location for developer-facing reports.
pub fn dedupe(
    findings: &[NormalizedFinding],
    granularity: DedupGranularity,
) -> Vec<NormalizedFinding> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for f in findings {
        let loc_key = match granularity {
            DedupGranularity::PerType => None,
            DedupGranularity::PerLocation => Some((f.file.clone(), f.line)),
        };
        let key = (
            f.tool.clone(),
            f.apk.clone(),
            f.unified_type.clone(),
            loc_key,
        );
        if seen.insert(key) {
            out.push(f.clone());
        }
    }
    out
}

/// Writes findings as JSON lines with fixed key order.
pub fn write_findings_jsonl<W: Write>(
    findings: &[NormalizedFinding],
    mut w: W,
) -> Result<(), NormalizerError> {
    for f in findings {
        serde_json::to_writer(&mut w, f).map_err(|e| NormalizerError::Io(e.into()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_findings_jsonl<R: BufRead>(r: R) -> Result<Vec<NormalizedFinding>, NormalizerError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f = serde_json::from_str(&line).map_err(|e| NormalizerError::BadFindingsLine {
            line: i + 1,
            detail: e.to_string(),
        })?;
        out.push(f);
    }
    Ok(out)
}

/// TSV grammar of the built-in detector: `RULE_ID<TAB>FILE<TAB>LINE<TAB>MESSAGE`
/// per record, `#`-prefixed comment lines and blank lines ignored.
struct RefdetectorTsvParser;

impl ReportParser for RefdetectorTsvParser {
    fn tool_id(&self) -> &'static str {
        "refdetector"
    }

    fn parse(&self, text: &str) -> Result<Vec<RawFinding>, NormalizerError> {
        let malformed = |n: usize, detail: String| NormalizerError::MalformedReport {
            parser: "refdetector".into(),
            detail: format!("line {n}: {detail}"),
        };
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(malformed(
                    n,
                    format!("expected 4 tab-separated fields, found {}", fields.len()),
                ));
            }
            let line_no: u32 = fields[2]
                .parse()
                .map_err(|_| malformed(n, format!("bad line number {:?}", fields[2])))?;
            if line_no == 0 || fields[0].is_empty() {
                return Err(malformed(n, "empty rule id or zero line number".into()));
            }
            out.push(RawFinding {
                tool_id: "refdetector".into(),
                raw_identifier: fields[0].to_string(),
                location: Some(Location {
                    file: fields[1].to_string(),
                    line: line_no,
                }),
                message: fields[3].to_string(),
            });
        }
        Ok(out)
    }
}

/// Block grammar for the unified SUPER report: records start with a
/// `Vulnerability:` line and may carry `File:`, `Line:` and `Description:`
/// lines; anything else is banner noise.
struct SuperTxtParser;

impl ReportParser for SuperTxtParser {
    fn tool_id(&self) -> &'static str {
        "SUPER"
    }

    fn parse(&self, text: &str) -> Result<Vec<RawFinding>, NormalizerError> {
        let malformed = |detail: String| NormalizerError::MalformedReport {
            parser: "super".into(),
            detail,
        };
        let mut out: Vec<RawFinding> = Vec::new();
        let mut current: Option<(String, Option<String>, Option<u32>, String)> = None;
        let flush = |cur: &mut Option<(String, Option<String>, Option<u32>, String)>,
                     out: &mut Vec<RawFinding>| {
            if let Some((id, file, line, msg)) = cur.take() {
                out.push(RawFinding {
                    tool_id: "SUPER".into(),
                    raw_identifier: id,
                    location: file.map(|f| Location {
                        file: f,
                        line: line.unwrap_or(1),
                    }),
                    message: msg,
                });
            }
        };
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("Vulnerability:") {
                flush(&mut current, &mut out);
                let id = rest.trim().to_string();
                if id.is_empty() {
                    return Err(malformed("record with empty vulnerability label".into()));
                }
                current = Some((id, None, None, String::new()));
            } else if let Some(rest) = line.strip_prefix("File:") {
                if let Some(cur) = current.as_mut() {
                    cur.1 = Some(rest.trim().to_string());
                }
            } else if let Some(rest) = line.strip_prefix("Line:") {
                if let Some(cur) = current.as_mut() {
                    let n: u32 = rest
                        .trim()
                        .parse()
                        .map_err(|_| malformed(format!("bad line number {:?}", rest.trim())))?;
                    cur.2 = Some(n);
                }
            } else if let Some(rest) = line.strip_prefix("Description:") {
                if let Some(cur) = current.as_mut() {
                    cur.3 = rest.trim().to_string();
                }
            }
            // anything else: banner / separator, skipped
        }
        flush(&mut current, &mut out);
        Ok(out)
    }
}

/// AUSERA line grammar: `[VULN] <identifier> | <file>:<line> | <message>`.
struct AuseraTxtParser;

impl ReportParser for AuseraTxtParser {
    fn tool_id(&self) -> &'static str {
        "AUSERA"
    }

    fn parse(&self, text: &str) -> Result<Vec<RawFinding>, NormalizerError> {
        let re = regex::Regex::new(r"^\[VULN\]\s*(.+?)\s*\|\s*(.+?):(\d+)\s*\|\s*(.*)$").unwrap();
        let mut out = Vec::new();
        for line in text.lines() {
            if let Some(c) = re.captures(line) {
                out.push(RawFinding {
                    tool_id: "AUSERA".into(),
                    raw_identifier: c[1].to_string(),
                    location: c[3].parse().ok().filter(|&n| n >= 1).map(|n| Location {
                        file: c[2].to_string(),
                        line: n,
                    }),
                    message: c[4].to_string(),
                });
            }
        }
        Ok(out)
    }
}

/// MobSF line grammar: `<severity> | <description> | <file>:<line>`; the
/// description doubles as the raw identifier.
struct MobsfTxtParser;

impl ReportParser for MobsfTxtParser {
    fn tool_id(&self) -> &'static str {
        "MobSF"
    }

    fn parse(&self, text: &str) -> Result<Vec<RawFinding>, NormalizerError> {
        let re = regex::Regex::new(
            r"(?i)^(?:high|warning|info|secure)\s*\|\s*(.+?)\s*\|\s*(.+?):(\d+)\s*$",
        )
        .unwrap();
        let mut out = Vec::new();
        for line in text.lines() {
            if let Some(c) = re.captures(line) {
                let line_no: u32 = c[3].parse().unwrap_or(1);
                out.push(RawFinding {
                    tool_id: "MobSF".into(),
                    raw_identifier: c[1].to_string(),
                    location: Some(Location {
                        file: c[2].to_string(),
                        line: line_no.max(1),
                    }),
                    message: c[1].to_string(),
                });
            }
        }
        Ok(out)
    }
}

/// AndroBugs line grammar: `[<severity>] <VECTOR_ID>: <message>`.
struct AndrobugsTxtParser;

impl ReportParser for AndrobugsTxtParser {
    fn tool_id(&self) -> &'static str {
        "AndroBugs"
    }

    fn parse(&self, text: &str) -> Result<Vec<RawFinding>, NormalizerError> {
        let re = regex::Regex::new(r"^\[(Critical|Warning|Notice|Info)\]\s+([A-Z0-9_]+):\s*(.*)$")
            .unwrap();
        let mut out = Vec::new();
        for line in text.lines() {
            if let Some(c) = re.captures(line) {
                out.push(RawFinding {
                    tool_id: "AndroBugs".into(),
                    raw_identifier: c[2].to_string(),
                    location: None,
                    message: c[3].to_string(),
                });
            }
        }
        Ok(out)
    }
}
