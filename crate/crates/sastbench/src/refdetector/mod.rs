//! Built-in reference detector over pre-extracted app bundles.
//!
//! A bundle is a directory with `manifest.xml` and a `src/` tree of source
//! text (mimicking decompiler output). Rules are data: each binds a matcher
//! (line regex, api-argument check with constant resolution, empty-method
//! probe, or a manifest query) to a unified type, optionally gated by a
//! precondition such as a minimum-SDK bound, optionally backed by the
//! concatenation-taint analysis. Scanning is pure and deterministic: the same
//! bundle and rulepack always produce a byte-identical report.

pub mod manifest;
pub mod source;
pub mod taint;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalizer::{Location, RawFinding};
use crate::taxonomy::Taxonomy;
pub use manifest::{parse_manifest, Element, ManifestDoc};
pub use source::SourceHit;

/// Tool id the detector reports under; also its parser id.
pub const TOOL_ID: &str = "refdetector";

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error("xml error: {0}")]
    Xml(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("rulepack error: {0}")]
    Rulepack(String),
}

/// Pre-extracted application bundle.
#[derive(Debug, Clone)]
pub struct AppBundle {
    pub apk_id: String,
    pub manifest_xml: String,
    /// Relative source path -> source text; sorted for deterministic scans.
    pub sources: BTreeMap<String, String>,
    /// minSdkVersion parsed from the manifest, when the manifest parses and
    /// declares one.
    pub declared_min_sdk: Option<u32>,
}

impl AppBundle {
    pub fn from_parts(
        apk_id: impl Into<String>,
        manifest_xml: impl Into<String>,
        sources: BTreeMap<String, String>,
    ) -> Self {
        let manifest_xml = manifest_xml.into();
        let declared_min_sdk = parse_manifest(&manifest_xml).ok().and_then(|d| d.min_sdk());
        Self {
            apk_id: apk_id.into(),
            manifest_xml,
            sources,
            declared_min_sdk,
        }
    }

    /// Loads `<dir>/manifest.xml` plus every file under `<dir>/src/`.
    pub fn load(dir: &Path) -> Result<Self, DetectorError> {
        let apk_id = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "bundle".to_string());
        let manifest_path = dir.join("manifest.xml");
        let manifest_xml =
            std::fs::read_to_string(&manifest_path).map_err(|source| DetectorError::Io {
                path: manifest_path.clone(),
                source,
            })?;
        let mut sources = BTreeMap::new();
        let src_root = dir.join("src");
        if src_root.is_dir() {
            let mut stack = vec![src_root.clone()];
            while let Some(d) = stack.pop() {
                let entries = std::fs::read_dir(&d).map_err(|source| DetectorError::Io {
                    path: d.clone(),
                    source,
                })?;
                for entry in entries {
                    let entry = entry.map_err(|source| DetectorError::Io {
                        path: d.clone(),
                        source,
                    })?;
                    let path = entry.path();
                    if path.is_dir() {
                        stack.push(path);
                    } else {
                        let rel = path
                            .strip_prefix(dir)
                            .expect("entry lives under the bundle dir")
                            .to_string_lossy()
                            .replace('\\', "/");
                        let text =
                            std::fs::read_to_string(&path).map_err(|source| DetectorError::Io {
                                path: path.clone(),
                                source,
                            })?;
                        sources.insert(rel, text);
                    }
                }
            }
        }
        Ok(Self::from_parts(apk_id, manifest_xml, sources))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleTarget {
    Manifest,
    Source,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Matcher {
    /// Per-line regex over source text.
    Regex { pattern: String },
    /// Call to `api` whose argument at `arg_index` equals one of
    /// `arg_values` (verbatim or as the last segment of a qualified name).
    ApiArg {
        api: String,
        arg_index: usize,
        arg_values: Vec<String>,
    },
    /// Declaration of `method` with an empty body, any modifiers.
    EmptyMethodBody { method: String },
    /// `element` carries `attribute` equal to `equals` (local-name lookup).
    ManifestAttr {
        element: String,
        attribute: String,
        equals: String,
    },
    /// Explicitly exported components, or implicitly exported ones
    /// (intent-filter present, no exported attribute) lacking a permission.
    ExportedComponents,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Precondition {
    /// Holds when the declared minSdkVersion is below `value`. An undeclared
    /// minSdkVersion counts as below (the platform default is API 1).
    MinSdkBelow { value: u32 },
}

impl Precondition {
    pub fn holds(&self, bundle: &AppBundle) -> bool {
        match self {
            Precondition::MinSdkBelow { value } => {
                bundle.declared_min_sdk.is_none_or(|sdk| sdk < *value)
            }
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Analysis {
    #[default]
    None,
    ConcatTaint {
        sinks: Vec<String>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rule {
    pub rule_id: String,
    pub unified_type: String,
    pub target: RuleTarget,
    pub matcher: Matcher,
    #[serde(default)]
    pub preconditions: Vec<Precondition>,
    #[serde(default)]
    pub analysis: Analysis,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Rulepack {
    pub rules: Vec<Rule>,
}

/// When a rule carries a taint analysis, `SinkReach` runs it; `RegexOnly`
/// falls back to the rule's line regex instead. Rules without a taint
/// analysis behave identically in both modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SqlMode {
    #[default]
    SinkReach,
    RegexOnly,
}

impl Rulepack {
    pub fn load(path: &Path) -> Result<Self, DetectorError> {
        let text = std::fs::read_to_string(path).map_err(|source| DetectorError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let rules: Vec<Rule> =
            serde_json::from_str(&text).map_err(|e| DetectorError::Rulepack(e.to_string()))?;
        let pack = Self { rules };
        pack.check_well_formed()?;
        Ok(pack)
    }

    /// Structural checks that need no taxonomy: unique ids, compilable
    /// regexes, matcher/target agreement.
    pub fn check_well_formed(&self) -> Result<(), DetectorError> {
        let mut ids = std::collections::BTreeSet::new();
        for r in &self.rules {
            if !ids.insert(&r.rule_id) {
                return Err(DetectorError::Rulepack(format!(
                    "duplicate rule id {}",
                    r.rule_id
                )));
            }
            if let Matcher::Regex { pattern } = &r.matcher {
                Regex::new(pattern).map_err(|e| {
                    DetectorError::Rulepack(format!("rule {}: bad regex: {e}", r.rule_id))
                })?;
            }
            let manifest_matcher = matches!(
                r.matcher,
                Matcher::ManifestAttr { .. } | Matcher::ExportedComponents
            );
            if manifest_matcher != matches!(r.target, RuleTarget::Manifest) {
                return Err(DetectorError::Rulepack(format!(
                    "rule {}: matcher and target disagree",
                    r.rule_id
                )));
            }
            if let Analysis::ConcatTaint { sinks } = &r.analysis {
                if sinks.is_empty() {
                    return Err(DetectorError::Rulepack(format!(
                        "rule {}: taint analysis without sinks",
                        r.rule_id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Additionally checks every rule's unified type against the taxonomy.
    pub fn validate(&self, tax: &Taxonomy) -> Result<(), DetectorError> {
        self.check_well_formed()?;
        for r in &self.rules {
            if !tax.contains(&r.unified_type) {
                return Err(DetectorError::Rulepack(format!(
                    "rule {} targets unknown unified type {}",
                    r.rule_id, r.unified_type
                )));
            }
        }
        Ok(())
    }
}

fn finding(rule: &Rule, file: &str, line: u32, detail: Option<&str>) -> RawFinding {
    let message = match detail {
        Some(d) => format!("{} ({d})", rule.message),
        None => rule.message.clone(),
    };
    RawFinding {
        tool_id: TOOL_ID.to_string(),
        raw_identifier: rule.rule_id.clone(),
        location: Some(Location {
            file: file.to_string(),
            line,
        }),
        message,
    }
}

/// Evaluates manifest-targeted rules over a parsed manifest.
pub fn eval_manifest_rules(
    doc: &ManifestDoc,
    bundle: &AppBundle,
    rules: &[&Rule],
) -> Vec<RawFinding> {
    let mut out = Vec::new();
    for rule in rules {
        if !rule.preconditions.iter().all(|p| p.holds(bundle)) {
            continue;
        }
        match &rule.matcher {
            Matcher::ManifestAttr {
                element,
                attribute,
                equals,
            } => {
                let mut elems = Vec::new();
                if doc.root.tag == *element {
                    elems.push(&doc.root);
                }
                doc.root.find_all(element, &mut elems);
                for e in elems {
                    if e.attr_local(attribute) == Some(equals.as_str()) {
                        out.push(finding(rule, "manifest.xml", e.line, None));
                    }
                }
            }
            Matcher::ExportedComponents => {
                for c in doc.components() {
                    let exported = c.attr_local("exported");
                    let has_filter = c.children_named("intent-filter").next().is_some();
                    let protected = c.attr_local("permission").is_some();
                    let explicit = exported == Some("true");
                    let implicit = exported.is_none() && has_filter && !protected;
                    if explicit || implicit {
                        let name = c.attr_local("name").unwrap_or("?");
                        out.push(finding(
                            rule,
                            "manifest.xml",
                            c.line,
                            Some(&format!("{} {}", c.tag, name)),
                        ));
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// Evaluates source-targeted rules (excluding taint-backed ones) over every
/// source file of the bundle.
pub fn eval_source_rules(bundle: &AppBundle, rules: &[&Rule]) -> Vec<RawFinding> {
    let mut out = Vec::new();
    for rule in rules {
        if !rule.preconditions.iter().all(|p| p.holds(bundle)) {
            continue;
        }
        for (path, text) in &bundle.sources {
            let hits = match &rule.matcher {
                Matcher::Regex { pattern } => {
                    let re = Regex::new(pattern).expect("validated at load");
                    source::regex_hits(text, &re)
                }
                Matcher::ApiArg {
                    api,
                    arg_index,
                    arg_values,
                } => source::api_arg_hits(text, api, *arg_index, arg_values),
                Matcher::EmptyMethodBody { method } => source::empty_method_body_hits(text, method),
                _ => Vec::new(),
            };
            out.extend(hits.into_iter().map(|h| finding(rule, path, h.line, None)));
        }
    }
    out
}

/// Runs every rule of the pack over the bundle and collects raw findings.
pub fn scan_findings(
    bundle: &AppBundle,
    pack: &Rulepack,
    mode: SqlMode,
) -> Result<Vec<RawFinding>, DetectorError> {
    let doc = parse_manifest(&bundle.manifest_xml)?;

    let manifest_rules: Vec<&Rule> = pack
        .rules
        .iter()
        .filter(|r| matches!(r.target, RuleTarget::Manifest))
        .collect();
    let plain_source_rules: Vec<&Rule> = pack
        .rules
        .iter()
        .filter(|r| matches!(r.target, RuleTarget::Source) && matches!(r.analysis, Analysis::None))
        .collect();
    let taint_rules: Vec<&Rule> = pack
        .rules
        .iter()
        .filter(|r| {
            matches!(r.target, RuleTarget::Source)
                && matches!(r.analysis, Analysis::ConcatTaint { .. })
        })
        .collect();

    let mut findings = eval_manifest_rules(&doc, bundle, &manifest_rules);
    findings.extend(eval_source_rules(bundle, &plain_source_rules));

    for rule in taint_rules {
        if !rule.preconditions.iter().all(|p| p.holds(bundle)) {
            continue;
        }
        let Analysis::ConcatTaint { sinks } = &rule.analysis else {
            unreachable!("filtered above");
        };
        for (path, text) in &bundle.sources {
            let hits = match mode {
                SqlMode::SinkReach => taint::concat_taint(text, sinks),
                SqlMode::RegexOnly => match &rule.matcher {
                    Matcher::Regex { pattern } => {
                        let re = Regex::new(pattern).expect("validated at load");
                        taint::regex_only(text, &re)
                    }
                    _ => Vec::new(),
                },
            };
            out_extend_taint(&mut findings, rule, path, hits);
        }
    }

    findings.sort_by(|a, b| {
        let ka = (
            a.location.as_ref().map(|l| (l.file.clone(), l.line)),
            &a.raw_identifier,
        );
        let kb = (
            b.location.as_ref().map(|l| (l.file.clone(), l.line)),
            &b.raw_identifier,
        );
        ka.cmp(&kb)
    });
    Ok(findings)
}

fn out_extend_taint(out: &mut Vec<RawFinding>, rule: &Rule, path: &str, hits: Vec<SourceHit>) {
    out.extend(hits.into_iter().map(|h| finding(rule, path, h.line, None)));
}

/// Scans a bundle and renders the normalized TSV report: one
/// `RULE_ID<TAB>FILE<TAB>LINE<TAB>MESSAGE` record per finding, sorted by
/// (file, line, rule id), preceded by `#` comment lines.
pub fn scan_app(bundle: &AppBundle, pack: &Rulepack) -> Result<String, DetectorError> {
    let findings = scan_findings(bundle, pack, SqlMode::SinkReach)?;
    let mut report = String::new();
    writeln!(report, "# refdetector report").unwrap();
    writeln!(report, "# bundle: {}", bundle.apk_id).unwrap();
    for f in &findings {
        let loc = f
            .location
            .as_ref()
            .expect("detector findings carry locations");
        writeln!(
            report,
            "{}\t{}\t{}\t{}",
            f.raw_identifier,
            loc.file,
            loc.line,
            f.message.replace(['\t', '\n'], " ")
        )
        .unwrap();
    }
    Ok(report)
}

/// Path of the rulepack shipped with the crate.
pub fn shipped_rulepack_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join("rulepack.json")
}
