//! Unified vulnerability taxonomy and the per-tool identifier mapping database.
//!
//! The taxonomy is a fixed table of 67 vulnerability types grouped into 5 risk
//! categories, each type annotated with the set of tools that support it
//! (every type is supported by at least two tools; tool-only types are kept as
//! side metadata so the 67-row table stays canonical). The mapping database
//! resolves each tool's raw identifiers or description lines to unified type
//! ids and is replaceable data, not code.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sentinel target for mapping entries that resolve to a non-vulnerability
/// alert (code quality, compatibility, ...).
pub const OUT_OF_SCOPE_TARGET: &str = "OUT_OF_SCOPE";

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("taxonomy schema error: {0}")]
    Schema(String),
    #[error("taxonomy invariant violated: {0}")]
    Invariant(String),
    #[error("unknown tool: {0}")]
    UnknownTool(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Category {
    pub code: String,
    pub name: String,
}

/// One row of the unified type table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnifiedType {
    pub id: String,
    pub name: String,
    pub category: String,
    pub tools: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Exact,
    Regex,
}

/// One entry of the mapping database: a raw identifier (or description
/// pattern) emitted by `tool` resolves to `target`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MappingEntry {
    pub tool: String,
    pub kind: MatchKind,
    pub pattern: String,
    /// Unified type id, or [`OUT_OF_SCOPE_TARGET`].
    pub target: String,
}

/// Tool-only type descriptors. These never join the unified table (they are
/// supported by a single tool), but their counts feed the coverage report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniqueTypes {
    pub tool: String,
    pub count: usize,
    pub names: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct TaxonomyFile {
    version: String,
    categories: Vec<Category>,
    types: Vec<UnifiedType>,
    unique: Vec<UniqueTypes>,
    mappings: Vec<MappingEntry>,
}

/// Immutable after load; shareable across threads.
#[derive(Debug)]
pub struct Taxonomy {
    version: String,
    categories: Vec<Category>,
    types: Vec<UnifiedType>,
    unique: Vec<UniqueTypes>,
    mappings: Vec<MappingEntry>,
    compiled: Vec<Option<Regex>>,
    by_id: BTreeMap<String, usize>,
    unique_names: BTreeSet<String>,
    mapped_tools: BTreeSet<String>,
}

/// Result of resolving one raw identifier through the mapping database.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapResult {
    Unified(String),
    OutOfScope,
    Unmapped,
}

/// Per-tool coverage row derived from the support matrix and metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageRow {
    pub tool: String,
    pub overlapped_count: usize,
    /// overlapped_count / |types|, rounded half-up to a whole percent.
    pub overlapped_pct: u32,
    pub unique_count: usize,
    pub out_of_scope_count: usize,
}

/// Partition of a type set by tool support.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SupportPartition {
    /// Supported by two or more tools.
    pub overlapped: BTreeSet<String>,
    /// Supported by exactly one tool.
    pub unique: BTreeSet<String>,
    /// Supported by no tool.
    pub unsupported: BTreeSet<String>,
}

/// Loads and validates a taxonomy file. Pure: no global state is touched.
pub fn load_taxonomy(path: &Path) -> Result<Taxonomy, TaxonomyError> {
    let text = std::fs::read_to_string(path).map_err(|source| TaxonomyError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: TaxonomyFile =
        serde_json::from_str(&text).map_err(|e| TaxonomyError::Schema(e.to_string()))?;
    Taxonomy::new(
        file.version,
        file.categories,
        file.types,
        file.unique,
        file.mappings,
    )
}

impl Taxonomy {
    /// Builds a taxonomy from parts, enforcing every structural invariant.
    ///
    /// Per-row checks run before the global cardinality checks so that an
    /// offending type is named even in a truncated file.
    pub fn new(
        version: String,
        categories: Vec<Category>,
        types: Vec<UnifiedType>,
        unique: Vec<UniqueTypes>,
        mappings: Vec<MappingEntry>,
    ) -> Result<Self, TaxonomyError> {
        let mut cat_codes = BTreeSet::new();
        for c in &categories {
            if !cat_codes.insert(c.code.clone()) {
                return Err(TaxonomyError::Invariant(format!(
                    "duplicate category code {}",
                    c.code
                )));
            }
        }

        let mut by_id = BTreeMap::new();
        let mut names = BTreeSet::new();
        for (i, t) in types.iter().enumerate() {
            if by_id.insert(t.id.clone(), i).is_some() {
                return Err(TaxonomyError::Invariant(format!(
                    "duplicate type id {}",
                    t.id
                )));
            }
            if !names.insert(t.name.clone()) {
                return Err(TaxonomyError::Invariant(format!(
                    "duplicate type name {:?}",
                    t.name
                )));
            }
            if !cat_codes.contains(&t.category) {
                return Err(TaxonomyError::Invariant(format!(
                    "type {} references undeclared category {}",
                    t.id, t.category
                )));
            }
            if t.tools.len() < 2 {
                return Err(TaxonomyError::Invariant(format!(
                    "type {} is supported by {} tool(s); the inclusion rule requires at least 2",
                    t.id,
                    t.tools.len()
                )));
            }
        }

        for u in &unique {
            if u.count != u.names.len() {
                return Err(TaxonomyError::Invariant(format!(
                    "unique-type record for {} declares count {} but lists {} names",
                    u.tool,
                    u.count,
                    u.names.len()
                )));
            }
        }

        let mut compiled = Vec::with_capacity(mappings.len());
        let mut seen_patterns = BTreeSet::new();
        let mut mapped_tools = BTreeSet::new();
        for m in &mappings {
            if m.target != OUT_OF_SCOPE_TARGET && !by_id.contains_key(&m.target) {
                return Err(TaxonomyError::Invariant(format!(
                    "mapping ({}, {:?}) targets unknown type {}",
                    m.tool, m.pattern, m.target
                )));
            }
            if !seen_patterns.insert((m.tool.clone(), m.kind, m.pattern.clone())) {
                return Err(TaxonomyError::Invariant(format!(
                    "ambiguous mapping: tool {} declares pattern {:?} twice",
                    m.tool, m.pattern
                )));
            }
            mapped_tools.insert(m.tool.clone());
            compiled.push(match m.kind {
                MatchKind::Exact => None,
                MatchKind::Regex => Some(Regex::new(&m.pattern).map_err(|e| {
                    TaxonomyError::Invariant(format!(
                        "mapping pattern {:?} for {} does not compile: {e}",
                        m.pattern, m.tool
                    ))
                })?),
            });
        }

        if types.len() != 67 {
            return Err(TaxonomyError::Invariant(format!(
                "expected 67 unified types, found {}",
                types.len()
            )));
        }
        let used: BTreeSet<&str> = types.iter().map(|t| t.category.as_str()).collect();
        if used.len() != 5 {
            return Err(TaxonomyError::Invariant(format!(
                "expected 5 categories in use, found {}",
                used.len()
            )));
        }

        let unique_names = unique
            .iter()
            .flat_map(|u| u.names.iter().cloned())
            .collect();

        Ok(Self {
            version,
            categories,
            types,
            unique,
            mappings,
            compiled,
            by_id,
            unique_names,
            mapped_tools,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn types(&self) -> &[UnifiedType] {
        &self.types
    }

    pub fn unique_types(&self) -> &[UniqueTypes] {
        &self.unique
    }

    pub fn mappings(&self) -> &[MappingEntry] {
        &self.mappings
    }

    pub fn get(&self, id: &str) -> Option<&UnifiedType> {
        self.by_id.get(id).map(|&i| &self.types[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    /// All tool ids appearing in the support matrix or unique metadata, in
    /// the order of the unique records (the canonical tool order of the data
    /// file), followed by any stragglers alphabetically.
    pub fn tools(&self) -> Vec<String> {
        let mut out: Vec<String> = self.unique.iter().map(|u| u.tool.clone()).collect();
        let seen: BTreeSet<String> = out.iter().cloned().collect();
        let mut extra: Vec<String> = self
            .types
            .iter()
            .flat_map(|t| t.tools.iter())
            .filter(|t| !seen.contains(t.as_str()))
            .cloned()
            .collect();
        extra.sort_unstable();
        extra.dedup();
        out.extend(extra);
        out
    }

    /// Unified type ids a tool supports according to the support matrix.
    /// Tools absent from the matrix (e.g. the built-in detector) fall back to
    /// the unified targets of their mapping entries.
    pub fn supported_types(&self, tool: &str) -> BTreeSet<String> {
        let from_matrix: BTreeSet<String> = self
            .types
            .iter()
            .filter(|t| t.tools.contains(tool))
            .map(|t| t.id.clone())
            .collect();
        if !from_matrix.is_empty() {
            return from_matrix;
        }
        self.mappings
            .iter()
            .filter(|m| m.tool == tool && m.target != OUT_OF_SCOPE_TARGET)
            .map(|m| m.target.clone())
            .collect()
    }

    /// True when the mapping database has at least one entry for `tool`.
    pub fn knows_tool(&self, tool: &str) -> bool {
        self.mapped_tools.contains(tool)
    }
}

/// Resolves a raw identifier to a unified type.
///
/// Precedence when several entries match: exact beats regex, then the longer
/// pattern wins; remaining ties fall back to pattern order so the result is a
/// function of the inputs. A raw identifier nothing matches is `Unmapped`,
/// never an error.
pub fn map_raw_finding(
    tax: &Taxonomy,
    tool_id: &str,
    raw: &str,
) -> Result<MapResult, TaxonomyError> {
    if !tax.knows_tool(tool_id) {
        return Err(TaxonomyError::UnknownTool(tool_id.to_string()));
    }
    let mut best: Option<(&MappingEntry, usize)> = None;
    for (i, m) in tax.mappings.iter().enumerate() {
        if m.tool != tool_id {
            continue;
        }
        let hit = match m.kind {
            MatchKind::Exact => m.pattern == raw,
            MatchKind::Regex => tax.compiled[i]
                .as_ref()
                .expect("regex entries are compiled at load")
                .is_match(raw),
        };
        if !hit {
            continue;
        }
        let better = match best {
            None => true,
            Some((b, _)) => {
                let rank = |e: &MappingEntry| (matches!(e.kind, MatchKind::Exact), e.pattern.len());
                rank(m) > rank(b)
            }
        };
        if better {
            best = Some((m, i));
        }
    }
    Ok(match best {
        Some((m, _)) if m.target == OUT_OF_SCOPE_TARGET => MapResult::OutOfScope,
        Some((m, _)) => MapResult::Unified(m.target.clone()),
        None => MapResult::Unmapped,
    })
}

/// Per-tool coverage of the unified table, one row per tool.
pub fn coverage_report(tax: &Taxonomy) -> Vec<CoverageRow> {
    let total = tax.types.len();
    tax.tools()
        .into_iter()
        .map(|tool| {
            let overlapped_count = tax.types.iter().filter(|t| t.tools.contains(&tool)).count();
            let unique_count = tax
                .unique
                .iter()
                .find(|u| u.tool == tool)
                .map(|u| u.count)
                .unwrap_or(0);
            let out_of_scope_count = tax
                .mappings
                .iter()
                .filter(|m| m.tool == tool && m.target == OUT_OF_SCOPE_TARGET)
                .count();
            CoverageRow {
                tool,
                overlapped_pct: round_pct(overlapped_count, total),
                overlapped_count,
                unique_count,
                out_of_scope_count,
            }
        })
        .collect()
}

fn round_pct(count: usize, total: usize) -> u32 {
    if total == 0 {
        return 0;
    }
    (count as f64 * 100.0 / total as f64 + 0.5).floor() as u32
}

/// Partitions `type_set` into overlapped / unique / unsupported.
///
/// Ids in the unified table are classified by their support-set size; ids
/// matching a tool-only type descriptor are `unique`; everything else
/// (benchmark-only types) is `unsupported`.
pub fn support_groups<'a, I>(tax: &Taxonomy, type_set: I) -> SupportPartition
where
    I: IntoIterator<Item = &'a str>,
{
    let mut part = SupportPartition::default();
    for id in type_set {
        match tax.get(id) {
            Some(t) if t.tools.len() >= 2 => {
                part.overlapped.insert(id.to_string());
            }
            Some(t) if t.tools.len() == 1 => {
                part.unique.insert(id.to_string());
            }
            Some(_) => {
                part.unsupported.insert(id.to_string());
            }
            None if tax.unique_names.contains(id) => {
                part.unique.insert(id.to_string());
            }
            None => {
                part.unsupported.insert(id.to_string());
            }
        }
    }
    part
}

impl fmt::Display for MapResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapResult::Unified(id) => f.write_str(id),
            MapResult::OutOfScope => f.write_str("OUT_OF_SCOPE"),
            MapResult::Unmapped => f.write_str("UNMAPPED"),
        }
    }
}
