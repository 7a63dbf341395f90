//! Ground-truth benchmarks and the sampling procedures used to balance them.
//!
//! Instances are labeled per (apk, unified type, variant); line numbers are
//! not part of the label, since matching happens at type level.
//! All sampling is a pure function of (benchmark, parameters, seed).

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics;
use crate::normalizer::NormalizedFinding;
use crate::taxonomy::Taxonomy;

/// Sample-variance threshold above which a tool's benchmark recall is
/// considered unstable across sampling states (0.1%).
pub const VARIANCE_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("benchmark schema error: {0}")]
    Schema(String),
    #[error("benchmark invariant violated: {0}")]
    Invariant(String),
    #[error("type absent from benchmark: {0}")]
    TypeAbsent(String),
    #[error("variance probe needs at least 2 states, got {0}")]
    InsufficientStates(usize),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Vulnerable,
    Secure,
}

/// One labeled benchmark entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthInstance {
    pub apk: String,
    #[serde(rename = "type")]
    pub unified_type: String,
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_ref: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Benchmark {
    pub benchmark_id: String,
    pub instances: Vec<GroundTruthInstance>,
}

impl Benchmark {
    /// Builds a benchmark, rejecting duplicate (apk, type, variant) triples.
    pub fn new(
        benchmark_id: impl Into<String>,
        instances: Vec<GroundTruthInstance>,
    ) -> Result<Self, BenchError> {
        let mut seen = HashSet::new();
        for i in &instances {
            if !seen.insert((i.apk.clone(), i.unified_type.clone(), i.variant)) {
                return Err(BenchError::Invariant(format!(
                    "duplicate instance ({}, {}, {:?})",
                    i.apk, i.unified_type, i.variant
                )));
            }
        }
        Ok(Self {
            benchmark_id: benchmark_id.into(),
            instances,
        })
    }

    pub fn apks(&self) -> BTreeSet<&str> {
        self.instances.iter().map(|i| i.apk.as_str()).collect()
    }

    pub fn type_set(&self) -> BTreeSet<&str> {
        self.instances
            .iter()
            .map(|i| i.unified_type.as_str())
            .collect()
    }

    pub fn vulnerable(&self) -> impl Iterator<Item = &GroundTruthInstance> {
        self.instances
            .iter()
            .filter(|i| i.variant == Variant::Vulnerable)
    }

    /// True when the benchmark ships secure variants, which is what makes
    /// false positives and true negatives observable.
    pub fn has_secure_variants(&self) -> bool {
        self.instances.iter().any(|i| i.variant == Variant::Secure)
    }

    /// Vulnerable-instance count per type.
    pub fn per_type_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for i in self.vulnerable() {
            *counts.entry(i.unified_type.as_str()).or_insert(0) += 1;
        }
        counts
    }

    /// Checks every instance's type against the taxonomy.
    pub fn validate_types(&self, tax: &Taxonomy) -> Result<(), BenchError> {
        for i in &self.instances {
            if !tax.contains(&i.unified_type) {
                return Err(BenchError::Invariant(format!(
                    "instance ({}, {}) references a type unknown to the taxonomy",
                    i.apk, i.unified_type
                )));
            }
        }
        Ok(())
    }
}

/// Loads a ground-truth file and validates it against the taxonomy.
pub fn load_ground_truth(path: &Path, tax: &Taxonomy) -> Result<Benchmark, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parsed: Benchmark =
        serde_json::from_str(&text).map_err(|e| BenchError::Schema(e.to_string()))?;
    let bench = Benchmark::new(parsed.benchmark_id, parsed.instances)?;
    bench.validate_types(tax)?;
    Ok(bench)
}

/// Keeps at most `cap` seeded-randomly chosen vulnerable instances per type;
/// secure instances pass through untouched. Original instance order is
/// preserved among the kept.
pub fn undersample(b: &Benchmark, cap: usize, seed: u64) -> Benchmark {
    assert!(cap >= 1, "cap must be at least 1");
    let types: Vec<String> = b.type_set().into_iter().map(|t| t.to_string()).collect(); // BTreeSet iteration: already sorted
    sample_types(b, &types, cap, seed)
}

/// Like [`undersample`] but only for the listed types; every other type is
/// untouched. Errors when a listed type has no instances in the benchmark.
pub fn cap_sample(
    b: &Benchmark,
    types: &[String],
    per_type: usize,
    seed: u64,
) -> Result<Benchmark, BenchError> {
    assert!(per_type >= 1, "per_type must be at least 1");
    let present = b.type_set();
    for t in types {
        if !present.contains(t.as_str()) {
            return Err(BenchError::TypeAbsent(t.clone()));
        }
    }
    let mut sorted: Vec<String> = types.to_vec();
    sorted.sort();
    sorted.dedup();
    Ok(sample_types(b, &sorted, per_type, seed))
}

fn sample_types(b: &Benchmark, types: &[String], cap: usize, seed: u64) -> Benchmark {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: Vec<bool> = b
        .instances
        .iter()
        .map(|i| i.variant == Variant::Secure || !types.contains(&i.unified_type))
        .collect();
    for t in types {
        let idx: Vec<usize> = b
            .instances
            .iter()
            .enumerate()
            .filter(|(_, i)| i.variant == Variant::Vulnerable && &i.unified_type == t)
            .map(|(n, _)| n)
            .collect();
        let k = cap.min(idx.len());
        let chosen = rand::seq::index::sample(&mut rng, idx.len(), k);
        for c in chosen.iter() {
            keep[idx[c]] = true;
        }
    }
    Benchmark {
        benchmark_id: b.benchmark_id.clone(),
        instances: b
            .instances
            .iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(i, _)| i.clone())
            .collect(),
    }
}

/// Unbiased sample variance (n-1 denominator). Zero for constant or
/// single-element series.
pub fn sample_variance(series: &[f64]) -> f64 {
    if series.len() < 2 {
        return 0.0;
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// One sampling state of the incremental-variance probe: a benchmark built at
/// some per-type size together with each tool's deduped findings on it.
pub struct BenchmarkState {
    pub benchmark: Benchmark,
    pub findings_by_tool: BTreeMap<String, Vec<NormalizedFinding>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceRow {
    pub b_recalls: Vec<f64>,
    pub variance: f64,
    /// variance < [`VARIANCE_THRESHOLD`]
    pub passes: bool,
}

/// Sample variance of benchmark recall per tool across sampling states.
/// Flags tools whose series varies by 0.1% or more.
pub fn variance_probe(
    states: &[BenchmarkState],
) -> Result<BTreeMap<String, VarianceRow>, BenchError> {
    if states.len() < 2 {
        return Err(BenchError::InsufficientStates(states.len()));
    }
    let tools: BTreeSet<&String> = states
        .iter()
        .flat_map(|s| s.findings_by_tool.keys())
        .collect();
    let mut out = BTreeMap::new();
    for tool in tools {
        let mut series = Vec::with_capacity(states.len());
        for s in states {
            let empty = Vec::new();
            let findings = s.findings_by_tool.get(tool).unwrap_or(&empty);
            series.push(metrics::b_recall(findings, &s.benchmark)?);
        }
        let variance = sample_variance(&series);
        out.insert(
            tool.clone(),
            VarianceRow {
                b_recalls: series,
                variance,
                passes: variance < VARIANCE_THRESHOLD,
            },
        );
    }
    Ok(out)
}
