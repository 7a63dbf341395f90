//! Meta-evaluation harness for Android SAST tools.
//!
//! The crate glues together five pieces that are usually scattered across
//! ad-hoc scripts when comparing security scanners:
//!
//! - [`taxonomy`]: a unified vulnerability taxonomy (67 types in 5 risk
//!   categories) plus the per-tool identifier mapping database that folds
//!   heterogeneous tool vocabularies into it.
//! - [`normalizer`]: per-tool report parsers and the uniform findings format.
//! - [`runner`]: adapter execution with timeouts, wall-clock measurement and
//!   failure classification.
//! - [`refdetector`]: a built-in reference detector over pre-extracted app
//!   bundles (manifest XML + source text), used both as a real adapter and as
//!   a differential-testing subject.
//! - [`bench`] / [`metrics`]: ground-truth benchmarks, seeded sampling, and
//!   effectiveness metrics (precision/recall/FPR/F1 and benchmark recall).
//!
//! The `sastbench` binary exposes the same pipeline as subcommands; the
//! `examples/` directory shows one runnable program per capability.

pub mod bench;
pub mod cli;
pub mod metrics;
pub mod normalizer;
pub mod refdetector;
pub mod runner;
pub mod tables;
pub mod taxonomy;

pub use bench::Benchmark;
pub use normalizer::{NormalizedFinding, RawFinding};
pub use runner::{AdapterConfig, ScanMatrix, ScanOutcome};
pub use taxonomy::Taxonomy;
