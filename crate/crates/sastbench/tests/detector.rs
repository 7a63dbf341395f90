//! End-to-end checks of the reference detector over the fixture bundles:
//! seeded defects are found, clean code stays clean, scans are deterministic,
//! and constant resolution / precondition gating behave as specified.

use std::collections::BTreeSet;
use std::path::Path;

use sastbench::normalizer::{self, TypeLabel};
use sastbench::refdetector::{
    parse_manifest, scan_app, scan_findings, AppBundle, Rulepack, SqlMode,
};
use sastbench::taxonomy;

fn fixture(rel: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn rulepack() -> Rulepack {
    Rulepack::load(&fixture("data/rulepack.json")).unwrap()
}

fn bundle(name: &str) -> AppBundle {
    AppBundle::load(&fixture(&format!("fixtures/bundles/{name}"))).unwrap()
}

fn rule_ids(bundle_name: &str) -> BTreeSet<String> {
    scan_findings(&bundle(bundle_name), &rulepack(), SqlMode::SinkReach)
        .unwrap()
        .into_iter()
        .map(|f| f.raw_identifier)
        .collect()
}

#[test]
fn rulepack_validates_against_shipped_taxonomy() {
    let tax = taxonomy::load_taxonomy(&fixture("data/taxonomy.json")).unwrap();
    rulepack().validate(&tax).unwrap();
    assert_eq!(rulepack().rules.len(), 12);
}

#[test]
fn alpha_bundle_trips_all_seeded_rules() {
    let expected: BTreeSet<String> = [
        "MANIFEST_ALLOW_BACKUP",
        "MANIFEST_DEBUGGABLE",
        "EXPORTED_COMPONENT_UNPROTECTED",
        "LOG_DATA_EXPOSURE",
        "WORLD_WRITABLE_FILE_MODE",
        "AES_DEFAULT_ECB_MODE",
        "WEBVIEW_JS_ENABLED",
        "WEBVIEW_FILE_ACCESS_LOW_SDK",
        "PLAIN_HTTP_URL",
        "EMPTY_TRUST_MANAGER_CHECK",
        "SQL_CONCAT_INJECTION",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    assert_eq!(rule_ids("alpha_vuln"), expected);
}

#[test]
fn beta_bundle_gates_file_access_off_at_sdk_21() {
    let expected: BTreeSet<String> = [
        "MANIFEST_ALLOW_BACKUP",
        "LOG_DATA_EXPOSURE",
        "WORLD_READABLE_FILE_MODE",
        "SQL_CONCAT_INJECTION",
        "AES_DEFAULT_ECB_MODE",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    let ids = rule_ids("beta_vuln");
    assert!(!ids.contains("WEBVIEW_FILE_ACCESS_LOW_SDK"));
    assert_eq!(ids, expected);
}

#[test]
fn gamma_bundle_report_has_exactly_three_records() {
    let report = scan_app(&bundle("gamma_min"), &rulepack()).unwrap();
    let records: Vec<&str> = report
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .collect();
    assert_eq!(records.len(), 3, "report:\n{report}");
}

#[test]
fn clean_bundle_produces_an_empty_report() {
    let report = scan_app(&bundle("delta_clean"), &rulepack()).unwrap();
    let records: Vec<&str> = report
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .collect();
    assert!(records.is_empty(), "unexpected findings:\n{report}");
}

#[test]
fn scans_are_byte_deterministic() {
    for name in ["alpha_vuln", "beta_vuln", "gamma_min", "delta_clean"] {
        let a = scan_app(&bundle(name), &rulepack()).unwrap();
        let b = scan_app(&bundle(name), &rulepack()).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn malformed_manifest_fails_the_scan() {
    let b = AppBundle::from_parts(
        "broken",
        "<manifest><application></manifest>",
        Default::default(),
    );
    assert!(scan_app(&b, &rulepack()).is_err());
}

#[test]
fn symbolic_and_literal_constants_yield_the_same_findings() {
    let manifest = &bundle("alpha_vuln").manifest_xml.clone();
    let symbolic = r#"
class S {
    void w(Context ctx, String f) throws Exception {
        ctx.openFileOutput(f, Context.MODE_WORLD_WRITEABLE);
        ctx.openFileOutput(f, MODE_WORLD_READABLE);
    }
}
"#;
    let literal = r#"
class S {
    void w(Context ctx, String f) throws Exception {
        ctx.openFileOutput(f, 2);
        ctx.openFileOutput(f, 1);
    }
}
"#;
    let mk = |src: &str| {
        let mut sources = std::collections::BTreeMap::new();
        sources.insert("src/S.java".to_string(), src.to_string());
        AppBundle::from_parts("equiv", manifest.clone(), sources)
    };
    let ids = |b: &AppBundle| -> Vec<(String, u32)> {
        scan_findings(b, &rulepack(), SqlMode::SinkReach)
            .unwrap()
            .into_iter()
            .filter(|f| f.raw_identifier.starts_with("WORLD_"))
            .map(|f| (f.raw_identifier, f.location.unwrap().line))
            .collect()
    };
    assert_eq!(ids(&mk(symbolic)), ids(&mk(literal)));
}

#[test]
fn flipping_the_precondition_removes_exactly_that_rules_findings() {
    let below = bundle("alpha_vuln");
    let mut manifest_hi = below.manifest_xml.replace(
        r#"android:minSdkVersion="16""#,
        r#"android:minSdkVersion="17""#,
    );
    assert_ne!(manifest_hi, below.manifest_xml);
    let above = AppBundle::from_parts(
        "alpha_hi",
        std::mem::take(&mut manifest_hi),
        below.sources.clone(),
    );

    let ids = |b: &AppBundle| -> Vec<String> {
        scan_findings(b, &rulepack(), SqlMode::SinkReach)
            .unwrap()
            .into_iter()
            .map(|f| f.raw_identifier)
            .collect()
    };
    let with_gate: Vec<String> = ids(&below)
        .into_iter()
        .filter(|r| r != "WEBVIEW_FILE_ACCESS_LOW_SDK")
        .collect();
    assert_eq!(ids(&above), with_gate);
}

#[test]
fn taint_mode_strictly_exceeds_regex_mode_on_the_concat_fixture() {
    let b = bundle("alpha_vuln");
    let pack = rulepack();
    let sqli = |mode| -> Vec<(String, u32)> {
        scan_findings(&b, &pack, mode)
            .unwrap()
            .into_iter()
            .filter(|f| f.raw_identifier == "SQL_CONCAT_INJECTION")
            .map(|f| {
                (
                    f.location.as_ref().unwrap().file.clone(),
                    f.location.unwrap().line,
                )
            })
            .collect()
    };
    let taint = sqli(SqlMode::SinkReach);
    let regex = sqli(SqlMode::RegexOnly);
    assert_eq!(taint.len(), 1);
    assert!(regex.is_empty());
}

#[test]
fn every_detector_finding_maps_to_a_unified_type() {
    let tax = taxonomy::load_taxonomy(&fixture("data/taxonomy.json")).unwrap();
    for name in ["alpha_vuln", "beta_vuln", "gamma_min", "delta_clean"] {
        let raws = scan_findings(&bundle(name), &rulepack(), SqlMode::SinkReach).unwrap();
        let normalized = normalizer::normalize(&tax, name, &raws).unwrap();
        for f in normalized {
            assert!(
                matches!(f.unified_type, TypeLabel::Unified(_)),
                "{name}: {} is not mapped",
                f.raw
            );
        }
    }
}

#[test]
fn marvin_style_raw_lookup_differs_from_local_lookup() {
    let doc = parse_manifest(&bundle("alpha_vuln").manifest_xml).unwrap();
    let app = doc.application().unwrap();
    assert_eq!(app.attr_local("allowBackup"), Some("true"));
    assert_eq!(app.attr_raw("android:allowBackup"), None);
}
