//! Manifest parsing with namespace-stripped attribute storage.
//!
//! Attributes are stored under their local names ("allowBackup"), which is
//! what decompilers and most tool pipelines effectively see. Two lookup modes
//! are exposed on purpose: [`Element::attr_local`] strips any prefix from the
//! query before the lookup, while [`Element::attr_raw`] looks the query up
//! verbatim — so `attr_raw("android:allowBackup")` misses against stripped
//! storage. The second mode exists to reproduce a real extraction bug class
//! in differential tests.

use std::collections::BTreeMap;

use super::DetectorError;

#[derive(Debug, Clone)]
pub struct Element {
    pub tag: String,
    pub attrs: BTreeMap<String, String>,
    pub children: Vec<Element>,
    /// 1-based line of the element's start tag in the source text.
    pub line: u32,
}

#[derive(Debug, Clone)]
pub struct ManifestDoc {
    pub root: Element,
}

impl Element {
    /// Attribute lookup by local name; a namespace prefix in the query is
    /// stripped first, so both "allowBackup" and "android:allowBackup"
    /// resolve.
    pub fn attr_local(&self, name: &str) -> Option<&str> {
        let local = name.rsplit(':').next().unwrap_or(name);
        self.attrs.get(local).map(String::as_str)
    }

    /// Verbatim key lookup against the stripped storage. Passing a prefixed
    /// key such as "android:allowBackup" finds nothing.
    pub fn attr_raw(&self, key: &str) -> Option<&str> {
        self.attrs.get(key).map(String::as_str)
    }

    pub fn children_named<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a Element> {
        self.children.iter().filter(move |c| c.tag == tag)
    }

    /// Depth-first descendants with the given tag.
    pub fn find_all<'a>(&'a self, tag: &str, out: &mut Vec<&'a Element>) {
        for c in &self.children {
            if c.tag == tag {
                out.push(c);
            }
            c.find_all(tag, out);
        }
    }
}

impl ManifestDoc {
    pub fn application(&self) -> Option<&Element> {
        self.root.children_named("application").next()
    }

    /// minSdkVersion from the uses-sdk element, if declared and numeric.
    pub fn min_sdk(&self) -> Option<u32> {
        let mut hits = Vec::new();
        self.root.find_all("uses-sdk", &mut hits);
        if self.root.tag == "uses-sdk" {
            hits.push(&self.root);
        }
        hits.iter()
            .find_map(|e| e.attr_local("minSdkVersion"))
            .and_then(|v| v.parse().ok())
    }

    /// Manifest components that can be exported: activities, activity
    /// aliases, services, receivers and providers under the application tag.
    pub fn components(&self) -> Vec<&Element> {
        const TAGS: [&str; 5] = [
            "activity",
            "activity-alias",
            "service",
            "receiver",
            "provider",
        ];
        let mut out = Vec::new();
        if let Some(app) = self.application() {
            for c in &app.children {
                if TAGS.contains(&c.tag.as_str()) {
                    out.push(c);
                }
            }
        }
        out
    }
}

/// Parses manifest XML into an element tree with namespace-stripped
/// attribute access.
pub fn parse_manifest(xml: &str) -> Result<ManifestDoc, DetectorError> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| DetectorError::Xml(e.to_string()))?;
    let root = convert(&doc, doc.root_element());
    Ok(ManifestDoc { root })
}

fn convert(doc: &roxmltree::Document<'_>, node: roxmltree::Node<'_, '_>) -> Element {
    let mut attrs = BTreeMap::new();
    for a in node.attributes() {
        // roxmltree already exposes the local name; the prefix lives in
        // the namespace and is dropped here.
        attrs.insert(a.name().to_string(), a.value().to_string());
    }
    let children = node
        .children()
        .filter(|c| c.is_element())
        .map(|c| convert(doc, c))
        .collect();
    let line = doc.text_pos_at(node.range().start).row;
    Element {
        tag: node.tag_name().name().to_string(),
        attrs,
        children,
        line,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BACKUP_TRUE: &str = r#"<?xml version="1.0"?>
<manifest xmlns:android="http://schemas.android.com/apk/res/android" package="com.x">
  <uses-sdk android:minSdkVersion="16" android:targetSdkVersion="28"/>
  <application android:allowBackup="true" android:label="X">
    <activity android:name=".Main"/>
  </application>
</manifest>
"#;

    #[test]
    fn local_name_lookup_finds_allow_backup() {
        let doc = parse_manifest(BACKUP_TRUE).unwrap();
        let app = doc.application().unwrap();
        assert_eq!(app.attr_local("allowBackup"), Some("true"));
        // the prefixed query resolves too, because the prefix is stripped
        assert_eq!(app.attr_local("android:allowBackup"), Some("true"));
    }

    #[test]
    fn raw_key_lookup_misses_under_stripped_storage() {
        let doc = parse_manifest(BACKUP_TRUE).unwrap();
        let app = doc.application().unwrap();
        assert_eq!(app.attr_raw("android:allowBackup"), None);
        assert_eq!(app.attr_raw("allowBackup"), Some("true"));
    }

    #[test]
    fn absent_attribute_is_absent_in_both_modes() {
        let doc = parse_manifest(
            r#"<manifest xmlns:android="http://schemas.android.com/apk/res/android">
                 <application/>
               </manifest>"#,
        )
        .unwrap();
        let app = doc.application().unwrap();
        assert_eq!(app.attr_local("allowBackup"), None);
        assert_eq!(app.attr_raw("allowBackup"), None);
    }

    #[test]
    fn min_sdk_is_parsed() {
        let doc = parse_manifest(BACKUP_TRUE).unwrap();
        assert_eq!(doc.min_sdk(), Some(16));
    }

    #[test]
    fn malformed_xml_is_an_error() {
        assert!(matches!(
            parse_manifest("<manifest><application></manifest>"),
            Err(DetectorError::Xml(_))
        ));
    }

    #[test]
    fn element_lines_are_tracked() {
        let doc = parse_manifest(BACKUP_TRUE).unwrap();
        assert_eq!(doc.application().unwrap().line, 4);
    }
}
