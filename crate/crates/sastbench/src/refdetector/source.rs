//! Line- and call-oriented matching over source text.
//!
//! Matching here is purely syntactic: calls are located by name,
//! arguments by balanced-parenthesis scanning, and constants by token
//! equality, which is enough to resolve a symbolic platform constant and the
//! numeric literal a decompiler turns it into (MODE_WORLD_WRITEABLE vs `2`).

use regex::Regex;

/// One matched position in a source unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceHit {
    /// 1-based line.
    pub line: u32,
    pub snippet: String,
}

pub(crate) fn line_of_offset(text: &str, offset: usize) -> u32 {
    text[..offset].bytes().filter(|&b| b == b'\n').count() as u32 + 1
}

fn snippet_at(text: &str, offset: usize) -> String {
    let start = text[..offset].rfind('\n').map(|i| i + 1).unwrap_or(0);
    let end = text[offset..]
        .find('\n')
        .map(|i| offset + i)
        .unwrap_or(text.len());
    text[start..end].trim().to_string()
}

/// Per-line regex hits over a source unit.
pub fn regex_hits(text: &str, re: &Regex) -> Vec<SourceHit> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| re.is_match(l))
        .map(|(i, l)| SourceHit {
            line: i as u32 + 1,
            snippet: l.trim().to_string(),
        })
        .collect()
}

/// Extracts the argument list of a call starting at the opening parenthesis.
/// Handles nested parentheses and string/char literals; returns the arguments
/// split at top-level commas, plus the byte offset one past the closing
/// parenthesis. Returns None on unbalanced input.
pub(crate) fn scan_call_args(text: &str, open_paren: usize) -> Option<(Vec<String>, usize)> {
    let bytes = text.as_bytes();
    debug_assert_eq!(bytes[open_paren], b'(');
    let mut depth = 0usize;
    let mut args = Vec::new();
    let mut current = String::new();
    let mut i = open_paren;
    let mut in_str: Option<u8> = None;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if let Some(q) = in_str {
            current.push(c);
            if c == '\\' {
                if i + 1 < bytes.len() {
                    current.push(bytes[i + 1] as char);
                    i += 2;
                    continue;
                }
            } else if c as u8 == q {
                in_str = None;
            }
            i += 1;
            continue;
        }
        match c {
            '"' | '\'' => {
                in_str = Some(c as u8);
                current.push(c);
            }
            '(' => {
                depth += 1;
                if depth > 1 {
                    current.push(c);
                }
            }
            ')' => {
                depth -= 1;
                if depth == 0 {
                    let arg = current.trim().to_string();
                    if !arg.is_empty() || !args.is_empty() {
                        args.push(arg);
                    }
                    return Some((args, i + 1));
                }
                current.push(c);
            }
            ',' if depth == 1 => {
                args.push(current.trim().to_string());
                current.clear();
            }
            _ => current.push(c),
        }
        i += 1;
    }
    None
}

/// All calls to `api` in a source unit, with their argument lists.
pub(crate) fn find_calls(text: &str, api: &str) -> Vec<(usize, Vec<String>)> {
    let re = Regex::new(&format!(r"\b{}\s*\(", regex::escape(api))).expect("static pattern");
    let mut out = Vec::new();
    for m in re.find_iter(text) {
        let open = m.end() - 1;
        if let Some((args, _)) = scan_call_args(text, open) {
            out.push((m.start(), args));
        }
    }
    out
}

/// True when a call argument denotes one of the accepted values, either
/// verbatim or as the last segment of a qualified name — this is what makes
/// `Context.MODE_WORLD_WRITEABLE` and the decompiled literal `2` equivalent.
pub(crate) fn arg_matches(arg: &str, accepted: &[String]) -> bool {
    let arg = arg.trim();
    accepted
        .iter()
        .any(|v| arg == v || arg.ends_with(&format!(".{v}")))
}

/// Calls to `api` whose argument at `arg_index` matches one of `accepted`.
pub fn api_arg_hits(
    text: &str,
    api: &str,
    arg_index: usize,
    accepted: &[String],
) -> Vec<SourceHit> {
    find_calls(text, api)
        .into_iter()
        .filter(|(_, args)| {
            args.get(arg_index)
                .is_some_and(|a| arg_matches(a, accepted))
        })
        .map(|(offset, _)| SourceHit {
            line: line_of_offset(text, offset),
            snippet: snippet_at(text, offset),
        })
        .collect()
}

/// Declarations of `method` whose body is empty (whitespace and comments
/// only). Matches regardless of modifiers, so `public final void m() {}` is
/// found just like `public void m() {}`.
pub fn empty_method_body_hits(text: &str, method: &str) -> Vec<SourceHit> {
    let re =
        Regex::new(&format!(r"\bvoid\s+{}\s*\(", regex::escape(method))).expect("static pattern");
    let mut out = Vec::new();
    for m in re.find_iter(text) {
        let open = m.end() - 1;
        let Some((_, after_params)) = scan_call_args(text, open) else {
            continue;
        };
        // Skip a possible throws clause up to the body brace; a ';' first
        // means an abstract/interface declaration without a body.
        let rest = &text[after_params..];
        let Some(rel_brace) = rest.find(['{', ';']) else {
            continue;
        };
        if rest.as_bytes()[rel_brace] == b';' {
            continue;
        }
        let body_start = after_params + rel_brace + 1;
        let Some(body_end) = matching_brace(text, body_start - 1) else {
            continue;
        };
        if body_is_empty(&text[body_start..body_end]) {
            out.push(SourceHit {
                line: line_of_offset(text, m.start()),
                snippet: snippet_at(text, m.start()),
            });
        }
    }
    out
}

/// Offset of the '}' matching the '{' at `open_brace`.
fn matching_brace(text: &str, open_brace: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    debug_assert_eq!(bytes[open_brace], b'{');
    let mut depth = 0usize;
    let mut in_str: Option<u8> = None;
    let mut i = open_brace;
    while i < bytes.len() {
        let c = bytes[i];
        if let Some(q) = in_str {
            if c == b'\\' {
                i += 2;
                continue;
            }
            if c == q {
                in_str = None;
            }
        } else {
            match c {
                b'"' | b'\'' => in_str = Some(c),
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i);
                    }
                }
                _ => {}
            }
        }
        i += 1;
    }
    None
}

fn body_is_empty(body: &str) -> bool {
    let mut rest = body;
    let mut cleaned = String::new();
    while let Some(i) = rest.find("/*") {
        cleaned.push_str(&rest[..i]);
        match rest[i..].find("*/") {
            Some(j) => rest = &rest[i + j + 2..],
            None => {
                rest = "";
                break;
            }
        }
    }
    cleaned.push_str(rest);
    cleaned
        .lines()
        .map(|l| l.split("//").next().unwrap_or(""))
        .all(|l| l.trim().is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn call_args_are_split_at_top_level_commas() {
        let text = r#"ctx.openFileOutput(name, Context.MODE_WORLD_WRITEABLE);"#;
        let calls = find_calls(text, "openFileOutput");
        assert_eq!(calls.len(), 1);
        assert_eq!(calls[0].1, vec!["name", "Context.MODE_WORLD_WRITEABLE"]);
    }

    #[test]
    fn nested_calls_and_strings_do_not_confuse_the_scanner() {
        let text = r#"db.execSQL(build("a,b", f(x, y)), other);"#;
        let calls = find_calls(text, "execSQL");
        assert_eq!(calls[0].1, vec![r#"build("a,b", f(x, y))"#, "other"]);
    }

    #[test]
    fn symbolic_and_literal_modes_match_alike() {
        let accepted = vec!["MODE_WORLD_WRITEABLE".to_string(), "2".to_string()];
        assert!(arg_matches("Context.MODE_WORLD_WRITEABLE", &accepted));
        assert!(arg_matches("MODE_WORLD_WRITEABLE", &accepted));
        assert!(arg_matches("2", &accepted));
        assert!(!arg_matches("0", &accepted));
        assert!(!arg_matches("MODE_PRIVATE", &accepted));
    }

    #[test]
    fn empty_body_found_despite_public_final_modifiers() {
        let text = r#"
public final void checkServerTrusted(X509Certificate[] chain, String authType) {
}
"#;
        let hits = empty_method_body_hits(text, "checkServerTrusted");
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].line, 2);
    }

    #[test]
    fn comment_only_body_counts_as_empty() {
        let text =
            "public void checkServerTrusted(X509Certificate[] c, String a) { /* trust all */ }";
        assert_eq!(empty_method_body_hits(text, "checkServerTrusted").len(), 1);
    }

    #[test]
    fn non_empty_body_is_not_flagged() {
        let text = r#"
public void checkServerTrusted(X509Certificate[] chain, String authType) {
    validator.validate(chain);
}
"#;
        assert!(empty_method_body_hits(text, "checkServerTrusted").is_empty());
    }

    #[test]
    fn interface_declaration_without_body_is_skipped() {
        let text = "void checkServerTrusted(X509Certificate[] chain, String authType) throws CertificateException;";
        assert!(empty_method_body_hits(text, "checkServerTrusted").is_empty());
    }
}
