//! Intra-procedural string-concatenation taint for SQL-style sinks.
//!
//! The model is small: statement-oriented, flow-insensitive
//! within a method, no inter-procedural propagation. A variable becomes
//! tainted when an initializer, assignment or `+=` builds it from a `+`
//! concatenation with at least one non-literal operand; a finding is emitted
//! when a tainted variable or an inline concatenation reaches a sink
//! argument. This is the minimum machinery that separates sink reachability
//! from the single-line regex shortcut some scanners take.

use std::collections::HashSet;

use regex::Regex;

use super::source::{line_of_offset, scan_call_args, SourceHit};

#[derive(Debug)]
struct Statement {
    text: String,
    /// 1-based line of the statement's first non-whitespace character.
    line: u32,
}

/// Keywords that introduce a block but not a method body.
const CONTROL: [&str; 12] = [
    "if",
    "else",
    "for",
    "while",
    "switch",
    "do",
    "try",
    "catch",
    "finally",
    "synchronized",
    "return",
    "new",
];

/// Runs concatenation taint over one source unit and reports sink reaches.
pub fn concat_taint(source_unit: &str, sinks: &[String]) -> Vec<SourceHit> {
    assert!(!sinks.is_empty(), "taint analysis needs at least one sink");
    let mut tainted: HashSet<String> = HashSet::new();
    let mut hits = Vec::new();
    for stmt in split_statements(source_unit) {
        if is_method_start(&stmt.text) {
            tainted.clear();
            continue;
        }
        if let Some((var, rhs, augmenting)) = parse_assignment(&stmt.text) {
            if augmenting || concat_with_nonliteral(rhs) {
                tainted.insert(var.to_string());
            }
        }
        for sink in sinks {
            for (offset, args) in sink_calls(&stmt.text, sink) {
                let joined = args.join(",");
                let reached = concat_with_nonliteral(&joined)
                    || identifiers(&joined).any(|id| tainted.contains(id));
                if reached {
                    hits.push(SourceHit {
                        line: stmt.line + line_of_offset(&stmt.text, offset) - 1,
                        snippet: stmt
                            .text
                            .lines()
                            .map(str::trim)
                            .collect::<Vec<_>>()
                            .join(" ")
                            .chars()
                            .take(120)
                            .collect(),
                    });
                }
            }
        }
    }
    hits
}

/// The single-line regex shortcut, applied verbatim per line. Kept as a
/// separate mode so sink-reach and regex detection can be compared on the
/// same input.
pub fn regex_only(source_unit: &str, pattern: &Regex) -> Vec<SourceHit> {
    super::source::regex_hits(source_unit, pattern)
}

fn split_statements(src: &str) -> Vec<Statement> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut in_str: Option<u8> = None;
    let mut i = 0;
    let mut push = |s: usize, e: usize| {
        let text = &src[s..=e.min(src.len() - 1)];
        if !text.trim().is_empty() {
            out.push(Statement {
                text: text.to_string(),
                line: line_of_offset(src, s),
            });
        }
    };
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
            i += 1;
            continue;
        }
        match c {
            b'"' | b'\'' => {
                if start.is_none() {
                    start = Some(i);
                }
                in_str = Some(c);
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'*' => {
                i += 2;
                while i + 1 < bytes.len() && !(bytes[i] == b'*' && bytes[i + 1] == b'/') {
                    i += 1;
                }
                i += 2;
                continue;
            }
            b';' | b'{' | b'}' => {
                if let Some(s) = start.take() {
                    push(s, i);
                } else if c != b';' {
                    push(i, i);
                }
            }
            _ if !(c as char).is_whitespace() && start.is_none() => {
                start = Some(i);
            }
            _ => {}
        }
        i += 1;
    }
    if let Some(s) = start {
        push(s, src.len() - 1);
    }
    out
}

/// A statement that ends in '{' and has a parameter list is treated as a
/// method (or constructor) header unless it starts with a control keyword.
fn is_method_start(stmt: &str) -> bool {
    let t = stmt.trim();
    if !t.ends_with('{') || !t.contains('(') {
        return false;
    }
    let first = t
        .trim_start_matches('}')
        .trim_start()
        .split(|c: char| !c.is_alphanumeric() && c != '_')
        .next()
        .unwrap_or("");
    !CONTROL.contains(&first) && !first.is_empty()
}

/// Splits `var = rhs` / `var += rhs`, returning (var, rhs, is_augmenting).
/// Comparison operators are not assignments.
fn parse_assignment(stmt: &str) -> Option<(&str, &str, bool)> {
    let t = stmt.trim().trim_end_matches(';');
    let bytes = t.as_bytes();
    let mut in_str: Option<u8> = None;
    let mut i = 0;
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
            i += 1;
            continue;
        }
        match c {
            b'"' | b'\'' => in_str = Some(c),
            b'=' => {
                let prev = if i > 0 { bytes[i - 1] } else { b' ' };
                let next = if i + 1 < bytes.len() {
                    bytes[i + 1]
                } else {
                    b' '
                };
                if next == b'=' || matches!(prev, b'=' | b'<' | b'>' | b'!') {
                    i += if next == b'=' { 2 } else { 1 };
                    continue;
                }
                let augmenting = prev == b'+';
                let lhs_end = if augmenting { i - 1 } else { i };
                let lhs = t[..lhs_end].trim();
                let var = lhs
                    .rsplit(|c: char| c.is_whitespace())
                    .next()
                    .unwrap_or(lhs);
                let var = var.trim_matches(|c: char| !c.is_alphanumeric() && c != '_');
                if var.is_empty() || var.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                    return None;
                }
                let start = var.as_ptr() as usize - t.as_ptr() as usize;
                return Some((&t[start..start + var.len()], t[i + 1..].trim(), augmenting));
            }
            _ => {}
        }
        i += 1;
    }
    None
}

/// True when the expression contains a top-level `+` joining at least two
/// operands of which at least one is not a string/char/numeric literal.
fn concat_with_nonliteral(expr: &str) -> bool {
    let pieces = split_plus(expr);
    if pieces.len() < 2 {
        return false;
    }
    pieces.iter().any(|p| !is_literal(p))
}

fn split_plus(expr: &str) -> Vec<String> {
    let bytes = expr.as_bytes();
    let mut in_str: Option<u8> = None;
    let mut pieces = Vec::new();
    let mut cur = String::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if let Some(q) = in_str {
            cur.push(c);
            if c == '\\' {
                if i + 1 < bytes.len() {
                    cur.push(bytes[i + 1] as char);
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
                cur.push(c);
            }
            '+' => {
                // `++` is not concatenation
                if i + 1 < bytes.len() && bytes[i + 1] == b'+' {
                    i += 2;
                    continue;
                }
                pieces.push(cur.trim().to_string());
                cur.clear();
            }
            _ => cur.push(c),
        }
        i += 1;
    }
    pieces.push(cur.trim().to_string());
    pieces.retain(|p| !p.is_empty());
    pieces
}

fn is_literal(piece: &str) -> bool {
    let p = piece.trim();
    (p.starts_with('"') && p.ends_with('"') && p.len() >= 2)
        || (p.starts_with('\'') && p.ends_with('\'') && p.len() >= 2)
        || p.parse::<f64>().is_ok()
}

fn identifiers(expr: &str) -> impl Iterator<Item = &str> {
    expr.split(|c: char| !c.is_alphanumeric() && c != '_')
        .filter(|s| !s.is_empty() && !s.chars().next().unwrap().is_ascii_digit())
}

fn sink_calls(stmt: &str, sink: &str) -> Vec<(usize, Vec<String>)> {
    let re = Regex::new(&format!(r"\b{}\s*\(", regex::escape(sink))).expect("static pattern");
    let mut out = Vec::new();
    for m in re.find_iter(stmt) {
        if let Some((args, _)) = scan_call_args(stmt, m.end() - 1) {
            out.push((m.start(), args));
        }
    }
    out
}
