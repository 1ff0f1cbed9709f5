//! Parser for line-oriented `(subject, predicate, object)` LLM output.

use serde::{Deserialize, Serialize};

use crate::document::collapse_whitespace;
use crate::store::model::Spo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    NoParens,
    TooFewFields,
    EmptyField,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::NoParens => "no_parens",
            SkipReason::TooFewFields => "too_few_fields",
            SkipReason::EmptyField => "empty_field",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedLine {
    pub line: String,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedLines {
    pub triples: Vec<Spo>,
    pub skipped: Vec<SkippedLine>,
    /// Accepted lines that carried text after the closing parenthesis.
    pub trailing_text: Vec<String>,
}

/// Formats a triple the way extraction prompts ask for it.
pub fn format_triple(subject: &str, predicate: &str, object: &str) -> String {
    format!("({subject}, {predicate}, {object})")
}

/// Drops list markers such as `-`, `*`, `•`, `1.` or `2)` from the front.
fn strip_list_marker(mut s: &str) -> &str {
    loop {
        s = s.trim_start();
        if let Some(rest) = s.strip_prefix(['-', '*', '•', '+']) {
            s = rest;
            continue;
        }
        let digits = s.bytes().take_while(u8::is_ascii_digit).count();
        if digits > 0 {
            if let Some(rest) = s[digits..].strip_prefix(['.', ')', ':']) {
                s = rest;
                continue;
            }
        }
        return s;
    }
}

enum LineOutcome {
    Triple { spo: Spo, trailing: bool },
    Skip(SkipReason),
}

fn parse_line(line: &str) -> LineOutcome {
    let s = strip_list_marker(line);
    let Some(body_and_rest) = s.strip_prefix('(') else {
        return LineOutcome::Skip(SkipReason::NoParens);
    };
    let Some(close) = body_and_rest.rfind(')') else {
        return LineOutcome::Skip(SkipReason::NoParens);
    };
    let body = &body_and_rest[..close];
    let trailing = !body_and_rest[close + 1..].trim().is_empty();
    let mut parts = body.splitn(3, ',');
    let (Some(s), Some(p), Some(o)) = (parts.next(), parts.next(), parts.next()) else {
        return LineOutcome::Skip(SkipReason::TooFewFields);
    };
    let spo = Spo::new(collapse_whitespace(s), collapse_whitespace(p), collapse_whitespace(o));
    if spo.subject.is_empty() || spo.predicate.is_empty() || spo.object.is_empty() {
        return LineOutcome::Skip(SkipReason::EmptyField);
    }
    LineOutcome::Triple { spo, trailing }
}

/// Parses every non-blank line. Never fails; rejected lines are reported
/// with a reason. Fields split on the first two commas, so later commas
/// stay in the object.
pub fn parse_triple_lines(output: &str) -> ParsedLines {
    let mut parsed = ParsedLines::default();
    for raw in output.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match parse_line(line) {
            LineOutcome::Triple { spo, trailing } => {
                if trailing {
                    parsed.trailing_text.push(line.to_string());
                }
                parsed.triples.push(spo);
            }
            LineOutcome::Skip(reason) => parsed.skipped.push(SkippedLine {
                line: line.to_string(),
                reason,
            }),
        }
    }
    parsed
}
