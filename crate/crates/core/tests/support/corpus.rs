//! Hand-labeled corpora under `tests/data`.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use provkg_core::governance::parse_assessment;
use provkg_core::ingest::{parse_triple_lines, SkipReason};
use provkg_core::tasks::parse_analysis;
use provkg_core::Error;
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Counts {
    pub triples: usize,
    pub no_parens: usize,
    pub too_few_fields: usize,
    pub empty_field: usize,
    pub trailing_text: usize,
}

fn counts_of(text: &str) -> Counts {
    let p = parse_triple_lines(text);
    let skipped = |r: SkipReason| p.skipped.iter().filter(|s| s.reason == r).count();
    Counts {
        triples: p.triples.len(),
        no_parens: skipped(SkipReason::NoParens),
        too_few_fields: skipped(SkipReason::TooFewFields),
        empty_field: skipped(SkipReason::EmptyField),
        trailing_text: p.trailing_text.len(),
    }
}

/// Files whose parse counts differ from `golden.json`, as messages.
pub fn parser_mismatches(data: &Path) -> (usize, Vec<String>) {
    let dir = data.join("parser");
    let golden: BTreeMap<String, Counts> =
        serde_json::from_str(&std::fs::read_to_string(dir.join("golden.json")).unwrap()).unwrap();
    let bad = golden
        .iter()
        .filter_map(|(name, want)| {
            let got = counts_of(&std::fs::read_to_string(dir.join(name)).unwrap());
            (&got != want).then(|| format!("{name}: expected {want:?}, got {got:?}"))
        })
        .collect();
    (golden.len(), bad)
}

#[derive(Debug, Default)]
pub struct SchemaOutcome {
    pub accepted: usize,
    pub rejected: usize,
    pub failures: Vec<String>,
}

fn files(dir: &Path) -> Vec<(String, String)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

/// Conforming files must parse; violating files must fail with a schema
/// violation that carries the payload unchanged.
pub fn schema_corpus(data: &Path) -> SchemaOutcome {
    let mut out = SchemaOutcome::default();
    type Parser = fn(&str) -> Result<(), Error>;
    let parsers: [(&str, Parser); 2] = [
        ("verifier", |t| parse_assessment(t).map(drop)),
        ("analysis", |t| parse_analysis(t).map(drop)),
    ];
    for (kind, parse) in parsers {
        let root = data.join("schema").join(kind);
        for (name, text) in files(&root.join("ok")) {
            match parse(&text) {
                Ok(()) => out.accepted += 1,
                Err(e) => out.failures.push(format!("{kind}/ok/{name}: {e}")),
            }
        }
        for (name, text) in files(&root.join("bad")) {
            match parse(&text) {
                Err(Error::SchemaViolation { raw, .. }) if raw == text => out.rejected += 1,
                Err(Error::SchemaViolation { .. }) => out.failures.push(format!("{kind}/bad/{name}: payload altered")),
                other => out.failures.push(format!("{kind}/bad/{name}: {other:?}")),
            }
        }
    }
    out
}
