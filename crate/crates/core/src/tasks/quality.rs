//! Graph quality heuristics: duplicates, coverage gaps, schema hygiene and
//! provenance tracing.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::document::{collapse_whitespace, StandardId};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::fusion::normalize_entity;
use crate::ids::{DocumentId, GraphId, TripleId};
use crate::store::model::{Provenance, TripleRecord};
use crate::store::State;

pub const DEFAULT_MAX_EDIT_DISTANCE: usize = 2;
/// Names shorter than this (normalized) are never edit-distance candidates.
pub const MIN_ALIAS_LEN: usize = 4;
pub const GENERIC_SUBJECTS: &[&str] = &["company", "it", "this", "the company", "organization"];

const CHECKLISTS: &str = include_str!("../../data/checklists.yaml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuplicateReason {
    NormalizedEqual,
    EditDistance,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DuplicatePair {
    pub name_a: String,
    pub name_b: String,
    pub reason: DuplicateReason,
    /// Edit distance between normalized forms.
    pub distance: usize,
}

fn pair_reason(a: &str, b: &str, max_distance: usize) -> Option<(DuplicateReason, usize)> {
    if a == b {
        return Some((DuplicateReason::NormalizedEqual, 0));
    }
    if a.chars().count() < MIN_ALIAS_LEN || b.chars().count() < MIN_ALIAS_LEN {
        return None;
    }
    let d = strsim::levenshtein(a, b);
    (d <= max_distance).then_some((DuplicateReason::EditDistance, d))
}

/// Candidate alias pairs among a graph's entities. Each unordered pair
/// appears once with `name_a < name_b`. Pairwise scoring runs through
/// `mode`.
pub fn detect_duplicates(state: &State, graph_id: &GraphId, max_distance: usize, mode: ExecMode) -> Result<Vec<DuplicatePair>> {
    let graph = state.graph(graph_id)?;
    let mut names: Vec<(String, String)> = graph
        .entities()
        .map(|e| (e.name.clone(), normalize_entity(&e.name)))
        .collect();
    names.sort();
    Ok(duplicate_pairs(&names, max_distance, mode))
}

/// Pairwise scan over `(original, normalized)` names sorted by original.
pub fn duplicate_pairs(names: &[(String, String)], max_distance: usize, mode: ExecMode) -> Vec<DuplicatePair> {
    exec::flat_map_range(mode, names.len(), |i| {
        let (a, na) = &names[i];
        names[i + 1..]
            .iter()
            .filter_map(|(b, nb)| {
                pair_reason(na, nb, max_distance).map(|(reason, distance)| DuplicatePair {
                    name_a: a.clone(),
                    name_b: b.clone(),
                    reason,
                    distance,
                })
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChecklistTopic {
    pub topic: String,
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checklist {
    pub name: String,
    pub topics: Vec<ChecklistTopic>,
}

impl Checklist {
    /// The bundled checklist for a standard; `unknown` gets the general one.
    pub fn bundled(standard: StandardId) -> Checklist {
        let name = match standard {
            StandardId::Unknown => "general",
            s => s.as_str(),
        };
        let all: BTreeMap<String, Vec<ChecklistTopic>> =
            serde_yaml::from_str(CHECKLISTS).expect("bundled checklists parse");
        Checklist {
            name: name.to_string(),
            topics: all.get(name).cloned().unwrap_or_default(),
        }
    }

    /// Picks the checklist for the standard of the graph's first document.
    pub fn for_graph(state: &State, graph_id: &GraphId) -> Checklist {
        let standard = state
            .documents()
            .find(|d| &d.graph_id == graph_id)
            .map(|d| d.standard)
            .unwrap_or_default();
        Self::bundled(standard)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapReport {
    pub checklist: String,
    pub missing_topics: Vec<String>,
    /// Topics backed by exactly one triple.
    pub thin_topics: Vec<String>,
    /// Entities with exactly one live incident triple.
    pub degree_one_entities: Vec<String>,
}

pub fn coverage_gaps(state: &State, graph_id: &GraphId, checklist: &Checklist) -> Result<GapReport> {
    let graph = state.graph(graph_id)?;
    let texts: Vec<String> = graph
        .live_triples()
        .map(|t| format!("{} {} {}", t.subject, t.predicate, t.object).to_lowercase())
        .collect();
    let mut report = GapReport {
        checklist: checklist.name.clone(),
        ..Default::default()
    };
    for topic in &checklist.topics {
        let keys: Vec<String> = topic.keywords.iter().map(|k| k.to_lowercase()).collect();
        let hits = texts.iter().filter(|t| keys.iter().any(|k| t.contains(k.as_str()))).count();
        match hits {
            0 => report.missing_topics.push(topic.topic.clone()),
            1 => report.thin_topics.push(topic.topic.clone()),
            _ => {}
        }
    }
    let mut degree: BTreeMap<&str, usize> = BTreeMap::new();
    for t in graph.live_triples() {
        *degree.entry(&t.subject).or_default() += 1;
        if t.object != t.subject {
            *degree.entry(&t.object).or_default() += 1;
        }
    }
    report.degree_one_entities = degree
        .into_iter()
        .filter(|(_, d)| *d == 1)
        .map(|(n, _)| n.to_string())
        .collect();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateVariants {
    pub normalized: String,
    pub variants: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericSubject {
    pub triple_id: TripleId,
    pub subject: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// Predicates that differ only in case or whitespace.
    pub predicate_variants: Vec<PredicateVariants>,
    pub singleton_predicates: Vec<String>,
    pub generic_subjects: Vec<GenericSubject>,
}

impl DiagnosticsReport {
    pub fn is_empty(&self) -> bool {
        self.predicate_variants.is_empty() && self.singleton_predicates.is_empty() && self.generic_subjects.is_empty()
    }
}

pub fn schema_diagnostics(state: &State, graph_id: &GraphId) -> Result<DiagnosticsReport> {
    let graph = state.graph(graph_id)?;
    let mut groups: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut generic_subjects = Vec::new();
    for t in graph.live_triples() {
        groups
            .entry(collapse_whitespace(&t.predicate.to_lowercase()))
            .or_default()
            .insert(t.predicate.clone());
        *counts.entry(&t.predicate).or_default() += 1;
        if GENERIC_SUBJECTS.contains(&normalize_entity(&t.subject).as_str()) {
            generic_subjects.push(GenericSubject {
                triple_id: t.id,
                subject: t.subject.clone(),
            });
        }
    }
    Ok(DiagnosticsReport {
        predicate_variants: groups
            .into_iter()
            .filter(|(_, v)| v.len() >= 2)
            .map(|(normalized, variants)| PredicateVariants { normalized, variants })
            .collect(),
        singleton_predicates: counts
            .into_iter()
            .filter(|(_, c)| *c == 1)
            .map(|(p, _)| p.to_string())
            .collect(),
        generic_subjects,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFilter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub document_id: Option<DocumentId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page: Option<u32>,
}

impl TraceFilter {
    pub fn admits(&self, t: &TripleRecord) -> bool {
        self.entity.as_deref().is_none_or(|e| t.touches(e))
            && self.predicate.as_deref().is_none_or(|p| t.predicate == p)
            && self.document_id.as_ref().is_none_or(|d| &t.provenance.document_id == d)
            && self.page.is_none_or(|p| t.provenance.page == Some(p))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub triple: TripleRecord,
    pub provenance: Provenance,
}

pub fn provenance_trace(state: &State, graph_id: &GraphId, filter: &TraceFilter) -> Result<Vec<TraceRow>> {
    let graph = state.graph(graph_id)?;
    Ok(graph
        .live_triples()
        .filter(|t| filter.admits(t))
        .map(|t| TraceRow {
            provenance: t.provenance.clone(),
            triple: t.clone(),
        })
        .collect())
}

/// Rejects a checklist name that has no bundled entry.
pub fn checklist_by_name(name: &str) -> Result<Checklist> {
    let standard = if name == "general" {
        StandardId::Unknown
    } else {
        name.parse::<StandardId>().map_err(Error::InvalidArgument)?
    };
    Ok(Checklist::bundled(standard))
}
