use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;
use crate::ids::{DocumentId, EntityId, GraphId, TripleId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityNode {
    pub id: EntityId,
    pub name: String,
    pub created_at: Timestamp,
    pub created_by: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TripleStatus {
    Draft,
    Certified,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    LlmExtraction,
    ExpertAdded,
}

/// Where a triple came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub document_id: DocumentId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunk_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence_sentence: Option<String>,
}

impl Provenance {
    pub fn document(document_id: impl Into<DocumentId>) -> Self {
        Self {
            document_id: document_id.into(),
            page: None,
            chunk_index: None,
            evidence_sentence: None,
        }
    }

    pub fn with_page(mut self, page: u32) -> Self {
        self.page = Some(page);
        self
    }
}

/// Bare (subject, predicate, object) strings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spo {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl Spo {
    pub fn new(s: impl Into<String>, p: impl Into<String>, o: impl Into<String>) -> Self {
        Self {
            subject: s.into(),
            predicate: p.into(),
            object: o.into(),
        }
    }
}

impl std::fmt::Display for Spo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleRecord {
    pub id: TripleId,
    pub graph_id: GraphId,
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub status: TripleStatus,
    pub deleted: bool,
    pub provenance: Provenance,
    pub origin: Origin,
    pub created_by: String,
    pub created_at: Timestamp,
    pub last_updated_by: String,
    pub last_updated_at: Timestamp,
}

impl TripleRecord {
    pub fn spo(&self) -> Spo {
        Spo::new(&self.subject, &self.predicate, &self.object)
    }

    pub fn touches(&self, name: &str) -> bool {
        self.subject == name || self.object == name
    }

    /// The other endpoint when walking the edge undirected from `name`.
    pub fn other_end(&self, name: &str) -> Option<&str> {
        if self.subject == name {
            Some(&self.object)
        } else if self.object == name {
            Some(&self.subject)
        } else {
            None
        }
    }
}

/// Partial edit of a triple's fields.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriplePatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<String>,
}

/// Edge selection shared by neighborhood queries and exports.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeFilter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicates: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub document_ids: Option<BTreeSet<DocumentId>>,
    #[serde(default)]
    pub include_deleted: bool,
}

impl EdgeFilter {
    pub fn include_deleted() -> Self {
        Self {
            include_deleted: true,
            ..Self::default()
        }
    }

    pub fn admits(&self, triple: &TripleRecord) -> bool {
        if triple.deleted && !self.include_deleted {
            return false;
        }
        if let Some(preds) = &self.predicates {
            if !preds.contains(&triple.predicate) {
                return false;
            }
        }
        if let Some(docs) = &self.document_ids {
            if !docs.contains(&triple.provenance.document_id) {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub deleted_count: usize,
    pub predicate_histogram: BTreeMap<String, usize>,
}

impl GraphStats {
    /// Summarizes a set of edges; node_count counts endpoints of live edges
    /// plus `extra_nodes` that have no edges at all.
    pub fn from_edges<'a>(edges: impl IntoIterator<Item = &'a TripleRecord>, extra_nodes: usize) -> Self {
        let mut stats = GraphStats::default();
        let mut nodes = BTreeSet::new();
        for t in edges {
            if t.deleted {
                stats.deleted_count += 1;
                continue;
            }
            stats.edge_count += 1;
            *stats.predicate_histogram.entry(t.predicate.clone()).or_default() += 1;
            nodes.insert(t.subject.as_str());
            nodes.insert(t.object.as_str());
        }
        stats.node_count = nodes.len() + extra_nodes;
        stats
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgraph {
    pub nodes: Vec<EntityNode>,
    pub edges: Vec<TripleRecord>,
    pub truncated: bool,
    pub stats: GraphStats,
}

/// One hop of a path, walked in either direction along a stored edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStep {
    pub triple_id: TripleId,
    pub from: String,
    pub predicate: String,
    pub to: String,
    /// True when the walk follows the edge from subject to object.
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<String>,
    pub steps: Vec<PathStep>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// One exported edge row. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRow {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub document_id: DocumentId,
    pub page: Option<u32>,
    pub status: TripleStatus,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeExport {
    pub rows: Vec<EdgeRow>,
}

impl EdgeExport {
    /// RFC 4180 CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(["subject", "predicate", "object", "document_id", "page", "status"])
            .expect("in-memory write");
        for r in &self.rows {
            let page = r.page.map(|p| p.to_string()).unwrap_or_default();
            let status = format!("{:?}", r.status);
            w.write_record([
                r.subject.as_str(),
                r.predicate.as_str(),
                r.object.as_str(),
                r.document_id.as_str(),
                page.as_str(),
                status.as_str(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&serde_json::to_string(r).expect("serializable row"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NextIds {
    pub entity: u64,
    pub triple: u64,
    pub judgment: u64,
}

impl Default for NextIds {
    fn default() -> Self {
        Self {
            entity: 1,
            triple: 1,
            judgment: 1,
        }
    }
}
