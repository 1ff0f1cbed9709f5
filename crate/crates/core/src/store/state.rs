//! In-memory materialization of the event log.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;
use crate::document::{DocumentRecord, DocumentState, StandardId};
use crate::error::{Error, Result};
use crate::governance::{FinalVerdict, Judgment};
use crate::ids::{DocumentId, EntityId, GraphId, JudgmentId, TripleId};
use crate::store::event::Event;
use crate::store::log::AuditEntry;
use crate::store::model::{EntityNode, NextIds, TripleRecord, TripleStatus};

#[derive(Debug, Clone)]
pub struct Graph {
    pub id: GraphId,
    pub created_at: Timestamp,
    entities: BTreeMap<EntityId, EntityNode>,
    by_name: HashMap<String, EntityId>,
    triples: BTreeMap<TripleId, TripleRecord>,
}

impl Graph {
    fn new(id: GraphId, created_at: Timestamp) -> Self {
        Self {
            id,
            created_at,
            entities: BTreeMap::new(),
            by_name: HashMap::new(),
            triples: BTreeMap::new(),
        }
    }

    pub fn entity(&self, name: &str) -> Option<&EntityNode> {
        self.by_name.get(name).and_then(|id| self.entities.get(id))
    }

    /// Entities in creation order.
    pub fn entities(&self) -> impl Iterator<Item = &EntityNode> {
        self.entities.values()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn triple(&self, id: TripleId) -> Option<&TripleRecord> {
        self.triples.get(&id)
    }

    /// All triples, deleted ones included, in insertion order.
    pub fn triples(&self) -> impl Iterator<Item = &TripleRecord> {
        self.triples.values()
    }

    pub fn live_triples(&self) -> impl Iterator<Item = &TripleRecord> {
        self.triples.values().filter(|t| !t.deleted)
    }

    pub fn incident<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a TripleRecord> + 'a {
        self.triples.values().filter(move |t| t.touches(name))
    }

    fn upsert_entity(&mut self, name: &str, next: &mut NextIds, actor: &str, ts: Timestamp) -> EntityId {
        if let Some(id) = self.by_name.get(name) {
            return *id;
        }
        let id = EntityId(next.entity);
        next.entity += 1;
        self.entities.insert(
            id,
            EntityNode {
                id,
                name: name.to_string(),
                created_at: ts,
                created_by: actor.to_string(),
            },
        );
        self.by_name.insert(name.to_string(), id);
        id
    }

    fn rewrite_endpoint(&mut self, from: &str, to: &str, actor: &str, ts: Timestamp) {
        for t in self.triples.values_mut() {
            let mut touched = false;
            if t.subject == from {
                t.subject = to.to_string();
                touched = true;
            }
            if t.object == from {
                t.object = to.to_string();
                touched = true;
            }
            if touched {
                t.last_updated_by = actor.to_string();
                t.last_updated_at = ts;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finalization {
    pub triple_id: TripleId,
    pub verdict: FinalVerdict,
    pub note: String,
    pub by: String,
    pub at: Timestamp,
}

#[derive(Debug, Clone, Default)]
pub struct ReviewState {
    judgments: BTreeMap<JudgmentId, Judgment>,
    by_triple: HashMap<TripleId, Vec<JudgmentId>>,
    finals: BTreeMap<TripleId, Finalization>,
}

impl ReviewState {
    /// Judgments on one triple in recording order.
    pub fn judgments_for(&self, triple: TripleId) -> Vec<&Judgment> {
        self.by_triple
            .get(&triple)
            .map(|ids| ids.iter().filter_map(|id| self.judgments.get(id)).collect())
            .unwrap_or_default()
    }

    pub fn judgments(&self) -> impl Iterator<Item = &Judgment> {
        self.judgments.values()
    }

    pub fn finalization(&self, triple: TripleId) -> Option<&Finalization> {
        self.finals.get(&triple)
    }

    pub fn finalizations(&self) -> impl Iterator<Item = &Finalization> {
        self.finals.values()
    }
}

#[derive(Debug, Clone, Default)]
pub struct State {
    graphs: BTreeMap<GraphId, Graph>,
    documents: BTreeMap<DocumentId, DocumentRecord>,
    triple_graph: HashMap<TripleId, GraphId>,
    review: ReviewState,
    next: NextIds,
    applied: Option<u64>,
}

impl State {
    pub fn graph(&self, id: &GraphId) -> Result<&Graph> {
        self.graphs.get(id).ok_or_else(|| Error::UnknownGraph(id.clone()))
    }

    pub fn graphs(&self) -> impl Iterator<Item = &Graph> {
        self.graphs.values()
    }

    pub fn document(&self, id: &DocumentId) -> Result<&DocumentRecord> {
        self.documents
            .get(id)
            .ok_or_else(|| Error::UnknownDocument(id.clone()))
    }

    pub fn documents(&self) -> impl Iterator<Item = &DocumentRecord> {
        self.documents.values()
    }

    pub fn triple(&self, id: TripleId) -> Result<&TripleRecord> {
        self.triple_graph
            .get(&id)
            .and_then(|g| self.graphs.get(g))
            .and_then(|g| g.triple(id))
            .ok_or_else(|| Error::NotFound(format!("triple {id}")))
    }

    /// Triples whose provenance points at `doc`, in insertion order.
    pub fn document_triples<'a>(&'a self, doc: &'a DocumentRecord) -> impl Iterator<Item = &'a TripleRecord> + 'a {
        self.graphs
            .get(&doc.graph_id)
            .into_iter()
            .flat_map(|g| g.triples())
            .filter(move |t| t.provenance.document_id == doc.id)
    }

    pub fn review(&self) -> &ReviewState {
        &self.review
    }

    pub fn next_ids(&self) -> NextIds {
        self.next
    }

    /// Sequence number of the last applied entry.
    pub fn applied_seq(&self) -> Option<u64> {
        self.applied
    }

    fn graph_mut(&mut self, id: &GraphId) -> Result<&mut Graph> {
        self.graphs
            .get_mut(id)
            .ok_or_else(|| Error::Storage(format!("replay references unknown graph {id}")))
    }

    fn doc_mut(&mut self, id: &DocumentId) -> Result<&mut DocumentRecord> {
        self.documents
            .get_mut(id)
            .ok_or_else(|| Error::Storage(format!("replay references unknown document {id}")))
    }

    fn triple_mut(&mut self, graph: &GraphId, id: TripleId) -> Result<&mut TripleRecord> {
        self.graphs
            .get_mut(graph)
            .and_then(|g| g.triples.get_mut(&id))
            .ok_or_else(|| Error::Storage(format!("replay references unknown triple {id}")))
    }

    /// Applies one log entry. Operations validate before logging, so an error
    /// here means the log itself is inconsistent.
    pub fn apply(&mut self, entry: &AuditEntry) -> Result<()> {
        let actor = entry.actor.as_str();
        let ts = entry.ts;
        match &entry.payload {
            Event::GraphCreated { graph_id } => {
                self.graphs
                    .insert(graph_id.clone(), Graph::new(graph_id.clone(), ts));
            }
            Event::DocumentRegistered {
                document_id,
                graph_id,
                title,
                source_file,
                pages,
                state,
            } => {
                self.documents.insert(
                    document_id.clone(),
                    DocumentRecord {
                        id: document_id.clone(),
                        graph_id: graph_id.clone(),
                        title: title.clone(),
                        source_file: source_file.clone(),
                        standard: StandardId::Unknown,
                        state: *state,
                        pages: pages.clone(),
                        created_at: ts,
                        created_by: actor.to_string(),
                        report: None,
                        certification: None,
                    },
                );
            }
            Event::StandardIdentified { document_id, standard } => {
                self.doc_mut(document_id)?.standard = *standard;
            }
            Event::IngestCompleted { document_id, report } => {
                let doc = self.doc_mut(document_id)?;
                doc.report = Some(report.clone());
                doc.state = DocumentState::Draft;
            }
            Event::DocumentStateChanged { document_id, to, .. } => {
                self.doc_mut(document_id)?.state = *to;
            }
            Event::EntityUpserted { graph_id, name } => {
                let mut next = self.next;
                self.graph_mut(graph_id)?.upsert_entity(name, &mut next, actor, ts);
                self.next = next;
            }
            Event::TripleInserted {
                graph_id,
                triple_id,
                subject,
                predicate,
                object,
                provenance,
                origin,
            } => {
                let mut next = self.next;
                let graph = self.graph_mut(graph_id)?;
                graph.upsert_entity(subject, &mut next, actor, ts);
                graph.upsert_entity(object, &mut next, actor, ts);
                graph.triples.insert(
                    *triple_id,
                    TripleRecord {
                        id: *triple_id,
                        graph_id: graph_id.clone(),
                        subject: subject.clone(),
                        predicate: predicate.clone(),
                        object: object.clone(),
                        status: TripleStatus::Draft,
                        deleted: false,
                        provenance: provenance.clone(),
                        origin: *origin,
                        created_by: actor.to_string(),
                        created_at: ts,
                        last_updated_by: actor.to_string(),
                        last_updated_at: ts,
                    },
                );
                next.triple = next.triple.max(triple_id.0 + 1);
                self.next = next;
                self.triple_graph.insert(*triple_id, graph_id.clone());
            }
            Event::TripleUpdated {
                graph_id,
                triple_id,
                after,
                ..
            } => {
                let mut next = self.next;
                let graph = self.graph_mut(graph_id)?;
                graph.upsert_entity(&after.subject, &mut next, actor, ts);
                graph.upsert_entity(&after.object, &mut next, actor, ts);
                self.next = next;
                let t = self.triple_mut(graph_id, *triple_id)?;
                t.subject = after.subject.clone();
                t.predicate = after.predicate.clone();
                t.object = after.object.clone();
                t.last_updated_by = actor.to_string();
                t.last_updated_at = ts;
            }
            Event::TripleDeleted { graph_id, triple_id } | Event::TripleRestored { graph_id, triple_id } => {
                let deleted = matches!(entry.payload, Event::TripleDeleted { .. });
                let t = self.triple_mut(graph_id, *triple_id)?;
                t.deleted = deleted;
                t.last_updated_by = actor.to_string();
                t.last_updated_at = ts;
            }
            Event::JudgmentRecorded { judgment, replaces } => {
                if let Some(old) = replaces {
                    self.review.judgments.remove(old);
                    if let Some(ids) = self.review.by_triple.get_mut(&judgment.triple_id) {
                        ids.retain(|id| id != old);
                    }
                }
                self.next.judgment = self.next.judgment.max(judgment.id.0 + 1);
                self.review
                    .by_triple
                    .entry(judgment.triple_id)
                    .or_default()
                    .push(judgment.id);
                self.review.judgments.insert(judgment.id, judgment.clone());
            }
            Event::TripleFinalized {
                graph_id,
                triple_id,
                verdict,
                note,
            } => {
                let t = self.triple_mut(graph_id, *triple_id)?;
                match verdict {
                    FinalVerdict::Certify => {
                        t.status = TripleStatus::Certified;
                        t.deleted = false;
                    }
                    FinalVerdict::Reject => {
                        t.status = TripleStatus::Rejected;
                        t.deleted = true;
                    }
                }
                t.last_updated_by = actor.to_string();
                t.last_updated_at = ts;
                self.review.finals.insert(
                    *triple_id,
                    Finalization {
                        triple_id: *triple_id,
                        verdict: *verdict,
                        note: note.clone(),
                        by: actor.to_string(),
                        at: ts,
                    },
                );
            }
            Event::DocumentCertified {
                certification,
                promoted,
                rejected,
            } => {
                let graph_id = self.document(&certification.document_id)?.graph_id.clone();
                for id in promoted {
                    let t = self.triple_mut(&graph_id, *id)?;
                    t.status = TripleStatus::Certified;
                    t.last_updated_by = actor.to_string();
                    t.last_updated_at = ts;
                }
                for id in rejected {
                    let t = self.triple_mut(&graph_id, *id)?;
                    t.status = TripleStatus::Rejected;
                    t.deleted = true;
                    t.last_updated_by = actor.to_string();
                    t.last_updated_at = ts;
                }
                let doc = self.doc_mut(&certification.document_id)?;
                doc.state = DocumentState::Certified;
                doc.certification = Some(certification.clone());
            }
            Event::EntityRenamed { graph_id, from, to } => {
                let graph = self.graph_mut(graph_id)?;
                let id = graph
                    .by_name
                    .remove(from)
                    .ok_or_else(|| Error::Storage(format!("rename of unknown entity {from}")))?;
                graph.by_name.insert(to.clone(), id);
                if let Some(node) = graph.entities.get_mut(&id) {
                    node.name = to.clone();
                }
                graph.rewrite_endpoint(from, to, actor, ts);
            }
            Event::EntitiesMerged {
                graph_id,
                from,
                to,
                collapsed,
            } => {
                let mut next = self.next;
                let graph = self.graph_mut(graph_id)?;
                graph.upsert_entity(to, &mut next, actor, ts);
                for name in from.iter().filter(|n| *n != to) {
                    graph.rewrite_endpoint(name, to, actor, ts);
                    if let Some(id) = graph.by_name.remove(name) {
                        graph.entities.remove(&id);
                    }
                }
                for id in collapsed {
                    if let Some(t) = graph.triples.get_mut(id) {
                        t.deleted = true;
                    }
                }
                self.next = next;
            }
            Event::AccountCreated { .. }
            | Event::AccountDeactivated { .. }
            | Event::ResetTokenIssued { .. }
            | Event::ResetTokenRevoked { .. }
            | Event::PasswordReset { .. } => {}
        }
        self.applied = Some(entry.seq);
        Ok(())
    }
}

/// Serialized form of [`State`] for snapshot files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub v: u32,
    pub last_seq: Option<u64>,
    pub last_digest: String,
    pub graphs: Vec<SnapshotGraph>,
    pub entities: Vec<SnapshotEntity>,
    pub triples: Vec<TripleRecord>,
    pub documents: Vec<DocumentRecord>,
    pub judgments: Vec<Judgment>,
    pub finalizations: Vec<Finalization>,
    pub next_ids: NextIds,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotGraph {
    pub id: GraphId,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotEntity {
    pub graph_id: GraphId,
    #[serde(flatten)]
    pub node: EntityNode,
}

impl State {
    pub fn to_snapshot(&self, last_digest: &str) -> Snapshot {
        Snapshot {
            v: 1,
            last_seq: self.applied,
            last_digest: last_digest.to_string(),
            graphs: self
                .graphs
                .values()
                .map(|g| SnapshotGraph {
                    id: g.id.clone(),
                    created_at: g.created_at,
                })
                .collect(),
            entities: self
                .graphs
                .values()
                .flat_map(|g| {
                    g.entities.values().map(|n| SnapshotEntity {
                        graph_id: g.id.clone(),
                        node: n.clone(),
                    })
                })
                .collect(),
            triples: self.graphs.values().flat_map(|g| g.triples.values().cloned()).collect(),
            documents: self.documents.values().cloned().collect(),
            judgments: self.review.judgments.values().cloned().collect(),
            finalizations: self.review.finals.values().cloned().collect(),
            next_ids: self.next,
        }
    }

    pub fn from_snapshot(snap: Snapshot) -> Result<Self> {
        let mut state = State {
            next: snap.next_ids,
            applied: snap.last_seq,
            ..State::default()
        };
        for g in snap.graphs {
            state.graphs.insert(g.id.clone(), Graph::new(g.id, g.created_at));
        }
        for e in snap.entities {
            let graph = state
                .graphs
                .get_mut(&e.graph_id)
                .ok_or_else(|| Error::Storage(format!("snapshot entity in unknown graph {}", e.graph_id)))?;
            graph.by_name.insert(e.node.name.clone(), e.node.id);
            graph.entities.insert(e.node.id, e.node);
        }
        for t in snap.triples {
            let graph = state
                .graphs
                .get_mut(&t.graph_id)
                .ok_or_else(|| Error::Storage(format!("snapshot triple in unknown graph {}", t.graph_id)))?;
            state.triple_graph.insert(t.id, t.graph_id.clone());
            graph.triples.insert(t.id, t);
        }
        for d in snap.documents {
            state.documents.insert(d.id.clone(), d);
        }
        for j in snap.judgments {
            state.review.by_triple.entry(j.triple_id).or_default().push(j.id);
            state.review.judgments.insert(j.id, j);
        }
        for f in snap.finalizations {
            state.review.finals.insert(f.triple_id, f);
        }
        Ok(state)
    }
}
