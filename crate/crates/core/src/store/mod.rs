//! Embedded, event-sourced property-graph store.
//!
//! All mutations go through [`GraphStore::commit`]: the event is appended to
//! the hash-chained log first and then applied to the in-memory [`State`].
//! Operations validate fully before committing, so a committed event always
//! applies cleanly. Replaying the log from empty rebuilds the same state.

pub mod event;
pub mod log;
pub mod model;
mod query;
pub mod state;

use std::path::Path as FsPath;
use std::sync::Arc;

use crate::clock::{Clock, SystemClock};
use crate::document::{collapse_whitespace, DocumentRecord, DocumentState, PageText};
use crate::error::{Error, Result};
use crate::ids::{DocumentId, GraphId, TripleId};

pub use event::Event;
pub use log::{verify_file, verify_lines, AuditEntry, EventLog, VerifyReport};
pub use model::*;
pub use state::{Finalization, Graph, ReviewState, Snapshot, State};

/// Default number of edges returned by one graph view.
pub const DEFAULT_EDGE_CAP: usize = 500;

/// A new document to register.
#[derive(Debug, Clone)]
pub struct NewDocument {
    pub id: DocumentId,
    pub graph_id: GraphId,
    pub title: String,
    pub source_file: Option<String>,
    pub pages: Vec<PageText>,
    pub state: DocumentState,
}

/// Result of [`GraphStore::insert_triple`].
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Inserted {
    pub record: TripleRecord,
    /// True when an identical triple from the same document already existed.
    pub deduplicated: bool,
}

pub struct GraphStore {
    state: State,
    log: EventLog,
    clock: Arc<dyn Clock>,
}

impl std::fmt::Debug for GraphStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GraphStore").field("log", &self.log).finish()
    }
}

impl Default for GraphStore {
    fn default() -> Self {
        Self::in_memory(Arc::new(SystemClock))
    }
}

fn non_empty(value: &str, field: &'static str) -> Result<String> {
    let v = value.trim();
    if v.is_empty() {
        Err(Error::EmptyField(field))
    } else {
        Ok(v.to_string())
    }
}

impl GraphStore {
    pub fn in_memory(clock: Arc<dyn Clock>) -> Self {
        Self {
            state: State::default(),
            log: EventLog::in_memory(),
            clock,
        }
    }

    /// Opens a file-backed store, replaying the whole log.
    pub fn open(log_path: impl AsRef<FsPath>, clock: Arc<dyn Clock>) -> Result<Self> {
        let log = EventLog::open(log_path)?;
        let mut state = State::default();
        for entry in log.entries() {
            state.apply(entry)?;
        }
        Ok(Self { state, log, clock })
    }

    /// Opens a file-backed store from a snapshot plus the log tail.
    pub fn open_with_snapshot(
        log_path: impl AsRef<FsPath>,
        snapshot_path: impl AsRef<FsPath>,
        clock: Arc<dyn Clock>,
    ) -> Result<Self> {
        let snapshot_path = snapshot_path.as_ref();
        if !snapshot_path.exists() {
            return Self::open(log_path, clock);
        }
        let log = EventLog::open(log_path)?;
        let snap: Snapshot = serde_json::from_slice(&std::fs::read(snapshot_path)?)
            .map_err(|e| Error::Storage(format!("snapshot: {e}")))?;
        if let Some(seq) = snap.last_seq {
            let line = log
                .lines()
                .get(seq as usize)
                .ok_or_else(|| Error::Storage(format!("snapshot is ahead of the log (seq {seq})")))?;
            if !line.ends_with(&format!("\"digest\":\"{}\"}}", snap.last_digest)) {
                return Err(Error::Storage("snapshot does not match the log".into()));
            }
        }
        let start = snap.last_seq.map_or(0, |s| s as usize + 1);
        let mut state = State::from_snapshot(snap)?;
        for entry in &log.entries()[start..] {
            state.apply(entry)?;
        }
        Ok(Self { state, log, clock })
    }

    pub fn write_snapshot(&self, path: impl AsRef<FsPath>) -> Result<()> {
        let snap = self.state.to_snapshot(self.log.last_digest());
        let body = serde_json::to_vec_pretty(&snap).map_err(|e| Error::Storage(e.to_string()))?;
        let tmp = path.as_ref().with_extension("tmp");
        std::fs::write(&tmp, body)?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    /// Rebuilds state by replaying this store's own log from empty.
    pub fn replay(&self) -> Result<State> {
        let mut state = State::default();
        for entry in self.log.entries() {
            state.apply(entry)?;
        }
        Ok(state)
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    /// Appends `event` to the log and applies it.
    pub fn commit(&mut self, actor: &str, event: Event) -> Result<AuditEntry> {
        let fsync = event.requires_fsync();
        let entry = self.log.append(actor, self.clock.now(), event, fsync)?;
        self.state.apply(&entry)?;
        Ok(entry)
    }

    pub fn create_graph(&mut self, graph_id: &GraphId, actor: &str) -> Result<()> {
        if graph_id.as_str().trim().is_empty() {
            return Err(Error::EmptyField("graph_id"));
        }
        if self.state.graph(graph_id).is_ok() {
            return Err(Error::GraphExists(graph_id.clone()));
        }
        self.commit(
            actor,
            Event::GraphCreated {
                graph_id: graph_id.clone(),
            },
        )?;
        Ok(())
    }

    pub fn ensure_graph(&mut self, graph_id: &GraphId, actor: &str) -> Result<()> {
        if self.state.graph(graph_id).is_err() {
            self.create_graph(graph_id, actor)?;
        }
        Ok(())
    }

    pub fn register_document(&mut self, doc: NewDocument, actor: &str) -> Result<DocumentRecord> {
        if doc.id.as_str().trim().is_empty() {
            return Err(Error::EmptyField("document_id"));
        }
        if self.state.document(&doc.id).is_ok() {
            return Err(Error::DocumentExists(doc.id));
        }
        self.state.graph(&doc.graph_id)?;
        let mut last = 0;
        for p in &doc.pages {
            if p.page == 0 || p.page <= last {
                return Err(Error::InvalidArgument(format!(
                    "page numbers must be positive and strictly increasing (found {} after {last})",
                    p.page
                )));
            }
            last = p.page;
        }
        let id = doc.id.clone();
        self.commit(
            actor,
            Event::DocumentRegistered {
                document_id: doc.id,
                graph_id: doc.graph_id,
                title: doc.title,
                source_file: doc.source_file,
                pages: doc.pages,
                state: doc.state,
            },
        )?;
        Ok(self.state.document(&id)?.clone())
    }

    pub fn set_document_state(&mut self, id: &DocumentId, to: DocumentState, actor: &str) -> Result<()> {
        let from = self.state.document(id)?.state;
        if from == DocumentState::Certified {
            return Err(Error::DocumentCertified(id.clone()));
        }
        if from != to {
            self.commit(
                actor,
                Event::DocumentStateChanged {
                    document_id: id.clone(),
                    from,
                    to,
                },
            )?;
        }
        Ok(())
    }

    fn ensure_document_open(&self, id: &DocumentId) -> Result<&DocumentRecord> {
        let doc = self.state.document(id)?;
        if doc.state == DocumentState::Certified {
            return Err(Error::CertifiedImmutable(format!("document {id} is certified")));
        }
        Ok(doc)
    }

    /// Whether any document registered in `graph_id` is certified.
    pub fn graph_frozen(&self, graph_id: &GraphId) -> bool {
        self.state
            .documents()
            .any(|d| &d.graph_id == graph_id && d.state == DocumentState::Certified)
    }

    pub fn upsert_entity(&mut self, graph_id: &GraphId, name: &str, actor: &str) -> Result<EntityNode> {
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::EmptyName);
        }
        let graph = self.state.graph(graph_id)?;
        if let Some(node) = graph.entity(name) {
            return Ok(node.clone());
        }
        if self.graph_frozen(graph_id) {
            return Err(Error::CertifiedImmutable(format!("graph {graph_id} is frozen")));
        }
        self.commit(
            actor,
            Event::EntityUpserted {
                graph_id: graph_id.clone(),
                name: name.to_string(),
            },
        )?;
        Ok(self.state.graph(graph_id)?.entity(name).expect("just inserted").clone())
    }

    fn check_provenance(&self, graph_id: &GraphId, prov: &Provenance) -> Result<()> {
        let doc = self.ensure_document_open(&prov.document_id)?;
        if &doc.graph_id != graph_id {
            return Err(Error::InvalidProvenance(format!(
                "document {} belongs to graph {}",
                doc.id, doc.graph_id
            )));
        }
        if let Some(page) = prov.page {
            if !doc.pages.is_empty() && doc.page_text(page).is_none() {
                return Err(Error::InvalidProvenance(format!("document {} has no page {page}", doc.id)));
            }
        }
        if let Some(sentence) = &prov.evidence_sentence {
            let needle = collapse_whitespace(sentence);
            let found = match prov.page {
                Some(page) => doc
                    .page_text(page)
                    .is_some_and(|text| collapse_whitespace(text).contains(&needle)),
                None => doc.pages.iter().any(|p| collapse_whitespace(&p.text).contains(&needle)),
            };
            if !found {
                return Err(Error::InvalidProvenance(
                    "evidence sentence is not in the document text".into(),
                ));
            }
        }
        Ok(())
    }

    fn find_duplicate(&self, graph_id: &GraphId, spo: &Spo, doc: &DocumentId) -> Option<&TripleRecord> {
        self.state.graph(graph_id).ok()?.live_triples().find(|t| {
            t.subject == spo.subject
                && t.predicate == spo.predicate
                && t.object == spo.object
                && &t.provenance.document_id == doc
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn insert_triple(
        &mut self,
        graph_id: &GraphId,
        subject: &str,
        predicate: &str,
        object: &str,
        provenance: Provenance,
        origin: Origin,
        actor: &str,
    ) -> Result<Inserted> {
        let spo = Spo {
            subject: non_empty(subject, "subject")?,
            predicate: non_empty(predicate, "predicate")?,
            object: non_empty(object, "object")?,
        };
        self.state.graph(graph_id)?;
        self.check_provenance(graph_id, &provenance)?;
        if let Some(existing) = self.find_duplicate(graph_id, &spo, &provenance.document_id) {
            return Ok(Inserted {
                record: existing.clone(),
                deduplicated: true,
            });
        }
        let triple_id = TripleId(self.state.next_ids().triple);
        self.commit(
            actor,
            Event::TripleInserted {
                graph_id: graph_id.clone(),
                triple_id,
                subject: spo.subject,
                predicate: spo.predicate,
                object: spo.object,
                provenance,
                origin,
            },
        )?;
        Ok(Inserted {
            record: self.state.triple(triple_id)?.clone(),
            deduplicated: false,
        })
    }

    /// Looks up a triple and checks it belongs to `graph_id`.
    pub fn triple_in(&self, graph_id: &GraphId, id: TripleId) -> Result<&TripleRecord> {
        self.state.graph(graph_id)?;
        let t = self.state.triple(id)?;
        if &t.graph_id != graph_id {
            return Err(Error::NotFound(format!("triple {id} in graph {graph_id}")));
        }
        Ok(t)
    }

    pub fn update_triple(
        &mut self,
        graph_id: &GraphId,
        id: TripleId,
        patch: &TriplePatch,
        actor: &str,
    ) -> Result<TripleRecord> {
        let current = self.triple_in(graph_id, id)?;
        if current.status == TripleStatus::Certified {
            return Err(Error::CertifiedImmutable(format!("triple {id} is certified")));
        }
        self.ensure_document_open(&current.provenance.document_id)?;
        let before = current.spo();
        let after = Spo {
            subject: match &patch.subject {
                Some(s) => non_empty(s, "subject")?,
                None => before.subject.clone(),
            },
            predicate: match &patch.predicate {
                Some(p) => non_empty(p, "predicate")?,
                None => before.predicate.clone(),
            },
            object: match &patch.object {
                Some(o) => non_empty(o, "object")?,
                None => before.object.clone(),
            },
        };
        if after == before {
            return Ok(current.clone());
        }
        self.commit(
            actor,
            Event::TripleUpdated {
                graph_id: graph_id.clone(),
                triple_id: id,
                before,
                after,
            },
        )?;
        Ok(self.state.triple(id)?.clone())
    }

    pub fn soft_delete_triple(&mut self, graph_id: &GraphId, id: TripleId, actor: &str) -> Result<TripleRecord> {
        let t = self.triple_in(graph_id, id)?;
        if t.deleted {
            return Err(Error::AlreadyDeleted(id));
        }
        self.ensure_document_open(&t.provenance.document_id)?;
        self.commit(
            actor,
            Event::TripleDeleted {
                graph_id: graph_id.clone(),
                triple_id: id,
            },
        )?;
        Ok(self.state.triple(id)?.clone())
    }

    pub fn restore_triple(&mut self, graph_id: &GraphId, id: TripleId, actor: &str) -> Result<TripleRecord> {
        let t = self.triple_in(graph_id, id)?;
        if !t.deleted {
            return Err(Error::NotDeleted(id));
        }
        if t.status == TripleStatus::Rejected {
            return Err(Error::WrongState(format!(
                "triple {id} was rejected at finalization; finalize it again instead"
            )));
        }
        self.ensure_document_open(&t.provenance.document_id)?;
        self.commit(
            actor,
            Event::TripleRestored {
                graph_id: graph_id.clone(),
                triple_id: id,
            },
        )?;
        Ok(self.state.triple(id)?.clone())
    }
}
