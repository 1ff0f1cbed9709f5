//! One shared instance of everything a service needs: the graph store, the
//! account registry, the model client and the prompt registry.
//!
//! Every method takes the acting [`Principal`] and authorizes before it
//! touches a module. Reads share the store lock; writes take it exclusively.
//! Model calls never run under the write lock: ingestion extracts with no
//! lock held, and verification builds its request under a read lock.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock, RwLockReadGuard};
use serde::{Deserialize, Serialize};

use crate::clock::{Clock, Timestamp};
use crate::document::{CertificationRecord, DocumentRecord, DocumentState, StandardId};
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::fusion::{apply_merge_plan, build_fused_preview, detect_overlaps, FusedGraph, MergePlan, MergeResult, OverlapReport};
use crate::governance::{
    aggregate, certify_document, meta_finalize_triple, parse_assessment, readiness, record_assessment,
    submit_judgment, verifier_request, Account, AccountStore, AccountsConfig, ActionKind, Aggregate,
    FinalVerdict, IssuedResetToken, Judgment, JudgmentInput, Principal, ReadinessConfig, ReadinessReport,
    Role, Session, VerifierAssessment,
};
use crate::ids::{AccountId, DocumentId, GraphId, TripleId};
use crate::ingest::{begin_ingest, finish_ingest, run_extraction, ChunkConfig, IngestConfig, IngestReport, Intake};
use crate::llm::{complete_with_retry, LlmClient, RetryPolicy};
use crate::prompts::PromptRegistry;
use crate::store::{
    verify_file, AuditEntry, EdgeExport, EdgeFilter, GraphStats, GraphStore, Inserted, Origin, Path as GraphPath,
    Provenance, Subgraph, TriplePatch, TripleRecord, TripleStatus, VerifyReport,
};
use crate::tasks::{
    bounded_hop, checklist_by_name, compare_entities, coverage_gaps, detect_duplicates, kgqa, path_search,
    provenance_trace, run_analysis, schema_diagnostics, AnalysisOutcome, AnalysisRequest, Checklist,
    ComparisonReport, DiagnosticsReport, DuplicatePair, GapReport, KgqaOptions, KgqaResult, TraceFilter, TraceRow,
    DEFAULT_MAX_EDIT_DISTANCE,
};

pub const DEFAULT_EDGE_CAP: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HubConfig {
    pub ingest: IngestConfig,
    pub readiness: ReadinessConfig,
    pub accounts: AccountsConfig,
    pub edge_cap: usize,
    pub retry: RetryPolicy,
    pub exec: ExecMode,
}

impl Default for HubConfig {
    fn default() -> Self {
        Self {
            ingest: IngestConfig::default(),
            readiness: ReadinessConfig::default(),
            accounts: AccountsConfig::default(),
            edge_cap: DEFAULT_EDGE_CAP,
            retry: RetryPolicy::default(),
            exec: ExecMode::default(),
        }
    }
}

/// File layout inside a data directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPaths {
    pub log: PathBuf,
    pub snapshot: PathBuf,
    pub accounts: PathBuf,
}

impl DataPaths {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            log: dir.join("events.jsonl"),
            snapshot: dir.join("snapshot.json"),
            accounts: dir.join("accounts.json"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Running,
    Completed,
    Failed,
}

/// Progress of one background ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestJob {
    pub document_id: DocumentId,
    pub status: JobStatus,
    pub chunks_done: usize,
    pub chunks_total: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Per-request knobs layered over the configured ingestion settings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOverrides {
    #[serde(default)]
    pub standard: Option<StandardId>,
    #[serde(default)]
    pub chunk_size: Option<usize>,
    #[serde(default)]
    pub overlap: Option<usize>,
}

impl IngestOverrides {
    pub fn apply(&self, base: &IngestConfig) -> Result<IngestConfig> {
        let mut cfg = *base;
        if let Some(s) = self.standard {
            cfg.standard_override = Some(s);
        }
        cfg.chunk = ChunkConfig {
            chunk_size: self.chunk_size.unwrap_or(cfg.chunk.chunk_size),
            overlap: self.overlap.unwrap_or(cfg.chunk.overlap),
        };
        cfg.chunk.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogSort {
    #[default]
    Name,
    Status,
    Date,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub document_id: DocumentId,
    pub graph_id: GraphId,
    pub title: String,
    pub standard: StandardId,
    pub state: DocumentState,
    pub triple_count: usize,
    pub created_at: Timestamp,
}

/// A document without its page text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentView {
    pub id: DocumentId,
    pub graph_id: GraphId,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_file: Option<String>,
    pub standard: StandardId,
    pub state: DocumentState,
    pub page_count: usize,
    pub created_at: Timestamp,
    pub created_by: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certification: Option<CertificationRecord>,
}

impl From<&DocumentRecord> for DocumentView {
    fn from(d: &DocumentRecord) -> Self {
        Self {
            id: d.id.clone(),
            graph_id: d.graph_id.clone(),
            title: d.title.clone(),
            source_file: d.source_file.clone(),
            standard: d.standard,
            state: d.state,
            page_count: d.pages.len(),
            created_at: d.created_at,
            created_by: d.created_by.clone(),
            certification: d.certification.clone(),
        }
    }
}

/// Polled by clients while a document ingests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportView {
    pub document_id: DocumentId,
    pub state: DocumentState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub job: Option<IngestJob>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<IngestReport>,
}

/// An expert-authored triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewTriple {
    pub document_id: DocumentId,
    pub subject: String,
    pub predicate: String,
    pub object: String,
    #[serde(default)]
    pub page: Option<u32>,
    #[serde(default)]
    pub evidence_sentence: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleView {
    pub triple: TripleRecord,
    pub judgments: Vec<Judgment>,
    pub aggregate: Aggregate,
}

/// The stored evidence for a triple, never re-derived from page text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceView {
    pub triple_id: TripleId,
    pub document_id: DocumentId,
    pub page: Option<u32>,
    pub chunk_index: Option<usize>,
    pub evidence_sentence: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub assessment: VerifierAssessment,
    pub judgment: Judgment,
}

/// An account as shown to administrators; the password hash stays inside.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountView {
    pub id: AccountId,
    pub username: String,
    pub role: Role,
    pub active: bool,
    pub created_at: Timestamp,
}

impl From<&Account> for AccountView {
    fn from(a: &Account) -> Self {
        Self {
            id: a.id,
            username: a.username.clone(),
            role: a.role,
            active: a.active,
            created_at: a.created_at,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditQuery {
    #[serde(default)]
    pub document_id: Option<DocumentId>,
    #[serde(default)]
    pub from_seq: Option<u64>,
}

/// Edge export selection. Rejected triples stay out unless asked for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportQuery {
    pub graph_id: GraphId,
    #[serde(default)]
    pub filter: EdgeFilter,
    #[serde(default)]
    pub include_rejected: bool,
}

pub struct Hub {
    store: RwLock<GraphStore>,
    accounts: Mutex<AccountStore>,
    llm: Arc<dyn LlmClient>,
    prompts: PromptRegistry,
    config: HubConfig,
    jobs: Arc<Mutex<HashMap<DocumentId, IngestJob>>>,
}

impl std::fmt::Debug for Hub {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hub")
            .field("model_id", &self.llm.model_id())
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl Hub {
    pub fn new(
        store: GraphStore,
        accounts: AccountStore,
        llm: Arc<dyn LlmClient>,
        prompts: PromptRegistry,
        config: HubConfig,
    ) -> Self {
        Self {
            store: RwLock::new(store),
            accounts: Mutex::new(accounts),
            llm,
            prompts,
            config,
            jobs: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    /// Everything in memory; for tests and one-shot tools.
    pub fn in_memory(llm: Arc<dyn LlmClient>, prompts: PromptRegistry, config: HubConfig, clock: Arc<dyn Clock>) -> Self {
        Self::new(
            GraphStore::in_memory(clock.clone()),
            AccountStore::in_memory(config.accounts, clock),
            llm,
            prompts,
            config,
        )
    }

    /// Opens (or creates) the store and account files under `dir`. A
    /// snapshot, when present, is used to skip replaying the log prefix.
    pub fn open(
        dir: impl AsRef<Path>,
        llm: Arc<dyn LlmClient>,
        prompts: PromptRegistry,
        config: HubConfig,
        clock: Arc<dyn Clock>,
    ) -> Result<Self> {
        std::fs::create_dir_all(dir.as_ref())?;
        let paths = DataPaths::new(dir);
        let store = if paths.snapshot.exists() {
            GraphStore::open_with_snapshot(&paths.log, &paths.snapshot, clock.clone())?
        } else {
            GraphStore::open(&paths.log, clock.clone())?
        };
        let accounts = AccountStore::open(&paths.accounts, config.accounts, clock)?;
        Ok(Self::new(store, accounts, llm, prompts, config))
    }

    pub fn config(&self) -> &HubConfig {
        &self.config
    }

    pub fn llm(&self) -> &Arc<dyn LlmClient> {
        &self.llm
    }

    pub fn prompts(&self) -> &PromptRegistry {
        &self.prompts
    }

    /// Shared read access to the store.
    pub fn store(&self) -> RwLockReadGuard<'_, GraphStore> {
        self.store.read()
    }

    pub fn write_snapshot(&self, path: impl AsRef<Path>) -> Result<()> {
        self.store.read().write_snapshot(path)
    }

    // Sessions and accounts.

    pub fn login(&self, username: &str, password: &str) -> Result<Session> {
        self.accounts.lock().authenticate(username, password)
    }

    pub fn guest_session(&self) -> Session {
        self.accounts.lock().guest_session()
    }

    pub fn principal(&self, token: &str) -> Result<Principal> {
        self.accounts.lock().session(token)
    }

    pub fn logout(&self, token: &str) -> bool {
        self.accounts.lock().logout(token)
    }

    /// Creates an account with no permission check, for bootstrapping.
    pub fn bootstrap_account(&self, actor: &str, username: &str, password: &str, role: Role) -> Result<AccountView> {
        let mut accounts = self.accounts.lock();
        let mut store = self.store.write();
        accounts
            .create_unchecked(&mut store, actor, username, password, role)
            .map(|a| AccountView::from(&a))
    }

    pub fn create_account(&self, by: &Principal, username: &str, password: &str, role: Role) -> Result<AccountView> {
        by.authorize(ActionKind::ManageAccounts)?;
        let mut accounts = self.accounts.lock();
        let mut store = self.store.write();
        accounts
            .create_account(&mut store, by, username, password, role)
            .map(|a| AccountView::from(&a))
    }

    pub fn list_accounts(&self, by: &Principal) -> Result<Vec<AccountView>> {
        by.authorize(ActionKind::ManageAccounts)?;
        Ok(self.accounts.lock().accounts().iter().map(AccountView::from).collect())
    }

    pub fn deactivate_account(&self, by: &Principal, id: AccountId) -> Result<AccountView> {
        by.authorize(ActionKind::ManageAccounts)?;
        let mut accounts = self.accounts.lock();
        let mut store = self.store.write();
        accounts.deactivate(&mut store, by, id).map(|a| AccountView::from(&a))
    }

    pub fn issue_reset_token(&self, by: &Principal, id: AccountId) -> Result<IssuedResetToken> {
        by.authorize(ActionKind::ManageAccounts)?;
        let mut accounts = self.accounts.lock();
        let mut store = self.store.write();
        accounts.issue_reset_token(&mut store, by, id)
    }

    pub fn revoke_reset_token(&self, by: &Principal, token: &str) -> Result<()> {
        by.authorize(ActionKind::ManageAccounts)?;
        let mut accounts = self.accounts.lock();
        let mut store = self.store.write();
        accounts.revoke_reset_token(&mut store, by, token)
    }

    pub fn reset_password(&self, token: &str, new_password: &str) -> Result<()> {
        let mut accounts = self.accounts.lock();
        let mut store = self.store.write();
        accounts.reset_password(&mut store, token, new_password)
    }

    // Catalog and documents.

    pub fn catalog(&self, by: &Principal, sort: CatalogSort) -> Result<Vec<CatalogEntry>> {
        by.authorize(ActionKind::Read)?;
        let store = self.store.read();
        let state = store.state();
        let mut out: Vec<CatalogEntry> = state
            .documents()
            .map(|d| CatalogEntry {
                document_id: d.id.clone(),
                graph_id: d.graph_id.clone(),
                title: d.title.clone(),
                standard: d.standard,
                state: d.state,
                triple_count: state.document_triples(d).filter(|t| !t.deleted).count(),
                created_at: d.created_at,
            })
            .collect();
        match sort {
            CatalogSort::Name => out.sort_by(|a, b| a.title.cmp(&b.title).then_with(|| a.document_id.cmp(&b.document_id))),
            CatalogSort::Status => out.sort_by(|a, b| a.state.cmp(&b.state).then_with(|| a.title.cmp(&b.title))),
            CatalogSort::Date => out.sort_by(|a, b| b.created_at.cmp(&a.created_at).then_with(|| a.document_id.cmp(&b.document_id))),
        }
        Ok(out)
    }

    pub fn document(&self, by: &Principal, id: &DocumentId) -> Result<DocumentView> {
        by.authorize(ActionKind::Read)?;
        Ok(DocumentView::from(self.store.read().state().document(id)?))
    }

    pub fn report(&self, by: &Principal, id: &DocumentId) -> Result<ReportView> {
        by.authorize(ActionKind::Read)?;
        let store = self.store.read();
        let doc = store.state().document(id)?;
        Ok(ReportView {
            document_id: doc.id.clone(),
            state: doc.state,
            job: self.jobs.lock().get(id).cloned(),
            report: doc.report.clone(),
        })
    }

    pub fn ingest_job(&self, id: &DocumentId) -> Option<IngestJob> {
        self.jobs.lock().get(id).cloned()
    }

    /// Runs a whole ingestion on the calling thread.
    pub fn ingest(&self, by: &Principal, intake: Intake, overrides: IngestOverrides) -> Result<IngestReport> {
        by.authorize(ActionKind::Ingest)?;
        let cfg = overrides.apply(&self.config.ingest)?;
        let (doc, started) = self.begin(by, intake)?;
        self.extract_and_finish(by, &doc, &cfg, started)
    }

    /// Registers the document and extracts on a background thread. Poll
    /// [`Hub::report`] for progress.
    pub fn start_ingest(self: &Arc<Self>, by: &Principal, intake: Intake, overrides: IngestOverrides) -> Result<DocumentView> {
        by.authorize(ActionKind::Ingest)?;
        let cfg = overrides.apply(&self.config.ingest)?;
        let (doc, started) = self.begin(by, intake)?;
        let hub = Arc::clone(self);
        let by = by.clone();
        let view = DocumentView::from(&doc);
        std::thread::spawn(move || {
            let _ = hub.extract_and_finish(&by, &doc, &cfg, started);
        });
        Ok(view)
    }

    fn begin(&self, by: &Principal, intake: Intake) -> Result<(DocumentRecord, Timestamp)> {
        let mut store = self.store.write();
        let started = store.clock().now();
        let doc = begin_ingest(&mut store, intake, &by.actor())?;
        self.jobs.lock().insert(
            doc.id.clone(),
            IngestJob {
                document_id: doc.id.clone(),
                status: JobStatus::Running,
                chunks_done: 0,
                chunks_total: 0,
                error: None,
            },
        );
        Ok((doc, started))
    }

    fn extract_and_finish(
        &self,
        by: &Principal,
        doc: &DocumentRecord,
        cfg: &IngestConfig,
        started: Timestamp,
    ) -> Result<IngestReport> {
        let jobs = Arc::clone(&self.jobs);
        let id = doc.id.clone();
        let progress = move |done: usize, total: usize| {
            if let Some(job) = jobs.lock().get_mut(&id) {
                job.chunks_done = done;
                job.chunks_total = total;
            }
        };
        let extraction = run_extraction(&doc.pages, cfg, &self.prompts, self.llm.as_ref(), &progress)
            .inspect_err(|e| self.fail_job(&doc.id, e))?;
        // The job is settled under the write lock so readers never see a
        // finished document with a running job.
        let mut store = self.store.write();
        let result = finish_ingest(&mut store, &doc.id, extraction, started, &by.actor());
        match &result {
            Ok(report) => self.complete_job(report),
            Err(e) => self.fail_job(&doc.id, e),
        }
        result
    }

    fn complete_job(&self, report: &IngestReport) {
        if let Some(job) = self.jobs.lock().get_mut(&report.document_id) {
            job.status = JobStatus::Completed;
            job.chunks_done = report.chunk_count;
            job.chunks_total = report.chunk_count;
        }
    }

    fn fail_job(&self, id: &DocumentId, err: &Error) {
        tracing::warn!(document = %id, error = %err, "ingestion failed");
        if let Some(job) = self.jobs.lock().get_mut(id) {
            job.status = JobStatus::Failed;
            job.error = Some(err.to_string());
        }
    }

    /// Whole-graph view, or a neighborhood when `entity` is given.
    pub fn document_graph(
        &self,
        by: &Principal,
        id: &DocumentId,
        entity: Option<&str>,
        hops: usize,
        filter: &EdgeFilter,
        cap: Option<usize>,
    ) -> Result<Subgraph> {
        by.authorize(ActionKind::Read)?;
        if filter.include_deleted {
            by.authorize(ActionKind::ViewDeleted)?;
        }
        let cap = cap.unwrap_or(self.config.edge_cap);
        let store = self.store.read();
        let state = store.state();
        let graph_id = &state.document(id)?.graph_id;
        match entity {
            Some(e) => state.query_neighborhood(graph_id, e, hops, filter, cap),
            None => state.graph_overview(graph_id, filter, cap),
        }
    }

    // Triples.

    pub fn create_triple(&self, by: &Principal, new: NewTriple) -> Result<Inserted> {
        by.authorize(ActionKind::MutateTriple)?;
        let mut store = self.store.write();
        let doc = store.state().document(&new.document_id)?;
        if doc.state == DocumentState::Certified {
            return Err(Error::DocumentCertified(doc.id.clone()));
        }
        let graph_id = doc.graph_id.clone();
        let provenance = Provenance {
            document_id: new.document_id,
            page: new.page,
            chunk_index: None,
            evidence_sentence: new.evidence_sentence,
        };
        store.insert_triple(
            &graph_id,
            &new.subject,
            &new.predicate,
            &new.object,
            provenance,
            Origin::ExpertAdded,
            &by.actor(),
        )
    }

    pub fn triple(&self, by: &Principal, id: TripleId) -> Result<TripleView> {
        by.authorize(ActionKind::Read)?;
        let store = self.store.read();
        let state = store.state();
        let triple = state.triple(id)?.clone();
        if triple.deleted {
            by.authorize(ActionKind::ViewDeleted)?;
        }
        Ok(TripleView {
            judgments: state.review().judgments_for(id).into_iter().cloned().collect(),
            aggregate: aggregate(state, id)?,
            triple,
        })
    }

    pub fn update_triple(&self, by: &Principal, id: TripleId, patch: &TriplePatch) -> Result<TripleRecord> {
        by.authorize(ActionKind::MutateTriple)?;
        let mut store = self.store.write();
        let graph_id = store.state().triple(id)?.graph_id.clone();
        store.update_triple(&graph_id, id, patch, &by.actor())
    }

    pub fn delete_triple(&self, by: &Principal, id: TripleId) -> Result<TripleRecord> {
        by.authorize(ActionKind::MutateTriple)?;
        let mut store = self.store.write();
        let graph_id = store.state().triple(id)?.graph_id.clone();
        store.soft_delete_triple(&graph_id, id, &by.actor())
    }

    pub fn restore_triple(&self, by: &Principal, id: TripleId) -> Result<TripleRecord> {
        by.authorize(ActionKind::MutateTriple)?;
        let mut store = self.store.write();
        let graph_id = store.state().triple(id)?.graph_id.clone();
        store.restore_triple(&graph_id, id, &by.actor())
    }

    pub fn evidence(&self, by: &Principal, id: TripleId) -> Result<EvidenceView> {
        by.authorize(ActionKind::Read)?;
        let store = self.store.read();
        let t = store.state().triple(id)?;
        if t.deleted {
            by.authorize(ActionKind::ViewDeleted)?;
        }
        Ok(EvidenceView {
            triple_id: t.id,
            document_id: t.provenance.document_id.clone(),
            page: t.provenance.page,
            chunk_index: t.provenance.chunk_index,
            evidence_sentence: t.provenance.evidence_sentence.clone(),
        })
    }

    // Review.

    pub fn judge(&self, by: &Principal, id: TripleId, input: JudgmentInput) -> Result<Judgment> {
        by.authorize(ActionKind::Judge)?;
        submit_judgment(&mut self.store.write(), by, id, input)
    }

    pub fn verify_triple(&self, by: &Principal, id: TripleId) -> Result<VerifyOutcome> {
        by.authorize(ActionKind::RunVerifier)?;
        let request = verifier_request(self.store.read().state(), id, &self.prompts, self.llm.as_ref())?;
        let text = complete_with_retry(self.llm.as_ref(), &request, self.config.retry)?;
        let assessment = parse_assessment(&text)?;
        let judgment = record_assessment(&mut self.store.write(), by, id, &assessment)?;
        Ok(VerifyOutcome { assessment, judgment })
    }

    pub fn finalize(&self, by: &Principal, id: TripleId, verdict: FinalVerdict, note: &str) -> Result<TripleRecord> {
        by.authorize(ActionKind::FinalizeTriple)?;
        meta_finalize_triple(&mut self.store.write(), by, id, verdict, note)
    }

    pub fn readiness(&self, by: &Principal, id: &DocumentId) -> Result<ReadinessReport> {
        by.authorize(ActionKind::Read)?;
        readiness(self.store.read().state(), id, &self.config.readiness)
    }

    pub fn certify(&self, by: &Principal, id: &DocumentId) -> Result<CertificationRecord> {
        by.authorize(ActionKind::CertifyDocument)?;
        certify_document(&mut self.store.write(), by, id, &self.config.readiness)
    }

    // Fusion.

    pub fn overlaps(&self, by: &Principal, graph_ids: &[GraphId]) -> Result<OverlapReport> {
        by.authorize(ActionKind::Read)?;
        detect_overlaps(self.store.read().state(), graph_ids)
    }

    pub fn fused_preview(&self, by: &Principal, graph_ids: &[GraphId], cap: Option<usize>) -> Result<FusedGraph> {
        by.authorize(ActionKind::Read)?;
        build_fused_preview(self.store.read().state(), graph_ids, cap.unwrap_or(self.config.edge_cap))
    }

    pub fn merge(&self, by: &Principal, plan: MergePlan) -> Result<MergeResult> {
        by.authorize(ActionKind::MergeEntities)?;
        apply_merge_plan(&mut self.store.write(), by, plan)
    }

    // Tasks.

    pub fn kgqa(&self, by: &Principal, graph_id: &GraphId, question: &str, opts: &KgqaOptions, answer: bool) -> Result<KgqaResult> {
        by.authorize(ActionKind::RunTask)?;
        let llm = answer.then(|| (self.llm.as_ref(), &self.prompts, self.config.retry));
        kgqa(self.store.read().state(), graph_id, question, opts, llm)
    }

    pub fn paths(&self, by: &Principal, graph_id: &GraphId, source: &str, target: &str, max_hops: usize) -> Result<Vec<GraphPath>> {
        by.authorize(ActionKind::RunTask)?;
        path_search(self.store.read().state(), graph_id, source, target, max_hops)
    }

    pub fn neighborhood(&self, by: &Principal, graph_id: &GraphId, entity: &str, hops: usize) -> Result<Subgraph> {
        by.authorize(ActionKind::RunTask)?;
        bounded_hop(self.store.read().state(), graph_id, entity, hops)
    }

    pub fn compare(&self, by: &Principal, graph_id: &GraphId, entities: &[String]) -> Result<ComparisonReport> {
        by.authorize(ActionKind::RunTask)?;
        compare_entities(self.store.read().state(), graph_id, entities)
    }

    pub fn duplicates(&self, by: &Principal, graph_id: &GraphId, max_distance: Option<usize>) -> Result<Vec<DuplicatePair>> {
        by.authorize(ActionKind::RunTask)?;
        detect_duplicates(
            self.store.read().state(),
            graph_id,
            max_distance.unwrap_or(DEFAULT_MAX_EDIT_DISTANCE),
            self.config.exec,
        )
    }

    pub fn gaps(&self, by: &Principal, graph_id: &GraphId, checklist: Option<&str>) -> Result<GapReport> {
        by.authorize(ActionKind::RunTask)?;
        let store = self.store.read();
        let checklist = match checklist {
            Some(name) => checklist_by_name(name)?,
            None => Checklist::for_graph(store.state(), graph_id),
        };
        coverage_gaps(store.state(), graph_id, &checklist)
    }

    pub fn diagnostics(&self, by: &Principal, graph_id: &GraphId) -> Result<DiagnosticsReport> {
        by.authorize(ActionKind::RunTask)?;
        schema_diagnostics(self.store.read().state(), graph_id)
    }

    pub fn trace(&self, by: &Principal, graph_id: &GraphId, filter: &TraceFilter) -> Result<Vec<TraceRow>> {
        by.authorize(ActionKind::RunTask)?;
        provenance_trace(self.store.read().state(), graph_id, filter)
    }

    pub fn analytics(&self, by: &Principal, graph_id: &GraphId, req: &AnalysisRequest) -> Result<AnalysisOutcome> {
        by.authorize(ActionKind::RunTask)?;
        let store = self.store.read();
        run_analysis(store.state(), graph_id, req, &self.prompts, self.llm.as_ref(), self.config.retry)
    }

    pub fn stats(&self, by: &Principal, graph_id: &GraphId) -> Result<GraphStats> {
        by.authorize(ActionKind::Read)?;
        self.store.read().state().graph_stats(graph_id)
    }

    // Audit and export.

    /// Log entries from `from_seq` on. With a document id, only entries
    /// about that document or its triples.
    pub fn audit(&self, by: &Principal, query: &AuditQuery) -> Result<Vec<AuditEntry>> {
        by.authorize(ActionKind::ViewAudit)?;
        let store = self.store.read();
        let refs: Option<BTreeSet<String>> = match &query.document_id {
            Some(id) => {
                let doc = store.state().document(id)?;
                let mut refs: BTreeSet<String> = store.state().document_triples(doc).map(|t| t.id.to_string()).collect();
                refs.insert(id.to_string());
                Some(refs)
            }
            None => None,
        };
        let from = query.from_seq.unwrap_or(0);
        Ok(store
            .log()
            .entries()
            .iter()
            .filter(|e| e.seq >= from)
            .filter(|e| refs.as_ref().is_none_or(|r| r.contains(&e.subject_ref)))
            .cloned()
            .collect())
    }

    /// Checks the chain as stored on disk, or in memory for an unbacked store.
    pub fn verify_audit(&self, by: &Principal) -> Result<VerifyReport> {
        by.authorize(ActionKind::VerifyAudit)?;
        let store = self.store.read();
        match store.log().path() {
            Some(path) => verify_file(path),
            None => Ok(store.log().verify()),
        }
    }

    pub fn export(&self, by: &Principal, query: &ExportQuery) -> Result<EdgeExport> {
        by.authorize(ActionKind::Export)?;
        if query.filter.include_deleted {
            by.authorize(ActionKind::ViewDeleted)?;
        }
        let mut export = self.store.read().state().export_edges(&query.graph_id, &query.filter)?;
        if !query.include_rejected {
            export.rows.retain(|r| r.status != TripleStatus::Rejected);
        }
        Ok(export)
    }
}
