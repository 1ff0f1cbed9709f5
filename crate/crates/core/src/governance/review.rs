//! Multi-expert judgments, meta finalization, readiness and certification.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;
use crate::document::{CertificationRecord, DocumentRecord, DocumentState};
use crate::error::{Error, Result};
use crate::ids::{DocumentId, JudgmentId, TripleId};
use crate::store::model::{Spo, TripleRecord, TripleStatus};
use crate::store::{Event, GraphStore, State};

use super::rbac::{ActionKind, Principal};
use super::verifier::VerifierAssessment;

/// Reviewer name recorded on machine judgments.
pub const VERIFIER_REVIEWER: &str = "llm-verifier";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReviewAction {
    Keep,
    Edit,
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Correct,
    NeedsImprovement,
    Incorrect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinalVerdict {
    Certify,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub id: JudgmentId,
    pub triple_id: TripleId,
    pub reviewer: String,
    pub action: ReviewAction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggested_triple: Option<Spo>,
    pub feedback: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    /// Full verifier output; only on machine judgments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assessment: Option<VerifierAssessment>,
    pub created_at: Timestamp,
}

impl Judgment {
    pub fn is_human(&self) -> bool {
        self.reviewer != VERIFIER_REVIEWER
    }
}

/// What a reviewer submits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentInput {
    pub action: ReviewAction,
    #[serde(default)]
    pub suggested_triple: Option<Spo>,
    #[serde(default)]
    pub feedback: String,
    #[serde(default)]
    pub verdict: Option<Verdict>,
    #[serde(default)]
    pub confidence: Option<f64>,
    /// With `delete`, also soft-deletes the triple.
    #[serde(default)]
    pub apply: bool,
}

impl JudgmentInput {
    pub fn new(action: ReviewAction) -> Self {
        Self {
            action,
            suggested_triple: None,
            feedback: String::new(),
            verdict: None,
            confidence: None,
            apply: false,
        }
    }

    pub fn feedback(mut self, text: impl Into<String>) -> Self {
        self.feedback = text.into();
        self
    }

    pub fn suggest(mut self, spo: Spo) -> Self {
        self.suggested_triple = Some(spo);
        self
    }

    pub fn apply(mut self) -> Self {
        self.apply = true;
        self
    }
}

pub(crate) fn check_confidence(c: Option<f64>) -> Result<()> {
    match c {
        Some(c) if !(0.0..=1.0).contains(&c) => {
            Err(Error::InvalidArgument(format!("confidence {c} is outside [0, 1]")))
        }
        _ => Ok(()),
    }
}

fn document_of<'a>(state: &'a State, triple: &TripleRecord) -> Result<&'a DocumentRecord> {
    state.document(&triple.provenance.document_id)
}

/// Records or replaces the reviewer's judgment. Judgments are opinions: the
/// triple only changes when a delete carries `apply`.
pub fn submit_judgment(
    store: &mut GraphStore,
    principal: &Principal,
    triple_id: TripleId,
    input: JudgmentInput,
) -> Result<Judgment> {
    principal.authorize(ActionKind::Judge)?;
    let state = store.state();
    let triple = state.triple(triple_id)?;
    let doc = document_of(state, triple)?;
    match doc.state {
        DocumentState::Certified => return Err(Error::DocumentCertified(doc.id.clone())),
        DocumentState::Ingesting => {
            return Err(Error::WrongState(format!("document {} is still ingesting", doc.id)))
        }
        DocumentState::Draft | DocumentState::UnderReview => {}
    }
    if triple.deleted {
        return Err(Error::WrongState(format!("triple {triple_id} is deleted")));
    }
    if input.action == ReviewAction::Edit && input.suggested_triple.is_none() {
        return Err(Error::InvalidArgument("an edit judgment needs a suggested triple".into()));
    }
    check_confidence(input.confidence)?;
    let reviewer = principal.actor();
    if reviewer == VERIFIER_REVIEWER {
        return Err(Error::InvalidArgument(format!("`{VERIFIER_REVIEWER}` is reserved")));
    }
    let replaces = state
        .review()
        .judgments_for(triple_id)
        .into_iter()
        .find(|j| j.reviewer == reviewer)
        .map(|j| j.id);
    let (doc_id, doc_state, graph_id) = (doc.id.clone(), doc.state, triple.graph_id.clone());
    let judgment = Judgment {
        id: JudgmentId(state.next_ids().judgment),
        triple_id,
        reviewer: reviewer.clone(),
        action: input.action,
        suggested_triple: input.suggested_triple,
        feedback: input.feedback,
        verdict: input.verdict,
        confidence: input.confidence,
        assessment: None,
        created_at: store.clock().now(),
    };
    store.commit(
        &reviewer,
        Event::JudgmentRecorded {
            judgment: judgment.clone(),
            replaces,
        },
    )?;
    if doc_state == DocumentState::Draft {
        store.set_document_state(&doc_id, DocumentState::UnderReview, &reviewer)?;
    }
    if input.action == ReviewAction::Delete && input.apply {
        store.soft_delete_triple(&graph_id, triple_id, &reviewer)?;
    }
    Ok(judgment)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aggregate {
    pub triple_id: TripleId,
    /// Count of human judgments per action.
    pub human_actions: BTreeMap<ReviewAction, usize>,
    /// Latest verifier verdict, reported separately from human review.
    pub verifier: Option<Verdict>,
    pub conflict: bool,
    pub meta_verdict: Option<FinalVerdict>,
}

impl Aggregate {
    pub fn human_count(&self) -> usize {
        self.human_actions.values().sum()
    }

    /// The single action all human reviewers agree on, if any.
    pub fn unanimous(&self) -> Option<ReviewAction> {
        match self.human_actions.keys().collect::<Vec<_>>()[..] {
            [a] => Some(*a),
            _ => None,
        }
    }
}

pub fn aggregate(state: &State, triple_id: TripleId) -> Result<Aggregate> {
    state.triple(triple_id)?;
    let review = state.review();
    let judgments = review.judgments_for(triple_id);
    let mut human_actions = BTreeMap::new();
    for j in judgments.iter().filter(|j| j.is_human()) {
        *human_actions.entry(j.action).or_insert(0) += 1;
    }
    let verifier = judgments
        .iter()
        .rev()
        .find(|j| !j.is_human())
        .and_then(|j| j.verdict);
    Ok(Aggregate {
        triple_id,
        conflict: human_actions.len() >= 2,
        human_actions,
        verifier,
        meta_verdict: review.finalization(triple_id).map(|f| f.verdict),
    })
}

pub fn meta_finalize_triple(
    store: &mut GraphStore,
    principal: &Principal,
    triple_id: TripleId,
    verdict: FinalVerdict,
    note: &str,
) -> Result<TripleRecord> {
    principal.authorize(ActionKind::FinalizeTriple)?;
    let state = store.state();
    let triple = state.triple(triple_id)?;
    let doc = document_of(state, triple)?;
    match doc.state {
        DocumentState::UnderReview => {}
        DocumentState::Certified => return Err(Error::DocumentCertified(doc.id.clone())),
        s => {
            return Err(Error::WrongState(format!(
                "document {} is {s:?}, not under review",
                doc.id
            )))
        }
    }
    if triple.status != TripleStatus::Draft {
        return Err(Error::WrongState(format!(
            "triple {triple_id} is already {:?}",
            triple.status
        )));
    }
    let graph_id = triple.graph_id.clone();
    store.commit(
        &principal.actor(),
        Event::TripleFinalized {
            graph_id,
            triple_id,
            verdict,
            note: note.to_string(),
        },
    )?;
    Ok(store.state().triple(triple_id)?.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReadinessConfig {
    pub coverage_threshold: f64,
    pub min_judgments: usize,
}

impl Default for ReadinessConfig {
    fn default() -> Self {
        Self {
            coverage_threshold: 1.0,
            min_judgments: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadinessReport {
    pub document_id: DocumentId,
    /// Non-deleted triples of the document.
    pub total_triples: usize,
    pub reviewed_triples: usize,
    pub coverage: f64,
    pub unresolved_conflicts: usize,
    pub finalized_triples: usize,
    pub certifiable: bool,
    /// Every triple ever inserted for the document, deleted or not.
    pub inserted_triples: usize,
    /// Triples that are certified or would be promoted by certification now.
    pub retained_triples: usize,
    pub retention: f64,
    /// Verifier said INCORRECT while a human said keep.
    pub high_risk: Vec<TripleId>,
}

/// What certification would do to each triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    AlreadyCertified,
    Promote,
    Reject,
    Stay,
}

fn outcome(triple: &TripleRecord, agg: &Aggregate, cfg: &ReadinessConfig) -> Outcome {
    match triple.status {
        TripleStatus::Certified => return Outcome::AlreadyCertified,
        TripleStatus::Rejected => return Outcome::Stay,
        TripleStatus::Draft => {}
    }
    if agg.human_count() < cfg.min_judgments.max(1) {
        return Outcome::Stay;
    }
    match agg.unanimous() {
        Some(ReviewAction::Keep | ReviewAction::Edit) if !triple.deleted => Outcome::Promote,
        Some(ReviewAction::Delete) => Outcome::Reject,
        _ => Outcome::Stay,
    }
}

fn plan(state: &State, document_id: &DocumentId, cfg: &ReadinessConfig) -> Result<(ReadinessReport, Vec<TripleId>, Vec<TripleId>)> {
    let doc = state.document(document_id)?;
    let mut r = ReadinessReport {
        document_id: document_id.clone(),
        total_triples: 0,
        reviewed_triples: 0,
        coverage: 1.0,
        unresolved_conflicts: 0,
        finalized_triples: 0,
        certifiable: false,
        inserted_triples: 0,
        retained_triples: 0,
        retention: 0.0,
        high_risk: Vec::new(),
    };
    let (mut promote, mut reject) = (Vec::new(), Vec::new());
    for t in state.document_triples(doc) {
        r.inserted_triples += 1;
        let agg = aggregate(state, t.id)?;
        let finalized = agg.meta_verdict.is_some();
        if finalized {
            r.finalized_triples += 1;
        }
        match outcome(t, &agg, cfg) {
            Outcome::AlreadyCertified => r.retained_triples += 1,
            Outcome::Promote => {
                r.retained_triples += 1;
                promote.push(t.id);
            }
            Outcome::Reject => reject.push(t.id),
            Outcome::Stay => {}
        }
        if t.deleted {
            continue;
        }
        r.total_triples += 1;
        if finalized || agg.human_count() >= cfg.min_judgments.max(1) {
            r.reviewed_triples += 1;
        }
        if agg.conflict && !finalized {
            r.unresolved_conflicts += 1;
        }
        if agg.verifier == Some(Verdict::Incorrect) && agg.human_actions.contains_key(&ReviewAction::Keep) {
            r.high_risk.push(t.id);
        }
    }
    if r.total_triples > 0 {
        r.coverage = r.reviewed_triples as f64 / r.total_triples as f64;
    }
    if r.inserted_triples > 0 {
        r.retention = r.retained_triples as f64 / r.inserted_triples as f64;
    }
    r.certifiable = r.coverage >= cfg.coverage_threshold && r.unresolved_conflicts == 0;
    Ok((r, promote, reject))
}

pub fn readiness(state: &State, document_id: &DocumentId, cfg: &ReadinessConfig) -> Result<ReadinessReport> {
    plan(state, document_id, cfg).map(|(r, _, _)| r)
}

/// Promotes unanimous keep/edit triples, rejects unanimous deletes, marks
/// the document certified and freezes its graph.
pub fn certify_document(
    store: &mut GraphStore,
    principal: &Principal,
    document_id: &DocumentId,
    cfg: &ReadinessConfig,
) -> Result<CertificationRecord> {
    principal.authorize(ActionKind::CertifyDocument)?;
    let doc = store.state().document(document_id)?;
    match doc.state {
        DocumentState::Certified => return Err(Error::DocumentCertified(doc.id.clone())),
        DocumentState::Ingesting => {
            return Err(Error::WrongState(format!("document {} is still ingesting", doc.id)))
        }
        _ => {}
    }
    let (report, promoted, rejected) = plan(store.state(), document_id, cfg)?;
    if !report.certifiable {
        return Err(Error::NotReady(Box::new(report)));
    }
    let certification = CertificationRecord {
        document_id: document_id.clone(),
        certified_at: store.clock().now(),
        certified_by: principal.actor(),
        triple_count: report.retained_triples,
    };
    store.commit(
        &principal.actor(),
        Event::DocumentCertified {
            certification: certification.clone(),
            promoted,
            rejected,
        },
    )?;
    Ok(certification)
}
