//! On-demand LLM verification of a single triple.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{JudgmentId, TripleId};
use crate::llm::{complete_with_retry, LlmClient, LlmRequest, RetryPolicy};
use crate::prompts::{render, PromptRegistry};
use crate::store::model::Spo;
use crate::store::{Event, GraphStore, State};

use super::rbac::{ActionKind, Principal};
use super::review::{check_confidence, Judgment, ReviewAction, Verdict, VERIFIER_REVIEWER};

/// Placeholder used when a triple carries no evidence sentence.
pub const NO_EVIDENCE: &str = "[No source sentence stored]";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifierAssessment {
    pub verdict: Verdict,
    pub confidence: f64,
    pub reasoning: String,
    pub evidence_quote: String,
    pub issues: Vec<String>,
    pub suggested_triplet: Spo,
    pub expert_action_hint: ReviewAction,
}

/// Strict parse: the whole response must be the JSON object, with every
/// field present and nothing extra.
pub fn parse_assessment(text: &str) -> Result<VerifierAssessment> {
    let violation = |reason: String| Error::SchemaViolation {
        reason,
        raw: text.to_string(),
    };
    let a: VerifierAssessment = serde_json::from_str(text).map_err(|e| violation(e.to_string()))?;
    check_confidence(Some(a.confidence)).map_err(|e| violation(e.to_string()))?;
    Ok(a)
}

/// Builds the verification request for one triple.
pub fn verifier_request(
    state: &State,
    triple_id: TripleId,
    registry: &PromptRegistry,
    llm: &dyn LlmClient,
) -> Result<LlmRequest> {
    let t = state.triple(triple_id)?;
    let doc = state.document(&t.provenance.document_id)?;
    let page = t.provenance.page.map(|p| p.to_string());
    let user = render(
        registry.get("evaluation.user")?,
        &[
            ("doc_name", &doc.title),
            ("source_file", doc.source_file.as_deref().unwrap_or("N/A")),
            ("source_page", page.as_deref().unwrap_or("N/A")),
            ("subject", &t.subject),
            ("predicate", &t.predicate),
            ("object", &t.object),
            ("evidence", t.provenance.evidence_sentence.as_deref().unwrap_or(NO_EVIDENCE)),
        ],
    );
    Ok(llm.request(registry.get("evaluation.system")?, &user))
}

/// Stores an assessment as a machine judgment. Verifier judgments
/// accumulate; they never replace each other or a human judgment.
pub fn record_assessment(
    store: &mut GraphStore,
    principal: &Principal,
    triple_id: TripleId,
    assessment: &VerifierAssessment,
) -> Result<Judgment> {
    principal.authorize(ActionKind::RunVerifier)?;
    store.state().triple(triple_id)?;
    let judgment = Judgment {
        id: JudgmentId(store.state().next_ids().judgment),
        triple_id,
        reviewer: VERIFIER_REVIEWER.to_string(),
        action: assessment.expert_action_hint,
        suggested_triple: Some(assessment.suggested_triplet.clone()),
        feedback: assessment.reasoning.clone(),
        verdict: Some(assessment.verdict),
        confidence: Some(assessment.confidence),
        assessment: Some(assessment.clone()),
        created_at: store.clock().now(),
    };
    store.commit(
        &principal.actor(),
        Event::JudgmentRecorded {
            judgment: judgment.clone(),
            replaces: None,
        },
    )?;
    Ok(judgment)
}

pub fn run_verifier(
    store: &mut GraphStore,
    principal: &Principal,
    triple_id: TripleId,
    registry: &PromptRegistry,
    llm: &dyn LlmClient,
    retry: RetryPolicy,
) -> Result<(VerifierAssessment, Judgment)> {
    principal.authorize(ActionKind::RunVerifier)?;
    let request = verifier_request(store.state(), triple_id, registry, llm)?;
    let text = complete_with_retry(llm, &request, retry)?;
    let assessment = parse_assessment(&text)?;
    let judgment = record_assessment(store, principal, triple_id, &assessment)?;
    Ok((assessment, judgment))
}
