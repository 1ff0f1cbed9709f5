//! Preset-driven LLM analysis of a graph.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::ids::GraphId;
use crate::llm::{complete_with_retry, LlmClient, LlmRequest, RetryPolicy};
use crate::prompts::{render, PromptRegistry};
use crate::store::log::sha256_hex;
use crate::store::State;

use super::quality::{coverage_gaps, detect_duplicates, schema_diagnostics, Checklist, DEFAULT_MAX_EDIT_DISTANCE};

pub const PRESETS: [&str; 4] = ["executive", "quality_audit", "compliance", "ontology_health"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HealthStatus {
    Good,
    Watch,
    Risk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    High,
    Medium,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    H,
    M,
    L,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HealthItem {
    pub title: String,
    pub status: HealthStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskItem {
    pub title: String,
    pub severity: Severity,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapItem {
    pub topic: String,
    pub reason: String,
    pub priority: Severity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionableTriple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub issue: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecommendedAction {
    pub title: String,
    pub impact: Level,
    pub effort: Level,
    pub confidence: Level,
    pub why: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisReport {
    pub overview: String,
    pub graph_health: Vec<HealthItem>,
    pub top_risks: Vec<RiskItem>,
    pub coverage_gaps: Vec<GapItem>,
    pub questionable_triples: Vec<QuestionableTriple>,
    pub recommended_actions: Vec<RecommendedAction>,
    pub confidence_summary: String,
}

pub fn parse_analysis(text: &str) -> Result<AnalysisReport> {
    serde_json::from_str(text).map_err(|e| Error::SchemaViolation {
        reason: e.to_string(),
        raw: text.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisRequest {
    pub preset: String,
    pub depth: u8,
    #[serde(default)]
    pub user_prompt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisOutcome {
    pub graph_id: GraphId,
    pub preset: String,
    pub depth: u8,
    pub report: AnalysisReport,
    /// SHA-256 of the graph payload sent to the model.
    pub payload_digest: String,
}

fn wants_anomalies(prompt: Option<&str>) -> bool {
    prompt.is_some_and(|p| p.to_lowercase().contains("anomal"))
}

/// Graph facts embedded in the prompt. Depth 1 carries statistics, depth 2
/// adds schema diagnostics, depth 3 adds coverage gaps and duplicates.
/// Asking for anomalies in the user prompt pulls in diagnostics and
/// duplicates at any depth.
pub fn analysis_payload(state: &State, graph_id: &GraphId, depth: u8, user_prompt: Option<&str>) -> Result<serde_json::Value> {
    let mut payload = serde_json::json!({
        "graph_id": graph_id,
        "stats": state.graph_stats(graph_id)?,
    });
    let anomalies = wants_anomalies(user_prompt);
    let obj = payload.as_object_mut().expect("object literal");
    let json = |v: Result<serde_json::Value, serde_json::Error>| v.map_err(|e| Error::Storage(e.to_string()));
    if depth >= 2 || anomalies {
        obj.insert("diagnostics".into(), json(serde_json::to_value(schema_diagnostics(state, graph_id)?))?);
    }
    if depth >= 3 {
        let checklist = Checklist::for_graph(state, graph_id);
        obj.insert("coverage_gaps".into(), json(serde_json::to_value(coverage_gaps(state, graph_id, &checklist)?))?);
    }
    if depth >= 3 || anomalies {
        let dupes = detect_duplicates(state, graph_id, DEFAULT_MAX_EDIT_DISTANCE, ExecMode::Sequential)?;
        obj.insert("duplicate_candidates".into(), json(serde_json::to_value(dupes))?);
    }
    Ok(payload)
}

/// Builds the model request and the payload digest without calling a model.
pub fn analysis_request(
    state: &State,
    graph_id: &GraphId,
    req: &AnalysisRequest,
    registry: &PromptRegistry,
    llm: &dyn LlmClient,
) -> Result<(LlmRequest, String)> {
    if !PRESETS.contains(&req.preset.as_str()) {
        return Err(Error::InvalidArgument(format!("unknown preset `{}`", req.preset)));
    }
    if !(1..=3).contains(&req.depth) {
        return Err(Error::InvalidArgument("depth must be 1, 2 or 3".into()));
    }
    let user_prompt = req.user_prompt.as_deref().filter(|p| !p.trim().is_empty());
    let payload = analysis_payload(state, graph_id, req.depth, user_prompt)?;
    let payload_text = serde_json::to_string_pretty(&payload).map_err(|e| Error::Storage(e.to_string()))?;
    let system = render(
        registry.get("analysis.system")?,
        &[
            ("mode_instruction", registry.analysis_mode(req.depth)?),
            ("user_prompt", user_prompt.unwrap_or("(none)")),
            ("preset_prompt", registry.analysis_preset(&req.preset)?),
        ],
    );
    Ok((llm.request(&system, &payload_text), sha256_hex(payload_text.as_bytes())))
}

pub fn run_analysis(
    state: &State,
    graph_id: &GraphId,
    req: &AnalysisRequest,
    registry: &PromptRegistry,
    llm: &dyn LlmClient,
    retry: RetryPolicy,
) -> Result<AnalysisOutcome> {
    tracing::info!(task = "run_analysis", graph = %graph_id, preset = %req.preset, depth = req.depth);
    let (request, payload_digest) = analysis_request(state, graph_id, req, registry, llm)?;
    let text = complete_with_retry(llm, &request, retry)?;
    Ok(AnalysisOutcome {
        graph_id: graph_id.clone(),
        preset: req.preset.clone(),
        depth: req.depth,
        report: parse_analysis(&text)?,
        payload_digest,
    })
}
