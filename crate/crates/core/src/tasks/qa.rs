//! Question answering over one graph: symbolic retrieval first, optional
//! LLM summary second.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::GraphId;
use crate::llm::{complete_with_retry, LlmClient, RetryPolicy};
use crate::prompts::{render, PromptRegistry};
use crate::store::model::{EdgeFilter, GraphStats, Path, Provenance, Subgraph};
use crate::store::{State, DEFAULT_EDGE_CAP};

use super::keywords::{extract_keywords, match_entities, EntityMatch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct KgqaOptions {
    pub hops: usize,
    pub top_k: usize,
    pub max_paths: usize,
    pub edge_cap: usize,
}

impl Default for KgqaOptions {
    fn default() -> Self {
        Self {
            hops: 2,
            top_k: 5,
            max_paths: 5,
            edge_cap: DEFAULT_EDGE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KgqaResult {
    pub question: String,
    pub keywords: Vec<String>,
    pub matched_entities: Vec<EntityMatch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    pub reasoning_paths: Vec<Path>,
    pub evidence_subgraph: Subgraph,
    pub provenance: Vec<Provenance>,
}

/// The retrieval half of [`kgqa`]; never calls a model.
pub fn kgqa_retrieve(state: &State, graph_id: &GraphId, question: &str, opts: &KgqaOptions) -> Result<KgqaResult> {
    let keywords = extract_keywords(question);
    let mut matched = match_entities(state, graph_id, &keywords)?;
    if matched.is_empty() {
        return Err(Error::NoEntityMatch);
    }
    matched.truncate(opts.top_k.max(1));

    let mut nodes = BTreeMap::new();
    let mut edges = BTreeMap::new();
    let mut truncated = false;
    for m in &matched {
        let sub = state.query_neighborhood(graph_id, &m.entity, opts.hops.max(1), &EdgeFilter::default(), opts.edge_cap.max(1))?;
        truncated |= sub.truncated;
        nodes.extend(sub.nodes.into_iter().map(|n| (n.id, n)));
        edges.extend(sub.edges.into_iter().map(|e| (e.id, e)));
    }
    let edges: Vec<_> = edges.into_values().collect();
    let nodes: Vec<_> = nodes.into_values().collect();
    let reasoning_paths = match &matched[..] {
        [a, b, ..] => state.find_paths(graph_id, &a.entity, &b.entity, opts.hops.max(1) + 1, opts.max_paths.max(1))?,
        _ => Vec::new(),
    };
    let provenance = edges.iter().map(|e| e.provenance.clone()).collect();
    Ok(KgqaResult {
        question: question.to_string(),
        keywords,
        matched_entities: matched,
        answer: None,
        reasoning_paths,
        evidence_subgraph: Subgraph {
            stats: GraphStats::from_edges(&edges, 0),
            nodes,
            edges,
            truncated,
        },
        provenance,
    })
}

/// One fact per line, as handed to the model.
pub fn serialize_facts(sub: &Subgraph) -> String {
    sub.edges
        .iter()
        .map(|e| format!("({}, {}, {})", e.subject, e.predicate, e.object))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn kgqa(
    state: &State,
    graph_id: &GraphId,
    question: &str,
    opts: &KgqaOptions,
    llm: Option<(&dyn LlmClient, &PromptRegistry, RetryPolicy)>,
) -> Result<KgqaResult> {
    tracing::info!(task = "kgqa", graph = %graph_id, question);
    let mut result = kgqa_retrieve(state, graph_id, question, opts)?;
    if let Some((client, registry, retry)) = llm {
        let user = render(
            registry.get("qa.user")?,
            &[("question", question), ("facts", &serialize_facts(&result.evidence_subgraph))],
        );
        let request = client.request(registry.get("qa.system")?, &user);
        result.answer = Some(complete_with_retry(client, &request, retry)?.trim().to_string());
    }
    Ok(result)
}
