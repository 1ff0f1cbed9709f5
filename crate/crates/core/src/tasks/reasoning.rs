//! Bounded-hop views, path search and entity comparison.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::GraphId;
use crate::store::model::{EdgeFilter, Path, Subgraph};
use crate::store::{State, DEFAULT_EDGE_CAP};

/// Upper bound on hops for task-level traversals.
pub const MAX_TASK_HOPS: usize = 4;
pub const DEFAULT_MAX_PATHS: usize = 20;

fn check_hops(hops: usize) -> Result<()> {
    if hops == 0 || hops > MAX_TASK_HOPS {
        return Err(Error::InvalidArgument(format!("hops must be in 1..={MAX_TASK_HOPS}")));
    }
    Ok(())
}

pub fn bounded_hop(state: &State, graph_id: &GraphId, entity: &str, hops: usize) -> Result<Subgraph> {
    check_hops(hops)?;
    tracing::info!(task = "bounded_hop", graph = %graph_id, entity, hops);
    state.query_neighborhood(graph_id, entity, hops, &EdgeFilter::default(), DEFAULT_EDGE_CAP)
}

pub fn path_search(state: &State, graph_id: &GraphId, source: &str, target: &str, max_hops: usize) -> Result<Vec<Path>> {
    check_hops(max_hops)?;
    tracing::info!(task = "path_search", graph = %graph_id, source, target, max_hops);
    state.find_paths(graph_id, source, target, max_hops, DEFAULT_MAX_PATHS)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub entities: Vec<String>,
    pub fact_counts: BTreeMap<String, usize>,
    pub shared_predicates: BTreeSet<String>,
    pub unique_predicates: BTreeMap<String, BTreeSet<String>>,
}

/// Compares 2 to 5 distinct entities by their live incident triples.
pub fn compare_entities(state: &State, graph_id: &GraphId, entities: &[String]) -> Result<ComparisonReport> {
    let graph = state.graph(graph_id)?;
    let mut names: Vec<String> = Vec::new();
    for e in entities {
        let e = e.trim();
        if !names.iter().any(|n| n == e) {
            names.push(e.to_string());
        }
    }
    if names.len() < 2 {
        return Err(Error::TooFewEntities);
    }
    if names.len() > 5 {
        return Err(Error::InvalidArgument("at most five entities can be compared".into()));
    }
    let mut fact_counts = BTreeMap::new();
    let mut preds: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for n in &names {
        if graph.entity(n).is_none() {
            return Err(Error::UnknownEntity(n.clone()));
        }
        let live: Vec<_> = graph.incident(n).filter(|t| !t.deleted).collect();
        fact_counts.insert(n.clone(), live.len());
        preds.insert(n.clone(), live.iter().map(|t| t.predicate.clone()).collect());
    }
    let mut sets = preds.values();
    let first = sets.next().cloned().unwrap_or_default();
    let shared_predicates = sets.fold(first, |acc, s| acc.intersection(s).cloned().collect());
    let unique_predicates = preds
        .iter()
        .map(|(n, own)| {
            let others: BTreeSet<&String> = preds.iter().filter(|(m, _)| *m != n).flat_map(|(_, s)| s).collect();
            (n.clone(), own.iter().filter(|p| !others.contains(p)).cloned().collect())
        })
        .collect();
    tracing::info!(task = "compare_entities", graph = %graph_id, count = names.len());
    Ok(ComparisonReport {
        entities: names,
        fact_counts,
        shared_predicates,
        unique_predicates,
    })
}
