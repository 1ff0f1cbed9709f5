//! Cross-graph entity normalization, overlap detection, fused previews and
//! expert merge plans.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::governance::{ActionKind, Principal};
use crate::ids::{DocumentId, GraphId, TripleId};
use crate::store::model::{GraphStats, TripleStatus};
use crate::store::{Event, Graph, GraphStore, State};

/// Lowercases, turns every character that is neither alphanumeric nor
/// whitespace into a space, then collapses whitespace.
pub fn normalize_entity(name: &str) -> String {
    let spaced: String = name
        .chars()
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_alphanumeric() || c.is_whitespace() { c } else { ' ' })
        .collect();
    spaced.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedName {
    pub original: String,
    pub normalized: String,
}

impl NormalizedName {
    pub fn new(original: impl Into<String>) -> Self {
        let original = original.into();
        let normalized = normalize_entity(&original);
        Self { original, normalized }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharedEntity {
    pub normalized: String,
    pub variants_per_graph: BTreeMap<GraphId, BTreeSet<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamingConflict {
    pub normalized: String,
    pub variants: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub shared_entities: Vec<SharedEntity>,
    pub naming_conflicts: Vec<NamingConflict>,
    /// Normalized classes found in only one graph.
    pub per_graph_unique_counts: BTreeMap<GraphId, usize>,
}

fn resolve_graphs<'a>(state: &'a State, graph_ids: &[GraphId]) -> Result<Vec<&'a Graph>> {
    if graph_ids.len() < 2 {
        return Err(Error::NeedTwoGraphs);
    }
    let mut seen = HashSet::new();
    graph_ids
        .iter()
        .filter(|g| seen.insert(*g))
        .map(|g| state.graph(g))
        .collect()
}

/// Entities shown in views: endpoints of live edges plus entities no triple
/// references at all.
fn visible_entities(graph: &Graph) -> BTreeSet<&str> {
    let referenced: HashSet<&str> = graph
        .triples()
        .flat_map(|t| [t.subject.as_str(), t.object.as_str()])
        .collect();
    graph
        .live_triples()
        .flat_map(|t| [t.subject.as_str(), t.object.as_str()])
        .chain(
            graph
                .entities()
                .map(|e| e.name.as_str())
                .filter(|n| !referenced.contains(n)),
        )
        .collect()
}

pub fn detect_overlaps(state: &State, graph_ids: &[GraphId]) -> Result<OverlapReport> {
    let graphs = resolve_graphs(state, graph_ids)?;
    let mut classes: BTreeMap<String, BTreeMap<GraphId, BTreeSet<String>>> = BTreeMap::new();
    for g in &graphs {
        for e in g.entities() {
            classes
                .entry(normalize_entity(&e.name))
                .or_default()
                .entry(g.id.clone())
                .or_default()
                .insert(e.name.clone());
        }
    }
    let mut report = OverlapReport {
        per_graph_unique_counts: graphs.iter().map(|g| (g.id.clone(), 0)).collect(),
        ..Default::default()
    };
    for (normalized, per_graph) in classes {
        if per_graph.len() < 2 {
            for g in per_graph.keys() {
                *report.per_graph_unique_counts.entry(g.clone()).or_default() += 1;
            }
            continue;
        }
        let variants: BTreeSet<String> = per_graph.values().flatten().cloned().collect();
        if variants.len() >= 2 {
            report.naming_conflicts.push(NamingConflict {
                normalized: normalized.clone(),
                variants,
            });
        }
        report.shared_entities.push(SharedEntity {
            normalized,
            variants_per_graph: per_graph,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusedMember {
    pub graph_id: GraphId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusedNode {
    pub normalized: String,
    pub members: Vec<FusedMember>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusedEdge {
    pub origin: GraphId,
    pub triple_id: TripleId,
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusedSummary {
    pub node_count: usize,
    pub edge_count: usize,
    /// Classes holding two or more original nodes.
    pub merged_class_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusedGraph {
    pub nodes: Vec<FusedNode>,
    pub edges: Vec<FusedEdge>,
    pub truncated: bool,
    /// Describes the full union, before the edge cap.
    pub summary: FusedSummary,
}

/// Read-only union of graphs over normalized entity classes.
pub fn build_fused_preview(state: &State, graph_ids: &[GraphId], edge_cap: usize) -> Result<FusedGraph> {
    let graphs = resolve_graphs(state, graph_ids)?;
    let mut classes: BTreeMap<String, Vec<FusedMember>> = BTreeMap::new();
    let mut edges = Vec::new();
    for g in &graphs {
        for name in visible_entities(g) {
            classes.entry(normalize_entity(name)).or_default().push(FusedMember {
                graph_id: g.id.clone(),
                name: name.to_string(),
            });
        }
        edges.extend(g.live_triples().map(|t| FusedEdge {
            origin: g.id.clone(),
            triple_id: t.id,
            subject: normalize_entity(&t.subject),
            predicate: t.predicate.clone(),
            object: normalize_entity(&t.object),
        }));
    }
    let summary = FusedSummary {
        node_count: classes.len(),
        edge_count: edges.len(),
        merged_class_count: classes.values().filter(|m| m.len() >= 2).count(),
    };
    let truncated = edges.len() > edge_cap;
    edges.truncate(edge_cap);
    Ok(FusedGraph {
        nodes: classes
            .into_iter()
            .map(|(normalized, members)| FusedNode { normalized, members })
            .collect(),
        edges,
        truncated,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MergeAction {
    Rename { graph_id: GraphId, from: String, to: String },
    Merge { graph_id: GraphId, from: Vec<String>, to: String },
}

impl MergeAction {
    fn graph_id(&self) -> &GraphId {
        match self {
            MergeAction::Rename { graph_id, .. } | MergeAction::Merge { graph_id, .. } => graph_id,
        }
    }

    fn sources(&self) -> Vec<&str> {
        match self {
            MergeAction::Rename { from, .. } => vec![from.as_str()],
            MergeAction::Merge { from, .. } => from.iter().map(String::as_str).collect(),
        }
    }

    fn target(&self) -> &str {
        match self {
            MergeAction::Rename { to, .. } | MergeAction::Merge { to, .. } => to.trim(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    #[default]
    Proposed,
    Applied,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergePlan {
    pub actions: Vec<MergeAction>,
    #[serde(default)]
    pub author: String,
    #[serde(default)]
    pub status: PlanStatus,
}

impl MergePlan {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("merge plan: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeResult {
    pub renamed: usize,
    pub merged: usize,
    /// Triples soft-deleted because the merge made them exact duplicates.
    pub collapsed: Vec<TripleId>,
    pub resulting_stats: BTreeMap<GraphId, GraphStats>,
    pub plan: MergePlan,
}

fn validate(store: &GraphStore, plan: &MergePlan) -> Result<()> {
    if plan.actions.is_empty() {
        return Err(Error::InvalidArgument("merge plan has no actions".into()));
    }
    let mut touched: HashMap<&GraphId, HashSet<&str>> = HashMap::new();
    for action in &plan.actions {
        let gid = action.graph_id();
        let graph = store.state().graph(gid)?;
        if store.graph_frozen(gid) {
            return Err(Error::CertifiedImmutable(format!("graph {gid} is certified")));
        }
        let to = action.target();
        if to.is_empty() {
            return Err(Error::EmptyName);
        }
        let sources = action.sources();
        if sources.is_empty() {
            return Err(Error::InvalidArgument("action has no source entity".into()));
        }
        let names = touched.entry(gid).or_default();
        let mut mine: HashSet<&str> = sources.iter().copied().collect();
        mine.insert(to);
        if let Some(clash) = mine.iter().find(|n| names.contains(*n)) {
            return Err(Error::PlanConflict(format!("`{clash}` in graph {gid} is touched twice")));
        }
        for name in &sources {
            if graph.entity(name).is_none() {
                return Err(Error::UnknownEntity(name.to_string()));
            }
            let frozen = graph
                .incident(name)
                .find(|t| t.status == TripleStatus::Certified && *name != to);
            if let Some(t) = frozen {
                return Err(Error::CertifiedImmutable(format!("triple {} is certified", t.id)));
            }
        }
        names.extend(mine);
    }
    Ok(())
}

/// Live triples that become exact duplicates of an earlier live triple once
/// every name in `from` is rewritten to `to`.
fn collapsed_by(graph: &Graph, from: &[String], to: &str) -> Vec<TripleId> {
    let map = |n: &str| -> String {
        if from.iter().any(|f| f == n) {
            to.to_string()
        } else {
            n.to_string()
        }
    };
    let mut seen: HashSet<(String, &str, String, &DocumentId)> = HashSet::new();
    graph
        .live_triples()
        .filter(|t| {
            !seen.insert((
                map(&t.subject),
                t.predicate.as_str(),
                map(&t.object),
                &t.provenance.document_id,
            ))
        })
        .map(|t| t.id)
        .collect()
}

/// Validates every action, then applies them in order. A rename onto an
/// existing name becomes a merge.
pub fn apply_merge_plan(store: &mut GraphStore, principal: &Principal, plan: MergePlan) -> Result<MergeResult> {
    principal.authorize(ActionKind::MergeEntities)?;
    validate(store, &plan)?;
    let actor = principal.actor();
    let (mut renamed, mut merged, mut collapsed) = (0, 0, Vec::new());
    let mut graphs = BTreeSet::new();
    for action in &plan.actions {
        let gid = action.graph_id().clone();
        let to = action.target().to_string();
        let graph = store.state().graph(&gid)?;
        let sources: Vec<String> = action
            .sources()
            .into_iter()
            .filter(|s| *s != to)
            .map(str::to_string)
            .collect();
        graphs.insert(gid.clone());
        if sources.is_empty() {
            continue;
        }
        let event = match action {
            MergeAction::Rename { .. } if graph.entity(&to).is_none() => {
                renamed += 1;
                Event::EntityRenamed {
                    graph_id: gid,
                    from: sources[0].clone(),
                    to,
                }
            }
            _ => {
                merged += 1;
                let dupes = collapsed_by(graph, &sources, &to);
                collapsed.extend(dupes.iter().copied());
                Event::EntitiesMerged {
                    graph_id: gid,
                    from: sources,
                    to,
                    collapsed: dupes,
                }
            }
        };
        store.commit(&actor, event)?;
    }
    let resulting_stats = graphs
        .into_iter()
        .map(|g| store.state().graph_stats(&g).map(|s| (g, s)))
        .collect::<Result<_>>()?;
    Ok(MergeResult {
        renamed,
        merged,
        collapsed,
        resulting_stats,
        plan: MergePlan {
            status: PlanStatus::Applied,
            author: if plan.author.is_empty() { actor } else { plan.author },
            actions: plan.actions,
        },
    })
}
