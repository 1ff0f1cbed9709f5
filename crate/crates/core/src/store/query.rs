//! Read-side graph queries. Everything here works on a `&State` snapshot.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::ids::GraphId;
use crate::store::model::{EdgeExport, EdgeFilter, EdgeRow, GraphStats, Path, PathStep, Subgraph, TripleRecord};
use crate::store::state::{Graph, State};

/// Undirected adjacency over a fixed edge list, in edge order.
struct Adjacency<'a> {
    edges: Vec<&'a TripleRecord>,
    by_node: HashMap<&'a str, Vec<usize>>,
}

impl<'a> Adjacency<'a> {
    fn build(edges: Vec<&'a TripleRecord>) -> Self {
        let mut by_node: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, t) in edges.iter().enumerate() {
            by_node.entry(t.subject.as_str()).or_default().push(i);
            if t.object != t.subject {
                by_node.entry(t.object.as_str()).or_default().push(i);
            }
        }
        Self { edges, by_node }
    }

    fn incident(&self, node: &str) -> &[usize] {
        self.by_node.get(node).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Hop distance from `from` to every reachable node.
    fn distances(&self, from: &'a str) -> HashMap<&'a str, usize> {
        let mut dist = HashMap::from([(from, 0usize)]);
        let mut queue = VecDeque::from([from]);
        while let Some(node) = queue.pop_front() {
            let d = dist[node];
            for &i in self.incident(node) {
                let t = self.edges[i];
                let other = if t.subject == node { t.object.as_str() } else { t.subject.as_str() };
                if !dist.contains_key(other) {
                    dist.insert(other, d + 1);
                    queue.push_back(other);
                }
            }
        }
        dist
    }
}

fn entity_or_err<'a>(graph: &'a Graph, name: &str) -> Result<&'a crate::store::model::EntityNode> {
    graph
        .entity(name)
        .ok_or_else(|| Error::UnknownEntity(name.to_string()))
}

impl State {
    /// Breadth-first expansion around `entity` over edges admitted by `filter`.
    ///
    /// An edge is included when at least one endpoint lies strictly inside
    /// the hop radius, i.e. it was traversed while expanding. Edges come back
    /// in insertion order; past `edge_cap` the rest are dropped and
    /// `truncated` is set.
    pub fn query_neighborhood(
        &self,
        graph_id: &GraphId,
        entity: &str,
        hops: usize,
        filter: &EdgeFilter,
        edge_cap: usize,
    ) -> Result<Subgraph> {
        if hops == 0 {
            return Err(Error::InvalidArgument("hops must be positive".into()));
        }
        if edge_cap == 0 {
            return Err(Error::InvalidArgument("edge cap must be positive".into()));
        }
        let graph = self.graph(graph_id)?;
        let center = entity_or_err(graph, entity)?;
        let adj = Adjacency::build(graph.triples().filter(|t| filter.admits(t)).collect());

        let mut dist: HashMap<&str, usize> = HashMap::from([(center.name.as_str(), 0)]);
        let mut order = vec![center.name.as_str()];
        let mut queue = VecDeque::from([center.name.as_str()]);
        let mut selected = BTreeSet::new();
        while let Some(node) = queue.pop_front() {
            let d = dist[node];
            if d >= hops {
                continue;
            }
            for &i in adj.incident(node) {
                selected.insert(i);
                let t = adj.edges[i];
                let other = if t.subject == node { t.object.as_str() } else { t.subject.as_str() };
                if !dist.contains_key(other) {
                    dist.insert(other, d + 1);
                    order.push(other);
                    queue.push_back(other);
                }
            }
        }

        let truncated = selected.len() > edge_cap;
        let edges: Vec<TripleRecord> = selected
            .into_iter()
            .take(edge_cap)
            .map(|i| adj.edges[i].clone())
            .collect();
        let nodes = if truncated {
            let kept: HashSet<&str> = edges
                .iter()
                .flat_map(|t| [t.subject.as_str(), t.object.as_str()])
                .collect();
            order
                .into_iter()
                .filter(|n| *n == center.name || kept.contains(n))
                .collect::<Vec<_>>()
        } else {
            order
        };
        let nodes: Vec<_> = nodes
            .into_iter()
            .filter_map(|n| graph.entity(n).cloned())
            .collect();
        let stats = subgraph_stats(nodes.len(), &edges);
        Ok(Subgraph {
            nodes,
            edges,
            truncated,
            stats,
        })
    }

    /// Simple undirected paths from `source` to `target` over live edges,
    /// shortest first, then by node-name sequence, then by edge ids.
    pub fn find_paths(
        &self,
        graph_id: &GraphId,
        source: &str,
        target: &str,
        max_hops: usize,
        max_paths: usize,
    ) -> Result<Vec<Path>> {
        let graph = self.graph(graph_id)?;
        let source = entity_or_err(graph, source)?.name.as_str();
        let target = entity_or_err(graph, target)?.name.as_str();
        if source == target || max_hops == 0 || max_paths == 0 {
            return Ok(Vec::new());
        }
        let adj = Adjacency::build(
            graph
                .live_triples()
                .filter(|t| t.subject != t.object)
                .collect(),
        );
        let to_target = adj.distances(target);
        let Some(&shortest) = to_target.get(source) else {
            return Ok(Vec::new());
        };

        let mut out = Vec::new();
        for len in shortest..=max_hops {
            let mut level: Vec<(Vec<&str>, Vec<usize>)> = Vec::new();
            let mut nodes = vec![source];
            let mut edges = Vec::new();
            walk(&adj, &to_target, target, len, &mut nodes, &mut edges, &mut level);
            level.sort_by(|a, b| {
                a.0.cmp(&b.0)
                    .then_with(|| {
                        let ia: Vec<_> = a.1.iter().map(|&i| adj.edges[i].id).collect();
                        let ib: Vec<_> = b.1.iter().map(|&i| adj.edges[i].id).collect();
                        ia.cmp(&ib)
                    })
            });
            for (nodes, edge_idx) in level {
                let steps = nodes
                    .windows(2)
                    .zip(&edge_idx)
                    .map(|(pair, &i)| {
                        let t = adj.edges[i];
                        PathStep {
                            triple_id: t.id,
                            from: pair[0].to_string(),
                            predicate: t.predicate.clone(),
                            to: pair[1].to_string(),
                            forward: t.subject == pair[0],
                        }
                    })
                    .collect();
                out.push(Path {
                    nodes: nodes.into_iter().map(str::to_owned).collect(),
                    steps,
                });
            }
            if out.len() >= max_paths {
                break;
            }
        }
        out.truncate(max_paths);
        Ok(out)
    }

    pub fn graph_stats(&self, graph_id: &GraphId) -> Result<GraphStats> {
        let graph = self.graph(graph_id)?;
        let referenced: HashSet<&str> = graph
            .triples()
            .flat_map(|t| [t.subject.as_str(), t.object.as_str()])
            .collect();
        let isolated = graph
            .entities()
            .filter(|e| !referenced.contains(e.name.as_str()))
            .count();
        Ok(GraphStats::from_edges(graph.triples(), isolated))
    }

    /// Every admitted edge of a graph in insertion order, capped.
    pub fn graph_overview(&self, graph_id: &GraphId, filter: &EdgeFilter, edge_cap: usize) -> Result<Subgraph> {
        if edge_cap == 0 {
            return Err(Error::InvalidArgument("edge cap must be positive".into()));
        }
        let graph = self.graph(graph_id)?;
        let admitted: Vec<&TripleRecord> = graph.triples().filter(|t| filter.admits(t)).collect();
        let truncated = admitted.len() > edge_cap;
        let edges: Vec<TripleRecord> = admitted.into_iter().take(edge_cap).cloned().collect();
        let mut seen = HashSet::new();
        let nodes: Vec<_> = edges
            .iter()
            .flat_map(|t| [t.subject.as_str(), t.object.as_str()])
            .filter(|n| seen.insert(*n))
            .filter_map(|n| graph.entity(n).cloned())
            .collect();
        let stats = subgraph_stats(nodes.len(), &edges);
        Ok(Subgraph {
            nodes,
            edges,
            truncated,
            stats,
        })
    }

    pub fn export_edges(&self, graph_id: &GraphId, filter: &EdgeFilter) -> Result<EdgeExport> {
        let graph = self.graph(graph_id)?;
        let rows = graph
            .triples()
            .filter(|t| filter.admits(t))
            .map(|t| EdgeRow {
                subject: t.subject.clone(),
                predicate: t.predicate.clone(),
                object: t.object.clone(),
                document_id: t.provenance.document_id.clone(),
                page: t.provenance.page,
                status: t.status,
            })
            .collect();
        Ok(EdgeExport { rows })
    }
}

fn subgraph_stats(node_count: usize, edges: &[TripleRecord]) -> GraphStats {
    let mut stats = GraphStats {
        node_count,
        ..GraphStats::default()
    };
    for t in edges {
        if t.deleted {
            stats.deleted_count += 1;
        } else {
            stats.edge_count += 1;
            *stats.predicate_histogram.entry(t.predicate.clone()).or_default() += 1;
        }
    }
    stats
}

/// Depth-first enumeration of simple paths with exactly `remaining` more edges.
fn walk<'a>(
    adj: &Adjacency<'a>,
    to_target: &HashMap<&'a str, usize>,
    target: &'a str,
    remaining: usize,
    nodes: &mut Vec<&'a str>,
    edges: &mut Vec<usize>,
    out: &mut Vec<(Vec<&'a str>, Vec<usize>)>,
) {
    let here = *nodes.last().expect("path starts at the source");
    if remaining == 0 {
        if here == target {
            out.push((nodes.clone(), edges.clone()));
        }
        return;
    }
    if here == target {
        return;
    }
    for &i in adj.incident(here) {
        let t = adj.edges[i];
        let next = if t.subject == here { t.object.as_str() } else { t.subject.as_str() };
        if nodes.contains(&next) {
            continue;
        }
        if to_target.get(next).is_none_or(|&d| d >= remaining) {
            continue;
        }
        nodes.push(next);
        edges.push(i);
        walk(adj, to_target, target, remaining - 1, nodes, edges, out);
        nodes.pop();
        edges.pop();
    }
}
