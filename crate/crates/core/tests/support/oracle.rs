//! Brute-force reference implementations for property tests. Nothing here
//! calls the library routine it is checked against.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use provkg_core::clock::FixedClock;
use provkg_core::document::DocumentState;
use provkg_core::ids::{DocumentId, GraphId};
use provkg_core::store::{EdgeFilter, GraphStore, NewDocument, Origin, Provenance, TripleRecord};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Chunk spans from the closed form: `n = 1 + ceil((len - size) / stride)`
/// windows once the text is longer than one chunk.
pub fn chunk_spans(len: usize, size: usize, overlap: usize) -> Vec<(usize, usize)> {
    if len == 0 {
        return Vec::new();
    }
    let stride = size - overlap;
    let n = if len <= size { 1 } else { 1 + (len - size).div_ceil(stride) };
    (0..n).map(|i| (i * stride, (i * stride + size).min(len))).collect()
}

pub struct RandomGraph {
    pub store: GraphStore,
    pub graph: GraphId,
    pub document: DocumentId,
    pub names: Vec<String>,
    pub predicates: Vec<String>,
}

pub fn new_store() -> GraphStore {
    GraphStore::in_memory(Arc::new(FixedClock::epoch()))
}

/// Creates `graph` with one draft document and returns the document id.
pub fn add_graph(store: &mut GraphStore, graph: &GraphId) -> DocumentId {
    store.create_graph(graph, "oracle").unwrap();
    let doc = DocumentId::new(format!("{graph}-doc"));
    store
        .register_document(
            NewDocument {
                id: doc.clone(),
                graph_id: graph.clone(),
                title: graph.to_string(),
                source_file: None,
                pages: vec![],
                state: DocumentState::Draft,
            },
            "oracle",
        )
        .unwrap();
    doc
}

pub fn insert(store: &mut GraphStore, graph: &GraphId, doc: &DocumentId, s: &str, p: &str, o: &str) {
    store
        .insert_triple(graph, s, p, o, Provenance::document(doc.clone()), Origin::LlmExtraction, "oracle")
        .unwrap();
}

/// Up to `max_nodes` entities and `max_edges` edges with self-loops,
/// parallel edges, isolated nodes and some soft deletes.
pub fn random_graph(seed: u64, max_nodes: usize, max_edges: usize) -> RandomGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = new_store();
    let graph = GraphId::new("r");
    let document = add_graph(&mut store, &graph);
    let n = rng.gen_range(2..=max_nodes);
    let names: Vec<String> = (0..n).map(|i| format!("n{i:02}")).collect();
    let predicates: Vec<String> = (0..4).map(|i| format!("p{i}")).collect();
    for name in &names {
        store.upsert_entity(&graph, name, "oracle").unwrap();
    }
    let m = rng.gen_range(0..=max_edges);
    for _ in 0..m {
        let s = names.choose(&mut rng).unwrap();
        let o = if rng.gen_bool(0.05) { s } else { names.choose(&mut rng).unwrap() };
        let p = predicates.choose(&mut rng).unwrap();
        insert(&mut store, &graph, &document, s, p, o);
    }
    let ids: Vec<_> = store.state().graph(&graph).unwrap().triples().map(|t| t.id).collect();
    for id in ids {
        if rng.gen_bool(0.1) {
            store.soft_delete_triple(&graph, id, "oracle").unwrap();
        }
    }
    RandomGraph {
        store,
        graph,
        document,
        names,
        predicates,
    }
}

pub fn edges<'a>(store: &'a GraphStore, graph: &GraphId) -> Vec<&'a TripleRecord> {
    store.state().graph(graph).unwrap().triples().collect()
}

fn admits(filter: &EdgeFilter, t: &TripleRecord) -> bool {
    (!t.deleted || filter.include_deleted)
        && filter.predicates.as_ref().is_none_or(|p| p.contains(&t.predicate))
        && filter.document_ids.as_ref().is_none_or(|d| d.contains(&t.provenance.document_id))
}

/// Undirected hop distances by repeated relaxation until nothing changes.
pub fn distances(edges: &[&TripleRecord], from: &str) -> BTreeMap<String, usize> {
    let mut dist = BTreeMap::from([(from.to_string(), 0usize)]);
    loop {
        let mut changed = false;
        for t in edges {
            for (a, b) in [(&t.subject, &t.object), (&t.object, &t.subject)] {
                if let Some(&da) = dist.get(a.as_str()) {
                    let better = dist.get(b.as_str()).is_none_or(|&db| da + 1 < db);
                    if better {
                        dist.insert(b.clone(), da + 1);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return dist;
        }
    }
}

/// Node names within `hops`, and ids of admitted edges with an endpoint
/// strictly inside the radius, in id order.
pub fn neighborhood(
    store: &GraphStore,
    graph: &GraphId,
    center: &str,
    hops: usize,
    filter: &EdgeFilter,
) -> (BTreeSet<String>, Vec<u64>) {
    let admitted: Vec<&TripleRecord> = edges(store, graph).into_iter().filter(|t| admits(filter, t)).collect();
    let dist = distances(&admitted, center);
    let nodes = dist.iter().filter(|(_, &d)| d <= hops).map(|(n, _)| n.clone()).collect();
    let inside = |n: &str| dist.get(n).is_some_and(|&d| d < hops);
    let mut ids: Vec<u64> = admitted
        .iter()
        .filter(|t| inside(&t.subject) || inside(&t.object))
        .map(|t| t.id.0)
        .collect();
    ids.sort_unstable();
    (nodes, ids)
}

/// One simple path: node names, edge ids and walk directions.
pub type OraclePath = (Vec<String>, Vec<u64>, Vec<bool>);

/// Every simple path of at most `max_hops` live, non-loop edges, ordered by
/// length, node sequence and edge ids, then cut to `max_paths`.
pub fn all_paths(
    store: &GraphStore,
    graph: &GraphId,
    source: &str,
    target: &str,
    max_hops: usize,
    max_paths: usize,
) -> Vec<OraclePath> {
    let live: Vec<&TripleRecord> = edges(store, graph)
        .into_iter()
        .filter(|t| !t.deleted && t.subject != t.object)
        .collect();
    let mut found = Vec::new();
    if source == target {
        return found;
    }
    let mut stack: Vec<OraclePath> = vec![(vec![source.to_string()], vec![], vec![])];
    while let Some((nodes, ids, dirs)) = stack.pop() {
        let here = nodes.last().unwrap().clone();
        if here == target {
            found.push((nodes, ids, dirs));
            continue;
        }
        if ids.len() == max_hops {
            continue;
        }
        for t in &live {
            for (from, to, forward) in [(&t.subject, &t.object, true), (&t.object, &t.subject, false)] {
                if *from == here && !nodes.contains(to) {
                    let mut n = nodes.clone();
                    n.push(to.clone());
                    let mut i = ids.clone();
                    i.push(t.id.0);
                    let mut d = dirs.clone();
                    d.push(forward);
                    stack.push((n, i, d));
                }
            }
        }
    }
    found.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| a.0.cmp(&b.0)).then_with(|| a.1.cmp(&b.1)));
    found.truncate(max_paths);
    found
}

/// Live facts as `(subject, predicate, object)` with each name mapped.
pub fn live_facts(store: &GraphStore, graph: &GraphId, map: impl Fn(&str) -> String) -> Vec<(String, String, String)> {
    let mut v: Vec<_> = edges(store, graph)
        .into_iter()
        .filter(|t| !t.deleted)
        .map(|t| (map(&t.subject), t.predicate.clone(), map(&t.object)))
        .collect();
    v.sort();
    v
}

/// Lowercased alphanumerics; every run of anything else becomes one space.
pub fn normalize(name: &str) -> String {
    let mut out = String::new();
    let mut gap = false;
    for c in name.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            if gap && !out.is_empty() {
                out.push(' ');
            }
            gap = false;
            out.push(c);
        } else {
            gap = true;
        }
    }
    out
}
