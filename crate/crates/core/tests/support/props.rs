//! Strategies and checks shared by the property tests and the acceptance run.
#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use provkg_core::fusion::{apply_merge_plan, detect_overlaps, normalize_entity, MergeAction, MergePlan};
use provkg_core::governance::{Principal, Role};
use provkg_core::ids::GraphId;
use provkg_core::ingest::{chunk_text, format_triple, parse_triple_lines, ChunkConfig};
use provkg_core::store::{EdgeFilter, Spo};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracle;

const ALPHABET: &[char] = &['a', 'b', ' ', '\n', 'é', '中', '🙂', 'z', '.', ','];

/// Text of `len` characters drawn from a mixed-width alphabet.
pub fn text_of(len: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| *ALPHABET.choose(&mut rng).unwrap()).collect()
}

/// `(len, chunk_size, overlap, seed)` within the documented limits.
pub fn chunk_case() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (0usize..=50_000, 100usize..=8000, any::<u64>())
        .prop_flat_map(|(len, size, seed)| (Just(len), Just(size), 0..size, Just(seed)))
}

pub fn check_chunking(len: usize, size: usize, overlap: usize, seed: u64) -> Result<(), TestCaseError> {
    let text = text_of(len, seed);
    let chars: Vec<char> = text.chars().collect();
    let chunks = chunk_text(&text, &ChunkConfig::new(size, overlap).unwrap()).unwrap();
    let spans: Vec<(usize, usize)> = chunks.iter().map(|c| (c.start, c.end)).collect();
    prop_assert_eq!(&spans, &oracle::chunk_spans(len, size, overlap));

    let mut covered = vec![false; len];
    for c in &chunks {
        prop_assert_eq!(c.text.chars().count(), c.end - c.start);
        prop_assert!(c.text.chars().eq(chars[c.start..c.end].iter().copied()));
        covered[c.start..c.end].iter_mut().for_each(|x| *x = true);
    }
    prop_assert!(covered.iter().all(|&x| x), "full coverage");
    for w in chunks.windows(2) {
        prop_assert_eq!(w[0].end - w[0].start, size, "only the last chunk may be short");
        prop_assert_eq!(w[0].end - w[1].start, overlap, "exact overlap");
    }
    if let Some(last) = chunks.last() {
        prop_assert_eq!(last.end, len);
        prop_assert!(last.end - last.start <= size);
        if chunks.len() > 1 {
            prop_assert!(chunks[chunks.len() - 2].end < len, "no redundant tail chunk");
        }
    }
    Ok(())
}

fn word() -> impl Strategy<Value = String> {
    prop_oneof![
        "[A-Za-z0-9%]{1,10}",
        "[à-öø-ÿ]{1,6}",
        Just("CO₂-e".to_string()),
        Just("温室效应".to_string()),
        Just("Scope 3".to_string()),
        "[a-z]{1,5}\\(x\\)",
    ]
}

fn phrase(max_words: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 1..=max_words).prop_map(|w| w.join(" "))
}

/// Subject and predicate hold no commas; the object may.
pub fn triple() -> impl Strategy<Value = Spo> {
    (phrase(4), phrase(3), prop::collection::vec(phrase(4), 1..=3))
        .prop_map(|(s, p, parts)| Spo::new(s, p, parts.join(", ")))
}

pub fn check_round_trip(spos: &[Spo], markers: &[u8]) -> Result<(), TestCaseError> {
    let lines: Vec<String> = spos
        .iter()
        .zip(markers.iter().cycle())
        .enumerate()
        .map(|(i, (t, m))| {
            let body = format_triple(&t.subject, &t.predicate, &t.object);
            match m % 4 {
                0 => body,
                1 => format!("- {body}"),
                2 => format!("{}. {body}", i + 1),
                _ => format!("  * {body}  "),
            }
        })
        .collect();
    let parsed = parse_triple_lines(&lines.join("\n"));
    prop_assert!(parsed.skipped.is_empty(), "{:?}", parsed.skipped);
    prop_assert!(parsed.trailing_text.is_empty());
    prop_assert_eq!(&parsed.triples, &spos.to_vec());
    Ok(())
}

/// Arbitrary input never panics and every non-blank line is accounted for.
pub fn check_total(text: &str) -> Result<(), TestCaseError> {
    let parsed = parse_triple_lines(text);
    let lines = text.lines().filter(|l| !l.trim().is_empty()).count();
    prop_assert_eq!(parsed.triples.len() + parsed.skipped.len(), lines);
    Ok(())
}

pub fn check_normalize(s: &str) -> Result<(), TestCaseError> {
    let once = normalize_entity(s);
    prop_assert_eq!(normalize_entity(&once), once.clone());
    prop_assert_eq!(once, oracle::normalize(s));
    Ok(())
}

/// Neighborhood and path queries agree with brute force on one graph.
pub fn check_queries(seed: u64) -> Result<(), TestCaseError> {
    let g = oracle::random_graph(seed, 50, 200);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let state = g.store.state();
    for _ in 0..4 {
        let center = g.names.choose(&mut rng).unwrap();
        let hops = rng.gen_range(1..=3);
        let filter = match rng.gen_range(0..3) {
            0 => EdgeFilter::default(),
            1 => EdgeFilter::include_deleted(),
            _ => EdgeFilter {
                predicates: Some(g.predicates.iter().take(2).cloned().collect()),
                ..EdgeFilter::default()
            },
        };
        let sub = state.query_neighborhood(&g.graph, center, hops, &filter, usize::MAX).unwrap();
        let (nodes, ids) = oracle::neighborhood(&g.store, &g.graph, center, hops, &filter);
        let got_nodes: BTreeSet<String> = sub.nodes.iter().map(|n| n.name.clone()).collect();
        prop_assert_eq!(got_nodes, nodes, "nodes around {} within {}", center, hops);
        let got_ids: Vec<u64> = sub.edges.iter().map(|t| t.id.0).collect();
        prop_assert_eq!(&got_ids, &ids);
        prop_assert!(!sub.truncated);
        if ids.len() > 1 {
            let cap = ids.len() / 2;
            let capped = state.query_neighborhood(&g.graph, center, hops, &filter, cap).unwrap();
            prop_assert!(capped.truncated);
            let capped_ids: Vec<u64> = capped.edges.iter().map(|t| t.id.0).collect();
            prop_assert_eq!(&capped_ids[..], &ids[..cap]);
        }

        let target = g.names.choose(&mut rng).unwrap();
        let max_hops = rng.gen_range(1..=4);
        let max_paths = rng.gen_range(1..=25);
        let paths = state.find_paths(&g.graph, center, target, max_hops, max_paths).unwrap();
        let got: Vec<oracle::OraclePath> = paths
            .iter()
            .map(|p| {
                (
                    p.nodes.clone(),
                    p.steps.iter().map(|s| s.triple_id.0).collect(),
                    p.steps.iter().map(|s| s.forward).collect(),
                )
            })
            .collect();
        prop_assert_eq!(got, oracle::all_paths(&g.store, &g.graph, center, target, max_hops, max_paths));
    }
    Ok(())
}

const BASES: [&str; 6] = ["Scope 1 emissions", "Energy use", "Water", "Oil and Gas", "Carbon price", "Land use"];

/// A surface variant that normalizes to the same class as `base`.
fn variant(base: &str, rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..4) {
        0 => base.to_string(),
        1 => base.to_uppercase(),
        2 => base.replace(' ', "-"),
        _ => format!("{}.", base.to_lowercase()),
    }
}

/// Three graphs naming the same things differently.
fn fusion_store(seed: u64) -> (provkg_core::store::GraphStore, Vec<GraphId>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = oracle::new_store();
    let graphs: Vec<GraphId> = ["fa", "fb", "fc"].into_iter().map(GraphId::new).collect();
    for g in &graphs {
        let doc = oracle::add_graph(&mut store, g);
        for _ in 0..rng.gen_range(1..=12) {
            let s = variant(BASES.choose(&mut rng).unwrap(), &mut rng);
            let o = variant(BASES.choose(&mut rng).unwrap(), &mut rng);
            let p = ["relates to", "reports", "affects"].choose(&mut rng).unwrap();
            oracle::insert(&mut store, g, &doc, &s, p, &o);
        }
    }
    (store, graphs)
}

pub fn check_overlap_permutation(seed: u64) -> Result<(), TestCaseError> {
    let (store, graphs) = fusion_store(seed);
    let base = detect_overlaps(store.state(), &graphs).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(7));
    for _ in 0..3 {
        let mut order = graphs.clone();
        order.shuffle(&mut rng);
        prop_assert_eq!(&detect_overlaps(store.state(), &order).unwrap(), &base);
    }
    Ok(())
}

fn names_of(store: &provkg_core::store::GraphStore, g: &GraphId) -> Vec<String> {
    store.state().graph(g).unwrap().entities().map(|e| e.name.clone()).collect()
}

/// A rename to an unused spelling of the same class keeps the normalized
/// fact multiset; a merge keeps every distinct fact under the name map.
pub fn check_merge(seed: u64) -> Result<(), TestCaseError> {
    let (mut store, graphs) = fusion_store(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(!seed);
    let g = &graphs[rng.gen_range(0..graphs.len())];
    let who = Principal::system("merger", Role::Expert);
    let names = names_of(&store, g);

    let from = names.choose(&mut rng).unwrap().clone();
    let to = format!("{}!", from.to_lowercase());
    if !names.contains(&to) {
        let before = oracle::live_facts(&store, g, oracle::normalize);
        let plan = MergePlan {
            actions: vec![MergeAction::Rename { graph_id: g.clone(), from: from.clone(), to: to.clone() }],
            author: String::new(),
            status: Default::default(),
        };
        let result = apply_merge_plan(&mut store, &who, plan).unwrap();
        prop_assert_eq!(result.renamed, 1);
        prop_assert_eq!(oracle::live_facts(&store, g, oracle::normalize), before);
    }

    let names = names_of(&store, g);
    let picked: Vec<String> = names.choose_multiple(&mut rng, 2.min(names.len())).cloned().collect();
    let target = "Merged entity".to_string();
    let map = |n: &str| if picked.iter().any(|p| p == n) { target.clone() } else { n.to_string() };
    let expected: BTreeSet<_> = oracle::live_facts(&store, g, map).into_iter().collect();
    let plan = MergePlan {
        actions: vec![MergeAction::Merge { graph_id: g.clone(), from: picked.clone(), to: target.clone() }],
        author: String::new(),
        status: Default::default(),
    };
    apply_merge_plan(&mut store, &who, plan).unwrap();
    let after: BTreeSet<_> = oracle::live_facts(&store, g, |n| n.to_string()).into_iter().collect();
    prop_assert_eq!(after, expected);
    Ok(())
}
