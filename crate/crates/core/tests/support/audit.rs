//! Soft-delete reversibility and single-byte tamper detection.
#![allow(dead_code)]

use provkg_core::store::log::split_log_bytes;
use provkg_core::store::{verify_lines, GraphStore, TripleRecord};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracle;

fn visible(t: &TripleRecord) -> TripleRecord {
    let mut v = t.clone();
    v.last_updated_at = t.created_at;
    v.last_updated_by = t.created_by.clone();
    v
}

/// Deletes then restores a sample of live triples; returns mismatches.
pub fn delete_restore(seed: u64) -> Vec<String> {
    let mut g = oracle::random_graph(seed, 30, 80);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let live: Vec<TripleRecord> = g.store.state().graph(&g.graph).unwrap().live_triples().cloned().collect();
    let mut problems = Vec::new();
    for before in live.choose_multiple(&mut rng, 10) {
        let deleted = g.store.soft_delete_triple(&g.graph, before.id, "reviewer").unwrap();
        if !deleted.deleted {
            problems.push(format!("{} not marked deleted", before.id));
        }
        let after = g.store.restore_triple(&g.graph, before.id, "reviewer").unwrap();
        if visible(&after) != visible(before) {
            problems.push(format!("{}: {before:?} became {after:?}", before.id));
        }
    }
    let digest = g.store.log().last_digest();
    let snap = |s: &provkg_core::store::State| serde_json::to_value(s.to_snapshot(digest)).unwrap();
    if snap(&g.store.replay().unwrap()) != snap(g.store.state()) {
        problems.push("replayed state differs".into());
    }
    problems
}

/// A store whose log holds exactly `n` entries.
pub fn store_with_entries(n: usize) -> GraphStore {
    let mut store = oracle::new_store();
    let graph = provkg_core::ids::GraphId::new("audit");
    let doc = oracle::add_graph(&mut store, &graph);
    let mut i = 0;
    while store.log().len() < n {
        if i % 7 == 6 {
            let id = store.state().graph(&graph).unwrap().live_triples().next().unwrap().id;
            store.soft_delete_triple(&graph, id, "auditor").unwrap();
        } else {
            oracle::insert(&mut store, &graph, &doc, &format!("s{i}"), "p", &format!("o{i}"));
        }
        i += 1;
    }
    assert_eq!(store.log().len(), n);
    store
}

/// Flips `per_entry` random bytes inside every line of a clean `n`-entry
/// log, one at a time, and checks the reported first bad sequence number.
pub fn flip_fuzz(n: usize, per_entry: usize, seed: u64) -> (usize, Vec<String>) {
    let store = store_with_entries(n);
    let mut bytes = Vec::new();
    for line in store.log().lines() {
        bytes.extend_from_slice(line.as_bytes());
        bytes.push(b'\n');
    }
    let clean = split_log_bytes(&bytes);
    let mut problems = Vec::new();
    let report = verify_lines(clean.iter().map(String::as_str));
    if !report.ok || report.entries != n as u64 {
        problems.push(format!("clean log failed: {report:?}"));
    }
    let mut starts = vec![0];
    starts.extend(bytes.iter().enumerate().filter(|(_, &b)| b == b'\n').map(|(i, _)| i + 1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials = 0;
    for seq in 0..n {
        for _ in 0..per_entry {
            let at = rng.gen_range(starts[seq]..starts[seq + 1]);
            let mut tampered = bytes.clone();
            tampered[at] ^= rng.gen_range(1..=255u8);
            let lines = split_log_bytes(&tampered);
            let report = verify_lines(lines.iter().map(String::as_str));
            trials += 1;
            if report.first_bad_seq != Some(seq as u64) {
                problems.push(format!("byte {at} in entry {seq}: reported {:?}", report.first_bad_seq));
            }
        }
    }
    (trials, problems)
}
