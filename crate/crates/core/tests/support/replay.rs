//! Two replayed ingestions must write the same events.
#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use provkg_core::clock::{Clock, FixedClock, SystemClock};
use provkg_core::governance::{Principal, Role};
use provkg_core::hub::{Hub, HubConfig, IngestOverrides};
use provkg_core::ingest::Intake;
use provkg_core::llm::{ReplayClient, RetryPolicy};
use provkg_core::prompts::PromptRegistry;
use serde_json::Value;

fn run(fixtures: &Path, clock: Arc<dyn Clock>) -> Vec<String> {
    let llm = ReplayClient::from_file("fixture-model", fixtures.join("ifrs_s2_guidance.replay.jsonl")).unwrap();
    let mut cfg = HubConfig::default();
    cfg.ingest.retry = RetryPolicy::no_delay(1);
    let hub = Hub::in_memory(Arc::new(llm), PromptRegistry::default(), cfg, clock);
    let intake = Intake::load(fixtures.join("ifrs_s2_guidance.intake.json")).unwrap();
    hub.ingest(&Principal::system("replay", Role::Expert), intake, IngestOverrides::default())
        .unwrap();
    let lines = hub.store().log().lines().to_vec();
    lines
}

/// Log entries with the timestamp and the digests that depend on it removed.
fn without_time(lines: &[String]) -> Vec<Value> {
    lines
        .iter()
        .map(|l| {
            let mut v: Value = serde_json::from_str(l).unwrap();
            let entry = v["entry"].as_object_mut().unwrap();
            entry.remove("ts");
            entry.remove("prev_digest");
            v["entry"].take()
        })
        .collect()
}

/// `(entries, identical_modulo_time, byte_identical_with_fixed_clock)`.
pub fn determinism(fixtures: &Path) -> (usize, bool, bool) {
    let a = run(fixtures, Arc::new(SystemClock));
    let b = run(fixtures, Arc::new(SystemClock));
    let fa = run(fixtures, Arc::new(FixedClock::epoch()));
    let fb = run(fixtures, Arc::new(FixedClock::epoch()));
    (a.len(), without_time(&a) == without_time(&b), fa == fb)
}
