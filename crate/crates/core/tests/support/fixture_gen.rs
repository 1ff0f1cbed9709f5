//! Builds the bundled review fixture: a synthetic guidance excerpt, the
//! recorded model responses for ingesting it, and a scripted review session.
//!
//! Shared by the `build_fixture` example and the tests that check the files
//! on disk are current.

#![allow(dead_code)]

use std::path::Path;

use provkg_core::document::{PageText, StandardId};
use provkg_core::governance::{FinalVerdict, ReviewAction, Role};
use provkg_core::ids::{DocumentId, GraphId};
use provkg_core::ingest::{format_triple, snippet, ChunkConfig, Intake, PagedText, DEFAULT_SNIPPET_CHARS};
use provkg_core::llm::{FixtureRecord, LlmRequest};
use provkg_core::prompts::PromptRegistry;
use provkg_core::store::Spo;
use serde::{Deserialize, Serialize};

pub const MODEL_ID: &str = "fixture-model";
pub const DOCUMENT_ID: &str = "ifrs-s2-guidance";
pub const GRAPH_ID: &str = "g1";
pub const INTAKE_FILE: &str = "ifrs_s2_guidance.intake.json";
pub const REPLAY_FILE: &str = "ifrs_s2_guidance.replay.jsonl";
pub const REVIEW_FILE: &str = "ifrs_s2_guidance.review.json";
pub const PASSWORD: &str = "fixture-password";

const INDUSTRIES: [&str; 13] = [
    "Oil and Gas",
    "Electric Utilities",
    "Coal Operations",
    "Iron and Steel",
    "Cement",
    "Chemicals",
    "Airlines",
    "Marine Transportation",
    "Automobiles",
    "Real Estate",
    "Commercial Banks",
    "Insurance",
    "Agricultural Products",
];

/// (predicate, object, sentence tail after "The X industry ")
const TEMPLATES: [(&str, &str, &str); 6] = [
    ("discloses", "gross global Scope 1 emissions", "discloses gross global Scope 1 emissions in metric tonnes of CO2-e."),
    ("reports", "total energy consumed", "reports total energy consumed, expressed in gigajoules."),
    ("faces", "transition risk from carbon pricing", "faces transition risk from carbon pricing in several jurisdictions."),
    ("describes", "strategy to manage Scope 1 emissions", "describes its strategy to manage Scope 1 emissions over the short and long term."),
    ("assesses", "physical risk from extreme weather", "assesses physical risk from extreme weather affecting owned assets."),
    ("measures", "percentage of renewable energy", "measures the percentage of renewable energy in its energy mix."),
];

/// Industries from this index on have no sixth fact.
const SIXTH_FACT_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub industry: usize,
    pub template: usize,
    pub spo: Spo,
    pub sentence: String,
}

pub fn facts() -> Vec<Fact> {
    let mut out = Vec::new();
    for (i, industry) in INDUSTRIES.iter().enumerate() {
        for (k, (p, o, tail)) in TEMPLATES.iter().enumerate() {
            if k == 5 && i >= SIXTH_FACT_LIMIT {
                continue;
            }
            let subject = format!("{industry} industry");
            out.push(Fact {
                industry: i,
                template: k,
                sentence: format!("The {subject} {tail}"),
                spo: Spo::new(subject, *p, *o),
            });
        }
    }
    out
}

fn industry_paragraph(i: usize, facts: &[Fact]) -> String {
    let mut s = format!(
        "Industry description {}. This section applies to entities in the {} sector.",
        i + 1,
        INDUSTRIES[i].to_lowercase()
    );
    for f in facts.iter().filter(|f| f.industry == i) {
        s.push(' ');
        s.push_str(&f.sentence);
    }
    s.push_str(" Metrics are reported for the full reporting period.");
    s
}

pub fn pages() -> Vec<PageText> {
    let facts = facts();
    let mut pages = Vec::new();
    let intro = "IFRS S2 Industry-based Guidance. Synthetic excerpt prepared for software testing. \
                 This guidance accompanies the climate-related disclosure standard and sets out \
                 industry-specific disclosure topics and metrics. Each industry description lists \
                 the metrics an entity is expected to disclose.";
    for (n, chunk) in (0..INDUSTRIES.len()).collect::<Vec<_>>().chunks(2).enumerate() {
        let mut text = if n == 0 { format!("{intro}\n") } else { String::new() };
        let paras: Vec<String> = chunk.iter().map(|&i| industry_paragraph(i, &facts)).collect();
        text.push_str(&paras.join("\n"));
        pages.push(PageText {
            page: n as u32 + 1,
            text,
        });
    }
    pages
}

pub fn intake() -> Intake {
    Intake {
        title: "IFRS S2 Industry-based Guidance (synthetic excerpt)".into(),
        source_file: Some("ifrs_s2_guidance_synthetic.pdf".into()),
        document_id: Some(DocumentId::new(DOCUMENT_ID)),
        graph_id: Some(GraphId::new(GRAPH_ID)),
        pages: pages(),
    }
}

/// Response lines for one chunk: every fact whose sentence lies wholly in
/// the chunk, plus some noise the parser has to cope with.
fn chunk_response(index: usize, text: &str, facts: &[Fact]) -> String {
    let mut lines: Vec<String> = Vec::new();
    let inside: Vec<&Fact> = facts.iter().filter(|f| text.contains(&f.sentence)).collect();
    match index {
        0 => {
            lines.push("Here are the extracted triples:".into());
            for f in &inside {
                lines.push(format!("- {}", format_triple(&f.spo.subject, &f.spo.predicate, &f.spo.object)));
            }
            lines.push("(Climate-related risks, affect)".into());
            lines.push("(, reports, total energy consumed)".into());
            if let Some(f) = inside.first() {
                lines.push(format_triple(&f.spo.subject, &f.spo.predicate, &f.spo.object));
            }
        }
        1 => {
            for (n, f) in inside.iter().enumerate() {
                let line = format_triple(&f.spo.subject, &f.spo.predicate, &f.spo.object);
                if n == 2 {
                    lines.push(format!("{}. {line} see the metric table", n + 1));
                } else {
                    lines.push(format!("{}. {line}", n + 1));
                }
            }
        }
        _ => {
            for f in &inside {
                lines.push(format_triple(&f.spo.subject, &f.spo.predicate, &f.spo.object));
            }
        }
    }
    lines.join("\n")
}

pub fn replay_records(registry: &PromptRegistry) -> Vec<FixtureRecord> {
    let pages = pages();
    let facts = facts();
    let mut out = Vec::new();
    let snip = snippet(&pages[0].text, DEFAULT_SNIPPET_CHARS);
    let ident = LlmRequest::new(MODEL_ID, registry.identification().expect("identification prompt"), snip);
    out.push(FixtureRecord {
        request_digest: ident.digest(),
        response_text: StandardId::IfrsS2.as_str().to_string(),
    });
    let prompts = registry.select_prompt(StandardId::IfrsS2).expect("ifrs_s2 prompt");
    let paged = PagedText::new(&pages);
    for chunk in paged.chunks(&ChunkConfig::default()).expect("default chunking") {
        let req = LlmRequest::new(MODEL_ID, &prompts.system_prompt, prompts.render_user(&chunk.text));
        out.push(FixtureRecord {
            request_digest: req.digest(),
            response_text: chunk_response(chunk.index, &chunk.text, &facts),
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptAccount {
    pub username: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ReviewStep {
    Judge {
        reviewer: String,
        triple: Spo,
        action: ReviewAction,
        #[serde(default)]
        apply: bool,
    },
    Finalize {
        reviewer: String,
        triple: Spo,
        verdict: FinalVerdict,
    },
    Certify {
        reviewer: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewScript {
    pub document_id: DocumentId,
    pub accounts: Vec<ScriptAccount>,
    pub steps: Vec<ReviewStep>,
}

impl ReviewScript {
    pub fn load(path: impl AsRef<Path>) -> ReviewScript {
        serde_json::from_str(&std::fs::read_to_string(path).expect("review script")).expect("review script json")
    }
}

/// Two experts review every triple; the meta expert settles conflicts.
///
/// 20 triples are unanimous deletes, 4 conflicts are rejected and 3
/// conflicts are certified; the other 46 are unanimous keeps.
pub fn review_script() -> ReviewScript {
    let judge = |reviewer: &str, f: &Fact, action, apply| ReviewStep::Judge {
        reviewer: reviewer.into(),
        triple: f.spo.clone(),
        action,
        apply,
    };
    let mut steps = Vec::new();
    let mut finals = Vec::new();
    let mut first_delete = true;
    for f in facts() {
        let delete = f.template == 5 || (f.template == 4 && f.industry < 12);
        let conflict = f.template == 2 && f.industry < 7;
        if delete {
            steps.push(judge("expert_a", &f, ReviewAction::Delete, false));
            steps.push(judge("expert_b", &f, ReviewAction::Delete, first_delete));
            first_delete = false;
        } else if conflict {
            steps.push(judge("expert_a", &f, ReviewAction::Keep, false));
            steps.push(judge("expert_b", &f, ReviewAction::Delete, false));
            let verdict = if f.industry < 4 { FinalVerdict::Reject } else { FinalVerdict::Certify };
            finals.push(ReviewStep::Finalize {
                reviewer: "meta".into(),
                triple: f.spo.clone(),
                verdict,
            });
        } else {
            steps.push(judge("expert_a", &f, ReviewAction::Keep, false));
            steps.push(judge("expert_b", &f, ReviewAction::Keep, false));
        }
    }
    steps.extend(finals);
    steps.push(ReviewStep::Certify { reviewer: "meta".into() });
    ReviewScript {
        document_id: DocumentId::new(DOCUMENT_ID),
        accounts: vec![
            ScriptAccount { username: "expert_a".into(), role: Role::Expert },
            ScriptAccount { username: "expert_b".into(), role: Role::Expert },
            ScriptAccount { username: "meta".into(), role: Role::MetaExpert },
        ],
        steps,
    }
}

/// File name and contents of every fixture file.
pub fn render_all(registry: &PromptRegistry) -> Vec<(&'static str, String)> {
    let intake = serde_json::to_string_pretty(&intake()).expect("intake json") + "\n";
    let replay: String = replay_records(registry)
        .iter()
        .map(|r| r.to_line() + "\n")
        .collect();
    let review = serde_json::to_string_pretty(&review_script()).expect("script json") + "\n";
    vec![(INTAKE_FILE, intake), (REPLAY_FILE, replay), (REVIEW_FILE, review)]
}

pub fn write_all(dir: &Path, registry: &PromptRegistry) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, body) in render_all(registry) {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}
