use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::document::{DocumentRecord, DocumentState, PageText, StandardId};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::governance::{authorize, ActionKind, Principal};
use crate::ids::{DocumentId, GraphId};
use crate::llm::{complete_with_retry, LlmClient, LlmError, RetryPolicy};
use crate::prompts::{ExtractionPrompts, PromptRegistry};
use crate::store::model::{Origin, Provenance};
use crate::store::{Event, GraphStore, NewDocument};

use super::{
    align_evidence, identify_standard, parse_triple_lines, snippet, Chunk, ChunkConfig, IngestReport,
    IngestWarning, PagedText, RawTriple, SkippedLine, DEFAULT_SNIPPET_CHARS,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    pub chunk: ChunkConfig,
    /// Skips identification when set.
    pub standard_override: Option<StandardId>,
    pub snippet_chars: usize,
    pub retry: RetryPolicy,
    pub exec: ExecMode,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            chunk: ChunkConfig::default(),
            standard_override: None,
            snippet_chars: DEFAULT_SNIPPET_CHARS,
            retry: RetryPolicy::default(),
            exec: ExecMode::default(),
        }
    }
}

/// Pre-extracted document text, as read from an intake JSON file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intake {
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub document_id: Option<DocumentId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph_id: Option<GraphId>,
    pub pages: Vec<PageText>,
}

impl Intake {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("intake: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn is_empty(&self) -> bool {
        self.pages.iter().all(|p| p.text.trim().is_empty())
    }
}

/// Output of one chunk's extraction call.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChunkExtraction {
    pub chunk_index: usize,
    pub raw_triples: Vec<RawTriple>,
    pub skipped: Vec<SkippedLine>,
    pub trailing_text: Vec<String>,
    pub empty_response: bool,
    /// Set when the client kept failing after retries.
    pub failure: Option<String>,
}

/// Renders the prompt, calls the model and parses its lines. Transport
/// failures are recorded on the result; only a replay miss or a
/// configuration error is returned as `Err`.
pub fn extract_chunk(
    chunk: &Chunk,
    prompts: &ExtractionPrompts,
    llm: &dyn LlmClient,
    retry: RetryPolicy,
) -> Result<ChunkExtraction> {
    let request = llm.request(&prompts.system_prompt, &prompts.render_user(&chunk.text));
    let mut out = ChunkExtraction {
        chunk_index: chunk.index,
        ..Default::default()
    };
    let text = match complete_with_retry(llm, &request, retry) {
        Ok(t) => t,
        Err(e @ (LlmError::ReplayMiss { .. } | LlmError::Config(_))) => return Err(e.into()),
        Err(e) => {
            out.failure = Some(e.to_string());
            return Ok(out);
        }
    };
    if text.trim().is_empty() {
        out.empty_response = true;
        return Ok(out);
    }
    let parsed = parse_triple_lines(&text);
    out.raw_triples = parsed
        .triples
        .into_iter()
        .map(|spo| RawTriple::from_spo(spo, chunk.index))
        .collect();
    out.skipped = parsed.skipped;
    out.trailing_text = parsed.trailing_text;
    Ok(out)
}

/// Everything produced before touching the store.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub standard: StandardId,
    pub paged: PagedText,
    pub chunks: Vec<Chunk>,
    pub results: Vec<ChunkExtraction>,
    pub warnings: Vec<IngestWarning>,
}

/// Identification, chunking and per-chunk extraction. Chunks run through
/// `config.exec`; `progress(done, total)` fires as each chunk finishes.
pub fn run_extraction(
    pages: &[PageText],
    config: &IngestConfig,
    registry: &PromptRegistry,
    llm: &dyn LlmClient,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<Extraction> {
    config.chunk.validate()?;
    let first = pages
        .iter()
        .find(|p| !p.text.trim().is_empty())
        .ok_or(Error::EmptyDocument)?;
    let mut warnings = Vec::new();
    let standard = match config.standard_override {
        Some(s) => s,
        None => match identify_standard(snippet(&first.text, config.snippet_chars), registry, llm, config.retry) {
            Ok(s) => s,
            Err(Error::Llm(e)) if e.is_retryable() => {
                warnings.push(IngestWarning::new(None, e.to_string(), "identification_failed"));
                StandardId::Unknown
            }
            Err(e) => return Err(e),
        },
    };
    let prompts = registry.select_prompt(standard)?;
    let paged = PagedText::new(pages);
    let chunks = paged.chunks(&config.chunk)?;
    let done = AtomicUsize::new(0);
    let total = chunks.len();
    progress(0, total);
    let results = exec::map(config.exec, &chunks, |c| {
        let r = extract_chunk(c, &prompts, llm, config.retry);
        progress(done.fetch_add(1, Ordering::SeqCst) + 1, total);
        r
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Extraction {
        standard,
        paged,
        chunks,
        results,
        warnings,
    })
}

fn slug(title: &str) -> String {
    let mut s = String::new();
    for c in title.chars().flat_map(char::to_lowercase) {
        if c.is_ascii_alphanumeric() {
            s.push(c);
        } else if !s.ends_with('-') && !s.is_empty() {
            s.push('-');
        }
        if s.len() >= 48 {
            break;
        }
    }
    let s = s.trim_end_matches('-').to_string();
    if s.is_empty() {
        "doc".into()
    } else {
        s
    }
}

/// Validates the intake and registers the document in state `Ingesting`.
/// The graph id defaults to the document id and is created when missing.
pub fn begin_ingest(store: &mut GraphStore, intake: Intake, actor: &str) -> Result<DocumentRecord> {
    if intake.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let id = match intake.document_id {
        Some(id) => id,
        None => {
            let base = slug(&intake.title);
            let taken = |c: &str| store.state().document(&DocumentId::new(c)).is_ok();
            let mut candidate = base.clone();
            let mut n = 2;
            while taken(&candidate) {
                candidate = format!("{base}-{n}");
                n += 1;
            }
            DocumentId::new(candidate)
        }
    };
    if store.state().document(&id).is_ok() {
        return Err(Error::DocumentExists(id));
    }
    let graph_id = intake.graph_id.unwrap_or_else(|| GraphId::new(id.as_str()));
    store.ensure_graph(&graph_id, actor)?;
    store.register_document(
        NewDocument {
            id,
            graph_id,
            title: intake.title,
            source_file: intake.source_file,
            pages: intake.pages,
            state: DocumentState::Ingesting,
        },
        actor,
    )
}

/// Inserts the extracted triples in chunk order and moves the document to
/// `Draft`. `started` is a store-clock reading taken before extraction.
pub fn finish_ingest(
    store: &mut GraphStore,
    document_id: &DocumentId,
    extraction: Extraction,
    started: chrono::DateTime<chrono::Utc>,
    actor: &str,
) -> Result<IngestReport> {
    let doc = store.state().document(document_id)?.clone();
    if doc.state != DocumentState::Ingesting {
        return Err(Error::WrongState(format!("document {} is not ingesting", doc.id)));
    }
    let Extraction {
        standard,
        paged,
        chunks,
        results,
        mut warnings,
    } = extraction;
    store.commit(
        actor,
        Event::StandardIdentified {
            document_id: doc.id.clone(),
            standard,
        },
    )?;
    let mut report = IngestReport {
        document_id: doc.id.clone(),
        standard,
        chunk_count: chunks.len(),
        chunks_failed: 0,
        triples_inserted: 0,
        triples_deduped: 0,
        lines_skipped: 0,
        warnings: Vec::new(),
        duration_ms: 0,
    };
    for (chunk, result) in chunks.iter().zip(results) {
        let ci = Some(chunk.index);
        if let Some(f) = result.failure {
            report.chunks_failed += 1;
            warnings.push(IngestWarning::new(ci, f, "chunk_failed"));
            continue;
        }
        if result.empty_response {
            warnings.push(IngestWarning::new(ci, "", "empty_response"));
        }
        for s in result.skipped {
            report.lines_skipped += 1;
            warnings.push(IngestWarning::new(ci, s.line, s.reason.as_str()));
        }
        for line in result.trailing_text {
            warnings.push(IngestWarning::new(ci, line, "trailing_text"));
        }
        for raw in result.raw_triples {
            let spo = raw.spo();
            let fallback = Provenance {
                chunk_index: Some(chunk.index),
                ..Provenance::document(doc.id.clone())
            };
            let prov = align_evidence(&spo, chunk, &paged, &doc.id).unwrap_or_else(|| fallback.clone());
            let insert = |store: &mut GraphStore, prov: Provenance| {
                store.insert_triple(
                    &doc.graph_id,
                    &spo.subject,
                    &spo.predicate,
                    &spo.object,
                    prov,
                    Origin::LlmExtraction,
                    actor,
                )
            };
            let outcome = match insert(store, prov) {
                Err(Error::InvalidProvenance(_)) => insert(store, fallback),
                other => other,
            };
            match outcome {
                Ok(i) if i.deduplicated => report.triples_deduped += 1,
                Ok(_) => report.triples_inserted += 1,
                Err(e) => {
                    report.lines_skipped += 1;
                    warnings.push(IngestWarning::new(ci, format!("{spo}: {e}"), "insert_failed"));
                }
            }
        }
    }
    report.warnings = warnings;
    let elapsed = store.clock().now() - started;
    report.duration_ms = elapsed.num_milliseconds().max(0) as u64;
    store.commit(
        actor,
        Event::IngestCompleted {
            document_id: doc.id.clone(),
            report: report.clone(),
        },
    )?;
    Ok(report)
}

/// Runs the whole pipeline against one store. Long-running callers should
/// use [`begin_ingest`], [`run_extraction`] and [`finish_ingest`] directly so
/// the store is not held during LLM calls.
pub fn ingest_document(
    store: &mut GraphStore,
    intake: Intake,
    config: &IngestConfig,
    registry: &PromptRegistry,
    llm: &dyn LlmClient,
    principal: &Principal,
) -> Result<IngestReport> {
    authorize(principal.role, ActionKind::Ingest)?;
    let started = store.clock().now();
    let actor = principal.actor();
    let doc = begin_ingest(store, intake, &actor)?;
    let extraction = run_extraction(&doc.pages, config, registry, llm, &|_, _| {})?;
    finish_ingest(store, &doc.id, extraction, started, &actor)
}
