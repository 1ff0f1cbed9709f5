//! Document ingestion: identification, chunking, extraction, parsing,
//! evidence alignment and insertion.

mod chunk;
mod evidence;
mod identify;
mod parse;
mod pipeline;

use serde::{Deserialize, Serialize};

use crate::document::StandardId;
use crate::ids::DocumentId;
use crate::store::model::Spo;

pub use chunk::{chunk_spans, chunk_text, Chunk, ChunkConfig, PagedText};
pub use evidence::{align_evidence, find_evidence, split_sentences, Sentence};
pub use identify::{identify_standard, parse_standard_response, snippet, DEFAULT_SNIPPET_CHARS};
pub use parse::{format_triple, parse_triple_lines, ParsedLines, SkipReason, SkippedLine};
pub use pipeline::{
    begin_ingest, extract_chunk, finish_ingest, ingest_document, run_extraction, ChunkExtraction,
    Extraction, IngestConfig, Intake,
};

/// A parsed triple tagged with the chunk it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTriple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub source_chunk: usize,
}

impl RawTriple {
    pub fn from_spo(spo: Spo, source_chunk: usize) -> Self {
        Self {
            subject: spo.subject,
            predicate: spo.predicate,
            object: spo.object,
            source_chunk,
        }
    }

    pub fn spo(&self) -> Spo {
        Spo::new(&self.subject, &self.predicate, &self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestWarning {
    pub chunk_index: Option<usize>,
    pub line: String,
    pub reason: String,
}

impl IngestWarning {
    pub fn new(chunk_index: Option<usize>, line: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            chunk_index,
            line: line.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub document_id: DocumentId,
    pub standard: StandardId,
    pub chunk_count: usize,
    pub chunks_failed: usize,
    pub triples_inserted: usize,
    pub triples_deduped: usize,
    pub lines_skipped: usize,
    pub warnings: Vec<IngestWarning>,
    /// Measured with the store clock, so a fixed clock reports zero.
    pub duration_ms: u64,
}

impl IngestReport {
    pub fn warnings_with(&self, reason: &str) -> usize {
        self.warnings.iter().filter(|w| w.reason == reason).count()
    }
}
