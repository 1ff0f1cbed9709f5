//! Sentence-level evidence alignment for extracted triples.

use crate::ids::DocumentId;
use crate::store::model::{Provenance, Spo};

use super::chunk::{Chunk, PagedText};

/// A sentence inside a chunk; `start` counts characters from the chunk start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub start: usize,
    pub text: String,
}

/// Splits on `.`, `?` or `!` followed by whitespace, and on newlines.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let push = |from: usize, to: usize, out: &mut Vec<Sentence>| {
        let raw = &chars[from..to];
        let lead = raw.iter().take_while(|c| c.is_whitespace()).count();
        let s: String = raw[lead..].iter().collect();
        let s = s.trim_end();
        if !s.is_empty() {
            out.push(Sentence {
                start: from + lead,
                text: s.to_string(),
            });
        }
    };
    for i in 0..chars.len() {
        let c = chars[i];
        if c == '\n' {
            push(start, i, &mut out);
            start = i + 1;
        } else if matches!(c, '.' | '?' | '!') && chars.get(i + 1).is_some_and(|n| n.is_whitespace()) {
            push(start, i + 1, &mut out);
            start = i + 1;
        }
    }
    push(start, chars.len(), &mut out);
    out
}

/// Finds the first sentence mentioning both subject and object, falling back
/// to the first mentioning the subject. Matching ignores case.
pub fn find_evidence<'a>(triple: &Spo, sentences: &'a [Sentence]) -> Option<&'a Sentence> {
    let subject = triple.subject.to_lowercase();
    let object = triple.object.to_lowercase();
    let lowered: Vec<String> = sentences.iter().map(|s| s.text.to_lowercase()).collect();
    lowered
        .iter()
        .position(|s| s.contains(&subject) && s.contains(&object))
        .or_else(|| lowered.iter().position(|s| s.contains(&subject)))
        .map(|i| &sentences[i])
}

pub fn align_evidence(
    triple: &Spo,
    chunk: &Chunk,
    paged: &PagedText,
    document_id: &DocumentId,
) -> Option<Provenance> {
    let sentences = split_sentences(&chunk.text);
    let hit = find_evidence(triple, &sentences)?;
    Some(Provenance {
        document_id: document_id.clone(),
        page: paged.page_at(chunk.start + hit.start),
        chunk_index: Some(chunk.index),
        evidence_sentence: Some(hit.text.clone()),
    })
}
