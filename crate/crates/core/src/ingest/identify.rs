//! Standard identification from a short document snippet.

use crate::document::StandardId;
use crate::error::{Error, Result};
use crate::llm::{complete_with_retry, LlmClient, RetryPolicy};
use crate::prompts::PromptRegistry;

pub const DEFAULT_SNIPPET_CHARS: usize = 2000;

/// Accepts a response only when, trimmed and lowercased, it is exactly one
/// of the supported identifiers.
pub fn parse_standard_response(text: &str) -> Option<StandardId> {
    let t = text.trim().to_lowercase();
    StandardId::KNOWN.into_iter().find(|s| s.as_str() == t)
}

/// First `n` characters of `text`.
pub fn snippet(text: &str, n: usize) -> &str {
    match text.char_indices().nth(n) {
        Some((b, _)) => &text[..b],
        None => text,
    }
}

/// Asks the model which standard the snippet belongs to. A malformed answer
/// is retried once; a second malformed answer yields `Unknown`.
pub fn identify_standard(
    snippet: &str,
    registry: &PromptRegistry,
    llm: &dyn LlmClient,
    retry: RetryPolicy,
) -> Result<StandardId> {
    if snippet.trim().is_empty() {
        return Err(Error::InvalidArgument("identification snippet is empty".into()));
    }
    let request = llm.request(registry.identification()?, snippet);
    for _ in 0..2 {
        let text = complete_with_retry(llm, &request, retry)?;
        if let Some(id) = parse_standard_response(&text) {
            return Ok(id);
        }
    }
    Ok(StandardId::Unknown)
}
