//! Character-based sliding-window chunking.

use serde::{Deserialize, Serialize};

use crate::document::PageText;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkConfig {
    pub chunk_size: usize,
    pub overlap: usize,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        Self {
            chunk_size: 4000,
            overlap: 200,
        }
    }
}

impl ChunkConfig {
    pub fn new(chunk_size: usize, overlap: usize) -> Result<Self> {
        let c = Self { chunk_size, overlap };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.chunk_size == 0 {
            return Err(Error::InvalidConfig("chunk_size must be positive".into()));
        }
        if self.overlap >= self.chunk_size {
            return Err(Error::InvalidConfig(format!(
                "overlap ({}) must be smaller than chunk_size ({})",
                self.overlap, self.chunk_size
            )));
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        self.chunk_size - self.overlap
    }
}

/// A window over the concatenated document text. Offsets count characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub index: usize,
    pub start: usize,
    pub end: usize,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_range: Option<(u32, u32)>,
}

/// `(start, end)` character spans for a text of `len` characters.
pub fn chunk_spans(len: usize, config: &ChunkConfig) -> Result<Vec<(usize, usize)>> {
    config.validate()?;
    let mut spans = Vec::new();
    let mut start = 0;
    while start < len {
        let end = (start + config.chunk_size).min(len);
        spans.push((start, end));
        if end == len {
            break;
        }
        start += config.stride();
    }
    Ok(spans)
}

/// Byte offset of every character boundary, plus the end of the string.
fn char_boundaries(text: &str) -> Vec<usize> {
    text.char_indices()
        .map(|(b, _)| b)
        .chain(std::iter::once(text.len()))
        .collect()
}

pub fn chunk_text(text: &str, config: &ChunkConfig) -> Result<Vec<Chunk>> {
    let bounds = char_boundaries(text);
    let len = bounds.len() - 1;
    Ok(chunk_spans(len, config)?
        .into_iter()
        .enumerate()
        .map(|(index, (start, end))| Chunk {
            index,
            start,
            end,
            text: text[bounds[start]..bounds[end]].to_string(),
            page_range: None,
        })
        .collect())
}

/// Pages joined with `"\n"` plus the character offset where each page starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PagedText {
    text: String,
    page_starts: Vec<(u32, usize)>,
}

impl PagedText {
    pub fn new(pages: &[PageText]) -> Self {
        let mut text = String::new();
        let mut page_starts = Vec::with_capacity(pages.len());
        let mut offset = 0;
        for (i, p) in pages.iter().enumerate() {
            if i > 0 {
                text.push('\n');
                offset += 1;
            }
            page_starts.push((p.page, offset));
            text.push_str(&p.text);
            offset += p.text.chars().count();
        }
        Self { text, page_starts }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn page_starts(&self) -> &[(u32, usize)] {
        &self.page_starts
    }

    /// Page holding character `offset`; a separator belongs to the page before it.
    pub fn page_at(&self, offset: usize) -> Option<u32> {
        let idx = self.page_starts.partition_point(|&(_, start)| start <= offset);
        idx.checked_sub(1).map(|i| self.page_starts[i].0)
    }

    pub fn chunks(&self, config: &ChunkConfig) -> Result<Vec<Chunk>> {
        let mut chunks = chunk_text(&self.text, config)?;
        for c in &mut chunks {
            let first = self.page_at(c.start);
            let last = self.page_at(c.end.saturating_sub(1).max(c.start));
            c.page_range = first.zip(last);
        }
        Ok(chunks)
    }
}
