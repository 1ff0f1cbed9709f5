//! Record-and-replay fixtures.
//!
//! A fixture file holds one JSON object per line:
//! `{"request_digest": "<sha256>", "response_text": "..."}`. Several lines may
//! share a digest; they are served in file order and the last one repeats
//! once the queue is exhausted.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use super::{LlmClient, LlmError, LlmRequest};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub request_digest: String,
    pub response_text: String,
}

impl FixtureRecord {
    pub fn parse_lines(text: &str) -> Result<Vec<FixtureRecord>, LlmError> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l)
                    .map_err(|e| LlmError::Config(format!("fixture line {}: {e}", i + 1)))
            })
            .collect()
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record is serializable")
    }
}

#[derive(Debug)]
struct Queue {
    responses: Vec<String>,
    cursor: usize,
}

#[derive(Debug)]
pub struct ReplayClient {
    model_id: String,
    queues: Mutex<HashMap<String, Queue>>,
}

impl ReplayClient {
    pub fn new(model_id: impl Into<String>, records: impl IntoIterator<Item = FixtureRecord>) -> Self {
        let mut queues: HashMap<String, Queue> = HashMap::new();
        for r in records {
            queues
                .entry(r.request_digest)
                .or_insert_with(|| Queue {
                    responses: Vec::new(),
                    cursor: 0,
                })
                .responses
                .push(r.response_text);
        }
        Self {
            model_id: model_id.into(),
            queues: Mutex::new(queues),
        }
    }

    pub fn from_file(model_id: impl Into<String>, path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        Ok(Self::new(model_id, FixtureRecord::parse_lines(&text)?))
    }

    /// Rewinds every queue so the same fixture can drive another run.
    pub fn rewind(&self) {
        for q in self.queues.lock().values_mut() {
            q.cursor = 0;
        }
    }
}

impl LlmClient for ReplayClient {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn complete(&self, request: &LlmRequest) -> Result<String, LlmError> {
        let digest = request.digest();
        let mut queues = self.queues.lock();
        let q = queues
            .get_mut(&digest)
            .ok_or(LlmError::ReplayMiss { digest })?;
        let idx = q.cursor.min(q.responses.len() - 1);
        q.cursor += 1;
        Ok(q.responses[idx].clone())
    }
}

/// Proxies a live client and appends every exchange to a fixture file.
pub struct RecordingClient<C> {
    inner: C,
    path: PathBuf,
    lock: Mutex<()>,
}

impl<C: LlmClient> RecordingClient<C> {
    pub fn new(inner: C, path: impl Into<PathBuf>) -> Self {
        Self {
            inner,
            path: path.into(),
            lock: Mutex::new(()),
        }
    }
}

impl<C: LlmClient> LlmClient for RecordingClient<C> {
    fn model_id(&self) -> &str {
        self.inner.model_id()
    }

    fn complete(&self, request: &LlmRequest) -> Result<String, LlmError> {
        let text = self.inner.complete(request)?;
        let record = FixtureRecord {
            request_digest: request.digest(),
            response_text: text.clone(),
        };
        let _guard = self.lock.lock();
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| LlmError::Config(e.to_string()))?;
        writeln!(file, "{}", record.to_line()).map_err(|e| LlmError::Config(e.to_string()))?;
        Ok(text)
    }
}
