//! Pluggable LLM access.
//!
//! A request is `{model_id, system, user, temperature}` and a response is
//! plain text. Two implementations ship: [`HttpLlmClient`] talks to an
//! OpenAI-compatible chat endpoint, [`ReplayClient`] answers from a fixture
//! file keyed by [`LlmRequest::digest`].

mod http;
mod replay;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::log::sha256_hex;

pub use http::{HttpLlmClient, Transport, UreqTransport};
pub use replay::{FixtureRecord, RecordingClient, ReplayClient};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub model_id: String,
    pub system: String,
    pub user: String,
    pub temperature: f64,
}

impl LlmRequest {
    pub fn new(model_id: impl Into<String>, system: impl Into<String>, user: impl Into<String>) -> Self {
        Self {
            model_id: model_id.into(),
            system: system.into(),
            user: user.into(),
            temperature: 0.0,
        }
    }

    /// Replay key: SHA-256 over the request serialized with fields in
    /// declaration order.
    pub fn digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("request is serializable"))
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LlmError {
    #[error("llm transport failure: {0}")]
    Transport(String),
    #[error("llm returned an unusable response: {0}")]
    BadResponse(String),
    #[error("no recorded response for request {digest}")]
    ReplayMiss { digest: String },
    #[error("llm configuration: {0}")]
    Config(String),
}

impl LlmError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, LlmError::Transport(_) | LlmError::BadResponse(_))
    }
}

pub trait LlmClient: Send + Sync {
    fn model_id(&self) -> &str;

    fn complete(&self, request: &LlmRequest) -> Result<String, LlmError>;

    fn request(&self, system: &str, user: &str) -> LlmRequest {
        LlmRequest::new(self.model_id(), system, user)
    }
}

impl<T: LlmClient + ?Sized> LlmClient for std::sync::Arc<T> {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }

    fn complete(&self, request: &LlmRequest) -> Result<String, LlmError> {
        (**self).complete(request)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_delay_ms: 500,
        }
    }
}

impl RetryPolicy {
    pub fn no_delay(max_attempts: u32) -> Self {
        Self {
            max_attempts,
            base_delay_ms: 0,
        }
    }

    fn delay(&self, attempt: u32) -> Duration {
        Duration::from_millis(self.base_delay_ms.saturating_mul(1u64 << attempt.min(16)))
    }
}

/// Calls `client` with exponential backoff on retryable failures.
pub fn complete_with_retry(
    client: &dyn LlmClient,
    request: &LlmRequest,
    policy: RetryPolicy,
) -> Result<String, LlmError> {
    let attempts = policy.max_attempts.max(1);
    let mut last = None;
    for attempt in 0..attempts {
        match client.complete(request) {
            Ok(text) => return Ok(text),
            Err(e) if e.is_retryable() => {
                last = Some(e);
                if attempt + 1 < attempts {
                    std::thread::sleep(policy.delay(attempt));
                }
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}
