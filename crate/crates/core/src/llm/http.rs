use std::sync::Arc;
use std::time::Duration;

use serde_json::{json, Value};

use super::{LlmClient, LlmError, LlmRequest};

/// Minimal JSON-over-HTTP transport, separated out so tests can count or
/// fake outbound calls.
pub trait Transport: Send + Sync {
    fn post_json(&self, url: &str, bearer: Option<&str>, body: &Value) -> Result<Value, String>;
}

#[derive(Debug, Clone)]
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        Self {
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(120))
    }
}

impl Transport for UreqTransport {
    fn post_json(&self, url: &str, bearer: Option<&str>, body: &Value) -> Result<Value, String> {
        let mut req = self.agent.post(url).set("Content-Type", "application/json");
        if let Some(key) = bearer {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let resp = req.send_json(body.clone()).map_err(|e| e.to_string())?;
        resp.into_json::<Value>().map_err(|e| e.to_string())
    }
}

/// Client for OpenAI-compatible `chat/completions` endpoints.
pub struct HttpLlmClient {
    endpoint: String,
    model_id: String,
    api_key: Option<String>,
    transport: Arc<dyn Transport>,
}

impl std::fmt::Debug for HttpLlmClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpLlmClient")
            .field("endpoint", &self.endpoint)
            .field("model_id", &self.model_id)
            .finish_non_exhaustive()
    }
}

impl HttpLlmClient {
    pub fn new(
        endpoint: impl Into<String>,
        model_id: impl Into<String>,
        api_key: Option<String>,
        transport: Arc<dyn Transport>,
    ) -> Self {
        Self {
            endpoint: endpoint.into(),
            model_id: model_id.into(),
            api_key,
            transport,
        }
    }
}

impl LlmClient for HttpLlmClient {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn complete(&self, request: &LlmRequest) -> Result<String, LlmError> {
        let body = json!({
            "model": request.model_id,
            "temperature": request.temperature,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
        });
        let resp = self
            .transport
            .post_json(&self.endpoint, self.api_key.as_deref(), &body)
            .map_err(LlmError::Transport)?;
        resp.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| LlmError::BadResponse(resp.to_string()))
    }
}
