//! Error bodies returned by every failing request.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use provkg_core::llm::LlmError;
use provkg_core::Error;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status: status.as_u16(),
            code: code.to_string(),
            message: message.into(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn unauthenticated() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthenticated", "missing bearer token")
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn route_not_found() -> Self {
        Self::new(StatusCode::NOT_FOUND, "no_route", "no such endpoint")
    }

    pub fn status_code(&self) -> StatusCode {
        StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
    }

    /// One line for command-line error output.
    pub fn line(&self) -> String {
        serde_json::to_string(&json!({"error": {"code": self.code, "message": self.message}}))
            .expect("serializable error")
    }
}

/// Machine code and HTTP status for every core error.
pub fn classify(err: &Error) -> (StatusCode, &'static str) {
    use StatusCode as S;
    match err {
        Error::EmptyName => (S::BAD_REQUEST, "empty_name"),
        Error::EmptyField(_) => (S::BAD_REQUEST, "empty_field"),
        Error::UnknownGraph(_) => (S::NOT_FOUND, "unknown_graph"),
        Error::UnknownDocument(_) => (S::NOT_FOUND, "unknown_document"),
        Error::UnknownEntity(_) => (S::NOT_FOUND, "unknown_entity"),
        Error::NotFound(_) => (S::NOT_FOUND, "not_found"),
        Error::GraphExists(_) => (S::CONFLICT, "graph_exists"),
        Error::DocumentExists(_) => (S::CONFLICT, "document_exists"),
        Error::CertifiedImmutable(_) => (S::CONFLICT, "certified_immutable"),
        Error::AlreadyDeleted(_) => (S::CONFLICT, "already_deleted"),
        Error::NotDeleted(_) => (S::CONFLICT, "not_deleted"),
        Error::InvalidProvenance(_) => (S::UNPROCESSABLE_ENTITY, "invalid_provenance"),
        Error::InvalidConfig(_) => (S::BAD_REQUEST, "invalid_config"),
        Error::InvalidArgument(_) => (S::BAD_REQUEST, "invalid_argument"),
        Error::EmptyDocument => (S::UNPROCESSABLE_ENTITY, "empty_document"),
        Error::Unauthorized { .. } => (S::FORBIDDEN, "unauthorized"),
        Error::SessionExpired => (S::UNAUTHORIZED, "session_expired"),
        Error::InvalidCredentials => (S::UNAUTHORIZED, "invalid_credentials"),
        Error::DuplicateUsername(_) => (S::CONFLICT, "duplicate_username"),
        Error::UnknownAccount(_) => (S::NOT_FOUND, "unknown_account"),
        Error::InvalidToken => (S::UNAUTHORIZED, "invalid_token"),
        Error::DocumentCertified(_) => (S::CONFLICT, "document_certified"),
        Error::WrongState(_) => (S::CONFLICT, "wrong_state"),
        Error::NotReady(_) => (S::CONFLICT, "not_ready"),
        Error::NeedTwoGraphs => (S::BAD_REQUEST, "need_two_graphs"),
        Error::PlanConflict(_) => (S::CONFLICT, "plan_conflict"),
        Error::TooFewEntities => (S::BAD_REQUEST, "too_few_entities"),
        Error::NoEntityMatch => (S::NOT_FOUND, "no_entity_match"),
        Error::MissingPrompt(_) => (S::INTERNAL_SERVER_ERROR, "missing_prompt"),
        Error::Llm(LlmError::ReplayMiss { .. }) => (S::BAD_GATEWAY, "replay_miss"),
        Error::Llm(_) => (S::BAD_GATEWAY, "llm_unavailable"),
        Error::SchemaViolation { .. } => (S::BAD_GATEWAY, "schema_violation"),
        Error::ChainBroken { .. } => (S::INTERNAL_SERVER_ERROR, "chain_broken"),
        Error::Storage(_) => (S::INTERNAL_SERVER_ERROR, "storage"),
        Error::Io(_) => (S::INTERNAL_SERVER_ERROR, "io"),
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let (status, code) = classify(&err);
        let api = ApiError::new(status, code, err.to_string());
        match err {
            Error::NotReady(report) => api.with_detail(serde_json::to_value(*report).expect("serializable report")),
            Error::SchemaViolation { reason, raw } => api.with_detail(json!({"reason": reason, "raw": raw})),
            Error::ChainBroken { first_bad_seq, reason } => {
                api.with_detail(json!({"first_bad_seq": first_bad_seq, "reason": reason}))
            }
            _ => api,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status >= 500 {
            tracing::error!(code = %self.code, message = %self.message, "request failed");
        }
        (self.status_code(), Json(self)).into_response()
    }
}
