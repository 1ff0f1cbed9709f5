use thiserror::Error;

use crate::governance::{ActionKind, ReadinessReport, Role};
use crate::ids::{DocumentId, GraphId, TripleId};
use crate::llm::LlmError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("entity name is empty")]
    EmptyName,
    #[error("field `{0}` is empty")]
    EmptyField(&'static str),
    #[error("unknown graph `{0}`")]
    UnknownGraph(GraphId),
    #[error("unknown document `{0}`")]
    UnknownDocument(DocumentId),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("{0} not found")]
    NotFound(String),
    #[error("graph `{0}` already exists")]
    GraphExists(GraphId),
    #[error("document `{0}` already exists")]
    DocumentExists(DocumentId),
    #[error("certified records are immutable: {0}")]
    CertifiedImmutable(String),
    #[error("triple {0} is already deleted")]
    AlreadyDeleted(TripleId),
    #[error("triple {0} is not deleted")]
    NotDeleted(TripleId),
    #[error("invalid provenance: {0}")]
    InvalidProvenance(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("document has no text")]
    EmptyDocument,
    #[error("role {role} may not perform {action}")]
    Unauthorized { role: Role, action: ActionKind },
    #[error("session expired")]
    SessionExpired,
    #[error("invalid credentials")]
    InvalidCredentials,
    #[error("username `{0}` is taken")]
    DuplicateUsername(String),
    #[error("unknown account `{0}`")]
    UnknownAccount(String),
    #[error("invalid or expired token")]
    InvalidToken,
    #[error("document `{0}` is certified")]
    DocumentCertified(DocumentId),
    #[error("wrong state: {0}")]
    WrongState(String),
    #[error("document is not ready for certification")]
    NotReady(Box<ReadinessReport>),
    #[error("at least two graphs are required")]
    NeedTwoGraphs,
    #[error("merge plan conflict: {0}")]
    PlanConflict(String),
    #[error("at least two distinct entities are required")]
    TooFewEntities,
    #[error("question matched no entity")]
    NoEntityMatch,
    #[error("prompt registry has no entry `{0}`")]
    MissingPrompt(String),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("response does not match the expected schema: {reason}")]
    SchemaViolation { reason: String, raw: String },
    #[error("audit chain broken at seq {first_bad_seq}: {reason}")]
    ChainBroken { first_bad_seq: u64, reason: String },
    #[error("storage: {0}")]
    Storage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyName => "empty_name",
            Error::EmptyField(_) => "empty_field",
            Error::UnknownGraph(_) => "unknown_graph",
            Error::UnknownDocument(_) => "unknown_document",
            Error::UnknownEntity(_) => "unknown_entity",
            Error::NotFound(_) => "not_found",
            Error::GraphExists(_) => "graph_exists",
            Error::DocumentExists(_) => "document_exists",
            Error::CertifiedImmutable(_) => "certified_immutable",
            Error::AlreadyDeleted(_) => "already_deleted",
            Error::NotDeleted(_) => "not_deleted",
            Error::InvalidProvenance(_) => "invalid_provenance",
            Error::InvalidConfig(_) => "invalid_config",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::EmptyDocument => "empty_document",
            Error::Unauthorized { .. } => "unauthorized",
            Error::SessionExpired => "session_expired",
            Error::InvalidCredentials => "invalid_credentials",
            Error::DuplicateUsername(_) => "duplicate_username",
            Error::UnknownAccount(_) => "unknown_account",
            Error::InvalidToken => "invalid_token",
            Error::DocumentCertified(_) => "document_certified",
            Error::WrongState(_) => "wrong_state",
            Error::NotReady(_) => "not_ready",
            Error::NeedTwoGraphs => "need_two_graphs",
            Error::PlanConflict(_) => "plan_conflict",
            Error::TooFewEntities => "too_few_entities",
            Error::NoEntityMatch => "no_entity_match",
            Error::MissingPrompt(_) => "missing_prompt",
            Error::Llm(LlmError::ReplayMiss { .. }) => "replay_miss",
            Error::Llm(_) => "llm_unavailable",
            Error::SchemaViolation { .. } => "schema_violation",
            Error::ChainBroken { .. } => "chain_broken",
            Error::Storage(_) => "storage",
            Error::Io(_) => "io",
        }
    }
}
