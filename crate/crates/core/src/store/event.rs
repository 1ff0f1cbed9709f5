use serde::{Deserialize, Serialize};

use crate::document::{CertificationRecord, DocumentState, PageText, StandardId};
use crate::governance::{FinalVerdict, Judgment, Role};
use crate::ids::{AccountId, DocumentId, GraphId, JudgmentId, TripleId};
use crate::ingest::IngestReport;
use crate::store::model::{Origin, Provenance, Spo};

/// Every state change the store and the review workflow can make.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Event {
    GraphCreated {
        graph_id: GraphId,
    },
    DocumentRegistered {
        document_id: DocumentId,
        graph_id: GraphId,
        title: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source_file: Option<String>,
        pages: Vec<PageText>,
        state: DocumentState,
    },
    StandardIdentified {
        document_id: DocumentId,
        standard: StandardId,
    },
    IngestCompleted {
        document_id: DocumentId,
        report: IngestReport,
    },
    DocumentStateChanged {
        document_id: DocumentId,
        from: DocumentState,
        to: DocumentState,
    },
    EntityUpserted {
        graph_id: GraphId,
        name: String,
    },
    TripleInserted {
        graph_id: GraphId,
        triple_id: TripleId,
        subject: String,
        predicate: String,
        object: String,
        provenance: Provenance,
        origin: Origin,
    },
    TripleUpdated {
        graph_id: GraphId,
        triple_id: TripleId,
        before: Spo,
        after: Spo,
    },
    TripleDeleted {
        graph_id: GraphId,
        triple_id: TripleId,
    },
    TripleRestored {
        graph_id: GraphId,
        triple_id: TripleId,
    },
    JudgmentRecorded {
        judgment: Judgment,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        replaces: Option<JudgmentId>,
    },
    TripleFinalized {
        graph_id: GraphId,
        triple_id: TripleId,
        verdict: FinalVerdict,
        note: String,
    },
    DocumentCertified {
        certification: CertificationRecord,
        promoted: Vec<TripleId>,
        rejected: Vec<TripleId>,
    },
    EntityRenamed {
        graph_id: GraphId,
        from: String,
        to: String,
    },
    EntitiesMerged {
        graph_id: GraphId,
        from: Vec<String>,
        to: String,
        collapsed: Vec<TripleId>,
    },
    AccountCreated {
        account_id: AccountId,
        username: String,
        role: Role,
    },
    AccountDeactivated {
        account_id: AccountId,
    },
    ResetTokenIssued {
        account_id: AccountId,
        token_digest: String,
    },
    ResetTokenRevoked {
        token_digest: String,
    },
    PasswordReset {
        account_id: AccountId,
    },
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::GraphCreated { .. } => "graph_created",
            Event::DocumentRegistered { .. } => "document_registered",
            Event::StandardIdentified { .. } => "standard_identified",
            Event::IngestCompleted { .. } => "ingest_completed",
            Event::DocumentStateChanged { .. } => "document_state_changed",
            Event::EntityUpserted { .. } => "entity_upserted",
            Event::TripleInserted { .. } => "triple_inserted",
            Event::TripleUpdated { .. } => "triple_updated",
            Event::TripleDeleted { .. } => "triple_deleted",
            Event::TripleRestored { .. } => "triple_restored",
            Event::JudgmentRecorded { .. } => "judgment_recorded",
            Event::TripleFinalized { .. } => "triple_finalized",
            Event::DocumentCertified { .. } => "document_certified",
            Event::EntityRenamed { .. } => "entity_renamed",
            Event::EntitiesMerged { .. } => "entities_merged",
            Event::AccountCreated { .. } => "account_created",
            Event::AccountDeactivated { .. } => "account_deactivated",
            Event::ResetTokenIssued { .. } => "reset_token_issued",
            Event::ResetTokenRevoked { .. } => "reset_token_revoked",
            Event::PasswordReset { .. } => "password_reset",
        }
    }

    pub fn subject_ref(&self) -> String {
        match self {
            Event::GraphCreated { graph_id } => graph_id.to_string(),
            Event::DocumentRegistered { document_id, .. }
            | Event::StandardIdentified { document_id, .. }
            | Event::IngestCompleted { document_id, .. }
            | Event::DocumentStateChanged { document_id, .. } => document_id.to_string(),
            Event::DocumentCertified { certification, .. } => certification.document_id.to_string(),
            Event::EntityUpserted { graph_id, name } => format!("{graph_id}/{name}"),
            Event::EntityRenamed { graph_id, from, .. } => format!("{graph_id}/{from}"),
            Event::EntitiesMerged { graph_id, to, .. } => format!("{graph_id}/{to}"),
            Event::TripleInserted { triple_id, .. }
            | Event::TripleUpdated { triple_id, .. }
            | Event::TripleDeleted { triple_id, .. }
            | Event::TripleRestored { triple_id, .. }
            | Event::TripleFinalized { triple_id, .. } => triple_id.to_string(),
            Event::JudgmentRecorded { judgment, .. } => judgment.triple_id.to_string(),
            Event::AccountCreated { account_id, .. }
            | Event::AccountDeactivated { account_id }
            | Event::ResetTokenIssued { account_id, .. }
            | Event::PasswordReset { account_id } => account_id.to_string(),
            Event::ResetTokenRevoked { token_digest } => token_digest.clone(),
        }
    }

    /// Events whose loss after a crash would be unacceptable.
    pub fn requires_fsync(&self) -> bool {
        matches!(
            self,
            Event::DocumentCertified { .. } | Event::TripleFinalized { .. }
        )
    }
}
