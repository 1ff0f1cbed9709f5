//! Roles and the permission matrix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::AccountId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Guest,
    Expert,
    MetaExpert,
    Admin,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::Guest, Role::Expert, Role::MetaExpert, Role::Admin];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Guest => "guest",
            Role::Expert => "expert",
            Role::MetaExpert => "meta_expert",
            Role::Admin => "admin",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Role::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown role `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Read,
    RunTask,
    Export,
    /// Views and exports that include soft-deleted triples.
    ViewDeleted,
    Ingest,
    MutateTriple,
    Judge,
    RunVerifier,
    MergeEntities,
    FinalizeTriple,
    CertifyDocument,
    ManageAccounts,
    ViewAudit,
    VerifyAudit,
}

impl ActionKind {
    pub const ALL: [ActionKind; 14] = [
        ActionKind::Read,
        ActionKind::RunTask,
        ActionKind::Export,
        ActionKind::ViewDeleted,
        ActionKind::Ingest,
        ActionKind::MutateTriple,
        ActionKind::Judge,
        ActionKind::RunVerifier,
        ActionKind::MergeEntities,
        ActionKind::FinalizeTriple,
        ActionKind::CertifyDocument,
        ActionKind::ManageAccounts,
        ActionKind::ViewAudit,
        ActionKind::VerifyAudit,
    ];
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().unwrap_or_default())
    }
}

/// The permission matrix. Meta experts inherit expert rights; admins manage
/// accounts but never mutate graphs.
pub fn allows(role: Role, action: ActionKind) -> bool {
    use ActionKind::*;
    match action {
        Read | RunTask | Export => true,
        ViewDeleted | ViewAudit | VerifyAudit => role != Role::Guest,
        Ingest | MutateTriple | Judge | RunVerifier | MergeEntities => {
            matches!(role, Role::Expert | Role::MetaExpert)
        }
        FinalizeTriple | CertifyDocument => role == Role::MetaExpert,
        ManageAccounts => role == Role::Admin,
    }
}

pub fn authorize(role: Role, action: ActionKind) -> Result<()> {
    if allows(role, action) {
        Ok(())
    } else {
        Err(Error::Unauthorized { role, action })
    }
}

/// Whoever is acting: a logged-in account or the anonymous guest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Principal {
    pub account_id: Option<AccountId>,
    pub username: String,
    pub role: Role,
}

impl Principal {
    pub fn guest() -> Self {
        Self {
            account_id: None,
            username: "guest".into(),
            role: Role::Guest,
        }
    }

    /// A principal for local tooling (CLI runs, fixtures) with no account.
    pub fn system(username: impl Into<String>, role: Role) -> Self {
        Self {
            account_id: None,
            username: username.into(),
            role,
        }
    }

    /// Name written to the audit log.
    pub fn actor(&self) -> String {
        self.username.clone()
    }

    pub fn authorize(&self, action: ActionKind) -> Result<()> {
        authorize(self.role, action)
    }
}
