//! Access control, review workflow, verification and certification.

mod accounts;
mod rbac;
mod review;
mod verifier;

pub use accounts::{Account, AccountStore, AccountsConfig, IssuedResetToken, Session};
pub use rbac::{allows, authorize, ActionKind, Principal, Role};
pub use review::{
    aggregate, certify_document, meta_finalize_triple, readiness, submit_judgment, Aggregate, FinalVerdict,
    Judgment, JudgmentInput, ReadinessConfig, ReadinessReport, ReviewAction, Verdict, VERIFIER_REVIEWER,
};
pub use verifier::{
    parse_assessment, record_assessment, run_verifier, verifier_request, VerifierAssessment, NO_EVIDENCE,
};
