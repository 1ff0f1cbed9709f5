//! Every role against every guarded endpoint.

use axum::http::{Method, StatusCode};
use provkg_core::governance::{ActionKind, Principal, Role};
use provkg_core::hub::IngestOverrides;
use provkg_core::ingest::Intake;
use serde_json::{json, Value};

use super::{intake_path, TestApp, DOCUMENT_ID, GRAPH_ID};

/// Written out by hand so the check does not lean on the code under test.
pub fn expected(role: Role, action: ActionKind) -> bool {
    use ActionKind::*;
    let granted: &[ActionKind] = match role {
        Role::Guest => &[Read, RunTask, Export],
        Role::Expert => &[
            Read, RunTask, Export, ViewDeleted, ViewAudit, VerifyAudit, Ingest, MutateTriple, Judge, RunVerifier,
            MergeEntities,
        ],
        Role::MetaExpert => &[
            Read, RunTask, Export, ViewDeleted, ViewAudit, VerifyAudit, Ingest, MutateTriple, Judge, RunVerifier,
            MergeEntities, FinalizeTriple, CertifyDocument,
        ],
        Role::Admin => &[Read, RunTask, Export, ViewDeleted, ViewAudit, VerifyAudit, ManageAccounts],
    };
    granted.contains(&action)
}

pub struct Probe {
    pub action: ActionKind,
    pub method: Method,
    pub path: String,
    pub body: Option<Value>,
}

fn probe(action: ActionKind, method: Method, path: impl Into<String>, body: Option<Value>) -> Probe {
    Probe {
        action,
        method,
        path: path.into(),
        body,
    }
}

/// Probes in an order where earlier calls cannot turn later ones into 403s.
pub fn probes(t1: u64, t2: u64, t3: u64, account: u64) -> Vec<Probe> {
    use ActionKind::*;
    let d = DOCUMENT_ID;
    let g = GRAPH_ID;
    let graphs = json!({"graph_ids": [g, "other"]});
    vec![
        probe(Read, Method::GET, "/catalog", None),
        probe(Read, Method::GET, format!("/documents/{d}"), None),
        probe(Read, Method::GET, format!("/documents/{d}/report"), None),
        probe(Read, Method::GET, format!("/documents/{d}/graph"), None),
        probe(Read, Method::GET, format!("/documents/{d}/readiness"), None),
        probe(Read, Method::GET, format!("/triples/{t1}"), None),
        probe(Read, Method::GET, format!("/triples/{t1}/evidence"), None),
        probe(Read, Method::POST, "/fusion/overlaps", Some(graphs.clone())),
        probe(Read, Method::POST, "/fusion/preview", Some(graphs)),
        probe(RunTask, Method::POST, "/tasks/kgqa", Some(json!({"graph_id": g, "question": "what is reported?"}))),
        probe(
            RunTask,
            Method::POST,
            "/tasks/paths",
            Some(json!({"graph_id": g, "source": "Oil and Gas industry", "target": "total energy consumed"})),
        ),
        probe(
            RunTask,
            Method::POST,
            "/tasks/neighborhood",
            Some(json!({"graph_id": g, "entity": "Oil and Gas industry"})),
        ),
        probe(
            RunTask,
            Method::POST,
            "/tasks/compare",
            Some(json!({"graph_id": g, "entities": ["Oil and Gas industry", "Coal Operations industry"]})),
        ),
        probe(RunTask, Method::POST, "/tasks/duplicates", Some(json!({"graph_id": g}))),
        probe(RunTask, Method::POST, "/tasks/gaps", Some(json!({"graph_id": g}))),
        probe(RunTask, Method::POST, "/tasks/diagnostics", Some(json!({"graph_id": g}))),
        probe(RunTask, Method::POST, "/tasks/trace", Some(json!({"graph_id": g}))),
        probe(RunTask, Method::POST, "/analytics", Some(json!({"graph_id": g, "preset": "executive", "depth": 1}))),
        probe(Export, Method::GET, format!("/export/edges?graph_id={g}"), None),
        probe(ViewDeleted, Method::GET, format!("/documents/{d}/graph?include_deleted=true"), None),
        probe(ViewDeleted, Method::GET, format!("/export/edges?graph_id={g}&include_deleted=true"), None),
        probe(ViewAudit, Method::GET, "/audit", None),
        probe(VerifyAudit, Method::GET, "/audit/verify", None),
        probe(
            Ingest,
            Method::POST,
            "/documents",
            Some(json!({"title": "t", "document_id": "probe-doc", "standard": "tcfd", "pages": [{"page": 1, "text": "x"}]})),
        ),
        probe(
            MutateTriple,
            Method::POST,
            "/triples",
            Some(json!({"document_id": d, "subject": "a", "predicate": "b", "object": "c"})),
        ),
        probe(MutateTriple, Method::PATCH, format!("/triples/{t2}"), Some(json!({"object": "changed"}))),
        probe(MutateTriple, Method::DELETE, format!("/triples/{t2}"), None),
        probe(MutateTriple, Method::POST, format!("/triples/{t2}/restore"), Some(json!({}))),
        probe(Judge, Method::POST, format!("/triples/{t3}/judgments"), Some(json!({"action": "keep"}))),
        probe(RunVerifier, Method::POST, format!("/triples/{t3}/verify"), Some(json!({}))),
        probe(
            MergeEntities,
            Method::POST,
            "/fusion/merge",
            Some(json!({"actions": [{"kind": "rename", "graph_id": g, "from": "Coal Operations industry", "to": "Coal industry"}]})),
        ),
        probe(FinalizeTriple, Method::POST, format!("/triples/{t3}/finalize"), Some(json!({"verdict": "certify"}))),
        probe(CertifyDocument, Method::POST, format!("/documents/{d}/certify"), Some(json!({}))),
        probe(ManageAccounts, Method::GET, "/admin/accounts", None),
        probe(
            ManageAccounts,
            Method::POST,
            "/admin/accounts",
            Some(json!({"username": "probe", "password": "pw", "role": "guest"})),
        ),
        probe(ManageAccounts, Method::POST, "/admin/reset-tokens", Some(json!({"account_id": account}))),
        probe(ManageAccounts, Method::POST, "/admin/reset-tokens/revoke", Some(json!({"token": "none"}))),
        probe(ManageAccounts, Method::POST, format!("/admin/accounts/{account}/deactivate"), Some(json!({}))),
    ]
}

pub struct Outcome {
    pub role: Role,
    pub action: ActionKind,
    pub method: Method,
    pub path: String,
    pub status: StatusCode,
    pub code: Option<String>,
}

impl Outcome {
    /// Denied calls must be 403 `unauthorized`; allowed ones anything but.
    pub fn conforms(&self) -> bool {
        let denied = self.status == StatusCode::FORBIDDEN && self.code.as_deref() == Some("unauthorized");
        expected(self.role, self.action) != denied
    }
}

/// Runs every probe as `role` against a freshly ingested fixture.
pub async fn run_role(role: Role) -> Vec<Outcome> {
    let app = TestApp::new();
    let loader = Principal::system("loader", Role::Expert);
    app.hub
        .ingest(&loader, Intake::load(intake_path()).unwrap(), IngestOverrides::default())
        .unwrap();
    let token = match role {
        Role::Guest => app.guest(),
        r => app.login_as("probe-user", r),
    };
    let spare = app.hub.bootstrap_account("setup", "spare", "pw", Role::Expert).unwrap();
    let t1 = app.triple_id("Oil and Gas industry", "discloses");
    let t2 = app.triple_id("Coal Operations industry", "reports");
    let t3 = app.triple_id("Electric Utilities industry", "faces");
    let mut out = Vec::new();
    for p in probes(t1, t2, t3, spare.id.0) {
        let (status, body) = app.call(p.method.clone(), &p.path, Some(&token), p.body).await;
        out.push(Outcome {
            role,
            action: p.action,
            method: p.method,
            path: p.path,
            status,
            code: body.get("code").and_then(Value::as_str).map(str::to_string),
        });
    }
    out
}

/// Every guarded endpoint answers 401 without a token.
pub async fn unauthenticated_statuses() -> Vec<(String, StatusCode)> {
    let app = TestApp::new();
    let mut out = Vec::new();
    for p in probes(1, 2, 3, 1) {
        let (status, _) = app.call(p.method, &p.path, None, p.body).await;
        out.push((p.path, status));
    }
    out
}
