//! HTTP/JSON routes. Every handler resolves the bearer token to a
//! principal and hands it to the hub, which authorizes before acting.

use std::collections::BTreeSet;
use std::sync::Arc;

use axum::async_trait;
use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, FromRequestParts, Path, Query, Request, State};
use axum::http::header::{ACCEPT, AUTHORIZATION, CONTENT_TYPE};
use axum::http::request::Parts;
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use provkg_core::fusion::MergePlan;
use provkg_core::governance::{FinalVerdict, JudgmentInput, Principal, Role};
use provkg_core::hub::{AuditQuery, CatalogSort, ExportQuery, Hub, IngestOverrides, NewTriple};
use provkg_core::ids::{AccountId, DocumentId, GraphId, TripleId};
use provkg_core::ingest::Intake;
use provkg_core::store::{EdgeFilter, TriplePatch};
use provkg_core::tasks::{AnalysisRequest, KgqaOptions, TraceFilter, DEFAULT_MAX_PATHS};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::ApiError;

pub type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone)]
pub struct AppState {
    pub hub: Arc<Hub>,
}

/// JSON body whose parse failures come back as an [`ApiError`].
pub struct Body<T>(pub T);

#[async_trait]
impl<T: DeserializeOwned, S: Send + Sync> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        axum::Json::<T>::from_request(req, state)
            .await
            .map(|j| Body(j.0))
            .map_err(|e: JsonRejection| ApiError::bad_request(e.body_text()))
    }
}

/// Query string whose parse failures come back as an [`ApiError`].
pub struct Params<T>(pub T);

#[async_trait]
impl<T: DeserializeOwned, S: Send + Sync> FromRequestParts<S> for Params<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|q| Params(q.0))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

/// JSON response with an explicit status.
pub struct Reply<T>(pub StatusCode, pub T);

impl<T: Serialize> IntoResponse for Reply<T> {
    fn into_response(self) -> Response {
        (self.0, axum::Json(self.1)).into_response()
    }
}

fn ok<T>(value: T) -> ApiResult<Reply<T>> {
    Ok(Reply(StatusCode::OK, value))
}

fn created<T>(value: T) -> ApiResult<Reply<T>> {
    Ok(Reply(StatusCode::CREATED, value))
}

/// The caller, resolved from `Authorization: Bearer <token>`.
pub struct Auth(pub Principal);

#[async_trait]
impl FromRequestParts<AppState> for Auth {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let header = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .ok_or_else(ApiError::unauthenticated)?;
        let token = header.strip_prefix("Bearer ").ok_or_else(ApiError::unauthenticated)?;
        Ok(Auth(state.hub.principal(token.trim())?))
    }
}

/// Runs hub work off the async executor; it may block on locks or a model.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce() -> ApiResult<T> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

fn triple_id(raw: &str) -> ApiResult<TripleId> {
    raw.trim_start_matches('t')
        .parse()
        .map(TripleId)
        .map_err(|_| ApiError::bad_request(format!("bad triple id `{raw}`")))
}

fn csv_set(raw: &Option<String>) -> Option<BTreeSet<String>> {
    raw.as_ref().map(|s| {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::to_string)
            .collect()
    })
}

pub fn router(hub: Arc<Hub>) -> Router {
    Router::new()
        .route("/auth/login", post(login))
        .route("/auth/guest", post(guest))
        .route("/auth/logout", post(logout))
        .route("/auth/reset", post(reset_password))
        .route("/catalog", get(catalog))
        .route("/documents", post(ingest))
        .route("/documents/:id", get(document))
        .route("/documents/:id/report", get(report))
        .route("/documents/:id/graph", get(document_graph))
        .route("/documents/:id/readiness", get(readiness))
        .route("/documents/:id/certify", post(certify))
        .route("/triples", post(create_triple))
        .route("/triples/:id", get(get_triple).patch(patch_triple).delete(delete_triple))
        .route("/triples/:id/restore", post(restore_triple))
        .route("/triples/:id/evidence", get(evidence))
        .route("/triples/:id/judgments", post(judge))
        .route("/triples/:id/verify", post(verify))
        .route("/triples/:id/finalize", post(finalize))
        .route("/fusion/overlaps", post(overlaps))
        .route("/fusion/preview", post(preview))
        .route("/fusion/merge", post(merge))
        .route("/tasks/kgqa", post(task_kgqa))
        .route("/tasks/paths", post(task_paths))
        .route("/tasks/neighborhood", post(task_neighborhood))
        .route("/tasks/compare", post(task_compare))
        .route("/tasks/duplicates", post(task_duplicates))
        .route("/tasks/gaps", post(task_gaps))
        .route("/tasks/diagnostics", post(task_diagnostics))
        .route("/tasks/trace", post(task_trace))
        .route("/analytics", post(analytics))
        .route("/audit", get(audit))
        .route("/audit/verify", get(verify_audit))
        .route("/export/edges", get(export_edges))
        .route("/admin/accounts", get(list_accounts).post(create_account))
        .route("/admin/accounts/:id/deactivate", post(deactivate_account))
        .route("/admin/reset-tokens", post(issue_reset_token))
        .route("/admin/reset-tokens/revoke", post(revoke_reset_token))
        .fallback(|| async { ApiError::route_not_found() })
        .with_state(AppState { hub })
}

// Auth.

#[derive(Deserialize)]
struct LoginBody {
    username: String,
    password: String,
}

async fn login(State(st): State<AppState>, Body(b): Body<LoginBody>) -> ApiResult<impl IntoResponse> {
    let session = blocking(move || Ok(st.hub.login(&b.username, &b.password)?)).await?;
    ok(session)
}

async fn guest(State(st): State<AppState>) -> ApiResult<impl IntoResponse> {
    ok(st.hub.guest_session())
}

async fn logout(State(st): State<AppState>, headers: HeaderMap) -> ApiResult<impl IntoResponse> {
    let token = headers
        .get(AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|h| h.strip_prefix("Bearer "))
        .ok_or_else(ApiError::unauthenticated)?;
    ok(json!({"logged_out": st.hub.logout(token.trim())}))
}

#[derive(Deserialize)]
struct ResetBody {
    token: String,
    new_password: String,
}

async fn reset_password(State(st): State<AppState>, Body(b): Body<ResetBody>) -> ApiResult<impl IntoResponse> {
    blocking(move || Ok(st.hub.reset_password(&b.token, &b.new_password)?)).await?;
    ok(json!({"reset": true}))
}

// Catalog and documents.

#[derive(Deserialize)]
struct CatalogQuery {
    #[serde(default)]
    sort: CatalogSort,
}

async fn catalog(State(st): State<AppState>, Auth(p): Auth, Params(q): Params<CatalogQuery>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.catalog(&p, q.sort)?)).await?)
}

#[derive(Deserialize)]
struct IngestBody {
    #[serde(flatten)]
    intake: Intake,
    #[serde(flatten)]
    overrides: IngestOverrides,
}

async fn ingest(State(st): State<AppState>, Auth(p): Auth, Body(b): Body<IngestBody>) -> ApiResult<impl IntoResponse> {
    let view = blocking(move || Ok(st.hub.start_ingest(&p, b.intake, b.overrides)?)).await?;
    Ok(Reply(StatusCode::ACCEPTED, view))
}

async fn document(State(st): State<AppState>, Auth(p): Auth, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.document(&p, &DocumentId::new(id))?)).await?)
}

async fn report(State(st): State<AppState>, Auth(p): Auth, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.report(&p, &DocumentId::new(id))?)).await?)
}

#[derive(Deserialize)]
struct GraphQuery {
    entity: Option<String>,
    hops: Option<usize>,
    predicates: Option<String>,
    #[serde(default)]
    include_deleted: bool,
    cap: Option<usize>,
}

async fn document_graph(
    State(st): State<AppState>,
    Auth(p): Auth,
    Path(id): Path<String>,
    Params(q): Params<GraphQuery>,
) -> ApiResult<impl IntoResponse> {
    let filter = EdgeFilter {
        predicates: csv_set(&q.predicates),
        document_ids: None,
        include_deleted: q.include_deleted,
    };
    ok(blocking(move || {
        let entity = q.entity.as_deref().filter(|e| !e.is_empty());
        Ok(st
            .hub
            .document_graph(&p, &DocumentId::new(id), entity, q.hops.unwrap_or(1), &filter, q.cap)?)
    })
    .await?)
}

async fn readiness(State(st): State<AppState>, Auth(p): Auth, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.readiness(&p, &DocumentId::new(id))?)).await?)
}

async fn certify(State(st): State<AppState>, Auth(p): Auth, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.certify(&p, &DocumentId::new(id))?)).await?)
}

// Triples.

async fn create_triple(State(st): State<AppState>, Auth(p): Auth, Body(b): Body<NewTriple>) -> ApiResult<impl IntoResponse> {
    let inserted = blocking(move || Ok(st.hub.create_triple(&p, b)?)).await?;
    let status = if inserted.deduplicated { StatusCode::OK } else { StatusCode::CREATED };
    Ok(Reply(status, inserted))
}

async fn get_triple(State(st): State<AppState>, Auth(p): Auth, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let id = triple_id(&id)?;
    ok(blocking(move || Ok(st.hub.triple(&p, id)?)).await?)
}

async fn patch_triple(
    State(st): State<AppState>,
    Auth(p): Auth,
    Path(id): Path<String>,
    Body(patch): Body<TriplePatch>,
) -> ApiResult<impl IntoResponse> {
    let id = triple_id(&id)?;
    ok(blocking(move || Ok(st.hub.update_triple(&p, id, &patch)?)).await?)
}

async fn delete_triple(State(st): State<AppState>, Auth(p): Auth, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let id = triple_id(&id)?;
    ok(blocking(move || Ok(st.hub.delete_triple(&p, id)?)).await?)
}

async fn restore_triple(State(st): State<AppState>, Auth(p): Auth, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let id = triple_id(&id)?;
    ok(blocking(move || Ok(st.hub.restore_triple(&p, id)?)).await?)
}

async fn evidence(State(st): State<AppState>, Auth(p): Auth, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let id = triple_id(&id)?;
    ok(blocking(move || Ok(st.hub.evidence(&p, id)?)).await?)
}

async fn judge(
    State(st): State<AppState>,
    Auth(p): Auth,
    Path(id): Path<String>,
    Body(input): Body<JudgmentInput>,
) -> ApiResult<impl IntoResponse> {
    let id = triple_id(&id)?;
    created(blocking(move || Ok(st.hub.judge(&p, id, input)?)).await?)
}

async fn verify(State(st): State<AppState>, Auth(p): Auth, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let id = triple_id(&id)?;
    ok(blocking(move || Ok(st.hub.verify_triple(&p, id)?)).await?)
}

#[derive(Deserialize)]
struct FinalizeBody {
    verdict: FinalVerdict,
    #[serde(default)]
    note: String,
}

async fn finalize(
    State(st): State<AppState>,
    Auth(p): Auth,
    Path(id): Path<String>,
    Body(b): Body<FinalizeBody>,
) -> ApiResult<impl IntoResponse> {
    let id = triple_id(&id)?;
    ok(blocking(move || Ok(st.hub.finalize(&p, id, b.verdict, &b.note)?)).await?)
}

// Fusion.

#[derive(Deserialize)]
struct GraphSet {
    graph_ids: Vec<GraphId>,
    #[serde(default)]
    cap: Option<usize>,
}

async fn overlaps(State(st): State<AppState>, Auth(p): Auth, Body(b): Body<GraphSet>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.overlaps(&p, &b.graph_ids)?)).await?)
}

async fn preview(State(st): State<AppState>, Auth(p): Auth, Body(b): Body<GraphSet>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.fused_preview(&p, &b.graph_ids, b.cap)?)).await?)
}

async fn merge(State(st): State<AppState>, Auth(p): Auth, Body(plan): Body<MergePlan>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.merge(&p, plan)?)).await?)
}

// Tasks.

#[derive(Deserialize)]
struct KgqaBody {
    graph_id: GraphId,
    question: String,
    #[serde(default)]
    options: KgqaOptions,
    /// Also ask the model for a natural-language answer.
    #[serde(default)]
    answer: bool,
}

async fn task_kgqa(State(st): State<AppState>, Auth(p): Auth, Body(b): Body<KgqaBody>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.kgqa(&p, &b.graph_id, &b.question, &b.options, b.answer)?)).await?)
}

fn default_path_hops() -> usize {
    3
}

#[derive(Deserialize)]
struct PathsBody {
    graph_id: GraphId,
    source: String,
    target: String,
    #[serde(default = "default_path_hops")]
    max_hops: usize,
}

async fn task_paths(State(st): State<AppState>, Auth(p): Auth, Body(b): Body<PathsBody>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || {
        let mut paths = st.hub.paths(&p, &b.graph_id, &b.source, &b.target, b.max_hops)?;
        paths.truncate(DEFAULT_MAX_PATHS);
        Ok(paths)
    })
    .await?)
}

fn default_hops() -> usize {
    1
}

#[derive(Deserialize)]
struct NeighborhoodBody {
    graph_id: GraphId,
    entity: String,
    #[serde(default = "default_hops")]
    hops: usize,
}

async fn task_neighborhood(
    State(st): State<AppState>,
    Auth(p): Auth,
    Body(b): Body<NeighborhoodBody>,
) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.neighborhood(&p, &b.graph_id, &b.entity, b.hops)?)).await?)
}

#[derive(Deserialize)]
struct CompareBody {
    graph_id: GraphId,
    entities: Vec<String>,
}

async fn task_compare(State(st): State<AppState>, Auth(p): Auth, Body(b): Body<CompareBody>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.compare(&p, &b.graph_id, &b.entities)?)).await?)
}

#[derive(Deserialize)]
struct DuplicatesBody {
    graph_id: GraphId,
    #[serde(default)]
    max_distance: Option<usize>,
}

async fn task_duplicates(
    State(st): State<AppState>,
    Auth(p): Auth,
    Body(b): Body<DuplicatesBody>,
) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.duplicates(&p, &b.graph_id, b.max_distance)?)).await?)
}

#[derive(Deserialize)]
struct GapsBody {
    graph_id: GraphId,
    #[serde(default)]
    checklist: Option<String>,
}

async fn task_gaps(State(st): State<AppState>, Auth(p): Auth, Body(b): Body<GapsBody>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.gaps(&p, &b.graph_id, b.checklist.as_deref())?)).await?)
}

#[derive(Deserialize)]
struct GraphBody {
    graph_id: GraphId,
}

async fn task_diagnostics(State(st): State<AppState>, Auth(p): Auth, Body(b): Body<GraphBody>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.diagnostics(&p, &b.graph_id)?)).await?)
}

#[derive(Deserialize)]
struct TraceBody {
    graph_id: GraphId,
    #[serde(flatten)]
    filter: TraceFilter,
}

async fn task_trace(State(st): State<AppState>, Auth(p): Auth, Body(b): Body<TraceBody>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.trace(&p, &b.graph_id, &b.filter)?)).await?)
}

#[derive(Deserialize)]
struct AnalyticsBody {
    graph_id: GraphId,
    #[serde(flatten)]
    request: AnalysisRequest,
}

async fn analytics(State(st): State<AppState>, Auth(p): Auth, Body(b): Body<AnalyticsBody>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.analytics(&p, &b.graph_id, &b.request)?)).await?)
}

// Audit and export.

async fn audit(State(st): State<AppState>, Auth(p): Auth, Params(q): Params<AuditQuery>) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.audit(&p, &q)?)).await?)
}

async fn verify_audit(State(st): State<AppState>, Auth(p): Auth) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.verify_audit(&p)?)).await?)
}

#[derive(Deserialize)]
struct ExportParams {
    graph_id: GraphId,
    predicates: Option<String>,
    document_id: Option<String>,
    #[serde(default)]
    include_deleted: bool,
    #[serde(default)]
    include_rejected: bool,
    format: Option<String>,
}

async fn export_edges(
    State(st): State<AppState>,
    Auth(p): Auth,
    headers: HeaderMap,
    Params(q): Params<ExportParams>,
) -> ApiResult<Response> {
    let wants_csv = match q.format.as_deref() {
        Some("csv") => true,
        Some("json") | Some("jsonl") => false,
        Some(other) => return Err(ApiError::bad_request(format!("unknown format `{other}`"))),
        None => headers
            .get(ACCEPT)
            .and_then(|v| v.to_str().ok())
            .is_some_and(|a| a.contains("text/csv")),
    };
    let query = ExportQuery {
        graph_id: q.graph_id,
        filter: EdgeFilter {
            predicates: csv_set(&q.predicates),
            document_ids: q.document_id.map(|d| BTreeSet::from([DocumentId::new(d)])),
            include_deleted: q.include_deleted,
        },
        include_rejected: q.include_rejected,
    };
    let export = blocking(move || Ok(st.hub.export(&p, &query)?)).await?;
    if wants_csv {
        Ok(([(CONTENT_TYPE, "text/csv; charset=utf-8")], export.to_csv()).into_response())
    } else {
        Ok(axum::Json(export).into_response())
    }
}

// Admin.

#[derive(Deserialize)]
struct NewAccountBody {
    username: String,
    password: String,
    role: Role,
}

async fn list_accounts(State(st): State<AppState>, Auth(p): Auth) -> ApiResult<impl IntoResponse> {
    ok(blocking(move || Ok(st.hub.list_accounts(&p)?)).await?)
}

async fn create_account(State(st): State<AppState>, Auth(p): Auth, Body(b): Body<NewAccountBody>) -> ApiResult<impl IntoResponse> {
    created(blocking(move || Ok(st.hub.create_account(&p, &b.username, &b.password, b.role)?)).await?)
}

async fn deactivate_account(State(st): State<AppState>, Auth(p): Auth, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let id = id
        .parse()
        .map(AccountId)
        .map_err(|_| ApiError::bad_request(format!("bad account id `{id}`")))?;
    ok(blocking(move || Ok(st.hub.deactivate_account(&p, id)?)).await?)
}

#[derive(Deserialize)]
struct ResetTokenBody {
    account_id: AccountId,
}

async fn issue_reset_token(
    State(st): State<AppState>,
    Auth(p): Auth,
    Body(b): Body<ResetTokenBody>,
) -> ApiResult<impl IntoResponse> {
    created(blocking(move || Ok(st.hub.issue_reset_token(&p, b.account_id)?)).await?)
}

#[derive(Deserialize)]
struct RevokeBody {
    token: String,
}

async fn revoke_reset_token(State(st): State<AppState>, Auth(p): Auth, Body(b): Body<RevokeBody>) -> ApiResult<impl IntoResponse> {
    blocking(move || Ok(st.hub.revoke_reset_token(&p, &b.token)?)).await?;
    ok(json!({"revoked": true}))
}
