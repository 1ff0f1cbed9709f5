#![allow(dead_code)]

#[path = "../../../core/tests/support/fixture_gen.rs"]
pub mod fixture_gen;
pub mod matrix;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{HeaderMap, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use provkg_core::clock::FixedClock;
use provkg_core::governance::Role;
use provkg_core::hub::{Hub, HubConfig};
use provkg_core::llm::{LlmClient, LlmError, LlmRequest, ReplayClient, RetryPolicy};
use provkg_core::prompts::PromptRegistry;
use serde_json::Value;
use tower::ServiceExt;

pub const MODEL_ID: &str = "fixture-model";
pub const DOCUMENT_ID: &str = "ifrs-s2-guidance";
pub const GRAPH_ID: &str = "g1";

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

pub fn intake_path() -> PathBuf {
    fixtures_dir().join("ifrs_s2_guidance.intake.json")
}

pub fn replay_path() -> PathBuf {
    fixtures_dir().join("ifrs_s2_guidance.replay.jsonl")
}

pub fn intake_json() -> Value {
    serde_json::from_str(&std::fs::read_to_string(intake_path()).unwrap()).unwrap()
}

type Answer = dyn Fn(&LlmRequest) -> Option<String> + Send + Sync;

/// Answers from `script` first and falls back to the bundled replay file.
pub struct ScriptedClient {
    replay: ReplayClient,
    script: Box<Answer>,
}

impl ScriptedClient {
    pub fn new(script: impl Fn(&LlmRequest) -> Option<String> + Send + Sync + 'static) -> Self {
        Self {
            replay: ReplayClient::from_file(MODEL_ID, replay_path()).unwrap(),
            script: Box::new(script),
        }
    }
}

impl LlmClient for ScriptedClient {
    fn model_id(&self) -> &str {
        MODEL_ID
    }

    fn complete(&self, request: &LlmRequest) -> Result<String, LlmError> {
        match (self.script)(request) {
            Some(text) => Ok(text),
            None => self.replay.complete(request),
        }
    }
}

pub struct TestApp {
    pub hub: Arc<Hub>,
    pub router: Router,
}

pub fn test_config() -> HubConfig {
    let mut cfg = HubConfig::default();
    cfg.accounts.pbkdf2_rounds = 10;
    cfg.ingest.retry = RetryPolicy::no_delay(1);
    cfg.retry = RetryPolicy::no_delay(1);
    cfg
}

impl TestApp {
    pub fn with_llm(llm: Arc<dyn LlmClient>) -> Self {
        let hub = Arc::new(Hub::in_memory(
            llm,
            PromptRegistry::default(),
            test_config(),
            Arc::new(FixedClock::epoch()),
        ));
        Self::from_hub(hub)
    }

    pub fn from_hub(hub: Arc<Hub>) -> Self {
        let router = provkg_server::router(hub.clone());
        Self { hub, router }
    }

    pub fn new() -> Self {
        Self::with_llm(Arc::new(ScriptedClient::new(|_| None)))
    }

    /// Creates an account and returns a session token for it.
    pub fn login_as(&self, username: &str, role: Role) -> String {
        if self.hub.login(username, "pw").is_err() {
            self.hub.bootstrap_account("setup", username, "pw", role).unwrap();
        }
        self.hub.login(username, "pw").unwrap().token
    }

    pub fn guest(&self) -> String {
        self.hub.guest_session().token
    }

    pub async fn send(&self, req: Request<Body>) -> (StatusCode, HeaderMap, String) {
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let headers = resp.headers().clone();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, headers, String::from_utf8(bytes.to_vec()).unwrap())
    }

    pub async fn call(&self, method: Method, path: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
        let mut req = Request::builder().method(method).uri(path);
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(b.to_string()))
                .unwrap(),
            None => req.body(Body::empty()).unwrap(),
        };
        let (status, _, text) = self.send(req).await;
        let value = if text.is_empty() { Value::Null } else { serde_json::from_str(&text).unwrap_or(Value::String(text)) };
        (status, value)
    }

    pub async fn get(&self, path: &str, token: &str) -> (StatusCode, Value) {
        self.call(Method::GET, path, Some(token), None).await
    }

    pub async fn post(&self, path: &str, token: &str, body: Value) -> (StatusCode, Value) {
        self.call(Method::POST, path, Some(token), Some(body)).await
    }

    /// Ingests the bundled document through the API and waits for it.
    pub async fn ingest_fixture(&self, token: &str) -> Value {
        let (status, body) = self.post("/documents", token, intake_json()).await;
        assert_eq!(status, StatusCode::ACCEPTED, "{body}");
        let id = body["id"].as_str().unwrap().to_string();
        for _ in 0..500 {
            let (_, report) = self.get(&format!("/documents/{id}/report"), token).await;
            if report["state"] != "Ingesting" {
                return report;
            }
            assert_ne!(report["job"]["status"], "failed", "{report}");
            tokio::time::sleep(std::time::Duration::from_millis(10)).await;
        }
        panic!("ingestion did not finish");
    }

    /// Id of the triple with exactly these terms, deleted or not.
    pub fn triple_id_of(&self, spo: &provkg_core::store::Spo) -> u64 {
        let store = self.hub.store();
        let id = store
            .state()
            .graph(&GRAPH_ID.into())
            .unwrap()
            .triples()
            .find(|t| &t.spo() == spo)
            .map(|t| t.id.0)
            .unwrap_or_else(|| panic!("no triple {spo}"));
        id
    }

    /// Id of the first live triple with this subject and predicate.
    pub fn triple_id(&self, subject: &str, predicate: &str) -> u64 {
        let store = self.hub.store();
        let id = store
            .state()
            .graph(&GRAPH_ID.into())
            .unwrap()
            .triples()
            .find(|t| t.subject == subject && t.predicate == predicate)
            .map(|t| t.id.0)
            .expect("triple present");
        id
    }
}

/// Writes a replay-mode service config under `dir` and returns its path.
pub fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("provkg.yaml");
    let text = format!(
        "data_dir: data\nllm:\n  replay:\n    fixture: {}\n    model_id: {MODEL_ID}\npassword_hash_rounds: 10\n",
        replay_path().display()
    );
    std::fs::write(&path, text).unwrap();
    path
}

/// Runs the command line in-process: exit code, stdout, stderr.
pub fn cli<I: IntoIterator<Item = S>, S: AsRef<str>>(args: I) -> (i32, String, String) {
    let mut argv = vec!["provkg".to_string()];
    argv.extend(args.into_iter().map(|a| a.as_ref().to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = provkg_server::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Plays the bundled review script over HTTP and returns the certification.
pub async fn run_review_script(app: &TestApp) -> Value {
    use fixture_gen::{ReviewScript, ReviewStep};
    let script = ReviewScript::load(fixtures_dir().join(fixture_gen::REVIEW_FILE));
    let tokens: std::collections::HashMap<String, String> = script
        .accounts
        .iter()
        .map(|a| (a.username.clone(), app.login_as(&a.username, a.role)))
        .collect();
    let find = |spo: &provkg_core::store::Spo| app.triple_id_of(spo);
    let mut certification = Value::Null;
    for step in &script.steps {
        match step {
            ReviewStep::Judge { reviewer, triple, action, apply } => {
                let (status, body) = app
                    .post(
                        &format!("/triples/{}/judgments", find(triple)),
                        &tokens[reviewer],
                        serde_json::json!({"action": action, "apply": apply}),
                    )
                    .await;
                assert_eq!(status, StatusCode::CREATED, "{body}");
            }
            ReviewStep::Finalize { reviewer, triple, verdict } => {
                let (status, body) = app
                    .post(
                        &format!("/triples/{}/finalize", find(triple)),
                        &tokens[reviewer],
                        serde_json::json!({"verdict": verdict, "note": "settled"}),
                    )
                    .await;
                assert_eq!(status, StatusCode::OK, "{body}");
            }
            ReviewStep::Certify { reviewer } => {
                let (status, body) = app
                    .post(&format!("/documents/{}/certify", script.document_id), &tokens[reviewer], serde_json::json!({}))
                    .await;
                assert_eq!(status, StatusCode::OK, "{body}");
                certification = body;
            }
        }
    }
    certification
}
