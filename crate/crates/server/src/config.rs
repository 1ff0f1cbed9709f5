//! Service configuration, read from one YAML file.
//!
//! ```yaml
//! listen: 127.0.0.1:8080
//! data_dir: ./data
//! prompts: ./prompts.yaml        # optional, bundled registry otherwise
//! llm:
//!   replay:
//!     fixture: ./fixtures/run.replay.jsonl
//!     model_id: fixture-model
//! thresholds:
//!   coverage_threshold: 1.0
//!   edge_cap: 500
//!   session_ttl_secs: 86400
//! ```
//!
//! Relative paths resolve against the directory holding the file.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use provkg_core::clock::Clock;
use provkg_core::exec::ExecMode;
use provkg_core::hub::{Hub, HubConfig, DEFAULT_EDGE_CAP};
use provkg_core::llm::{HttpLlmClient, LlmClient, ReplayClient, Transport};
use provkg_core::prompts::PromptRegistry;
use provkg_core::{Error, Result};
use serde::Deserialize;

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_listen")]
    pub listen: String,
    pub data_dir: PathBuf,
    #[serde(default)]
    pub prompts: Option<PathBuf>,
    pub llm: LlmSettings,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub ingest: IngestSettings,
    /// Lower only for tests.
    #[serde(default)]
    pub password_hash_rounds: Option<u32>,
}

/// Exactly one of `live` or `replay`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmSettings {
    #[serde(default)]
    pub live: Option<LiveLlm>,
    #[serde(default)]
    pub replay: Option<ReplayLlm>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiveLlm {
    pub endpoint: String,
    pub model_id: String,
    /// Name of the environment variable holding the API key.
    pub key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_timeout() -> u64 {
    120
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayLlm {
    pub fixture: PathBuf,
    pub model_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub coverage_threshold: f64,
    pub min_judgments: usize,
    pub edge_cap: usize,
    pub session_ttl_secs: i64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            coverage_threshold: 1.0,
            min_judgments: 1,
            edge_cap: DEFAULT_EDGE_CAP,
            session_ttl_secs: 24 * 3600,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestSettings {
    pub chunk_size: Option<usize>,
    pub overlap: Option<usize>,
    pub sequential: bool,
}

impl ServiceConfig {
    pub fn from_yaml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ServiceConfig =
            serde_yaml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        };
        resolve(&mut cfg.data_dir);
        if let Some(p) = cfg.prompts.as_mut() {
            resolve(p);
        }
        if let Some(r) = cfg.llm.replay.as_mut() {
            resolve(&mut r.fixture);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_yaml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.llm.live, &self.llm.replay) {
            (Some(_), Some(_)) => Err(Error::InvalidConfig("llm: set either live or replay, not both".into())),
            (None, None) => Err(Error::InvalidConfig("llm: one of live or replay is required".into())),
            _ => {
                let t = &self.thresholds;
                if !(0.0..=1.0).contains(&t.coverage_threshold) {
                    return Err(Error::InvalidConfig("coverage_threshold must lie in [0, 1]".into()));
                }
                if t.edge_cap == 0 || t.session_ttl_secs <= 0 {
                    return Err(Error::InvalidConfig("edge_cap and session_ttl_secs must be positive".into()));
                }
                Ok(())
            }
        }
    }

    pub fn is_replay(&self) -> bool {
        self.llm.replay.is_some()
    }

    pub fn registry(&self) -> Result<PromptRegistry> {
        match &self.prompts {
            Some(p) => PromptRegistry::load(p),
            None => Ok(PromptRegistry::default()),
        }
    }

    /// The live client, or an error naming what is missing. The API key is
    /// read from the environment here.
    pub fn live_client(&self, transport: Arc<dyn Transport>) -> Result<HttpLlmClient> {
        let live = self
            .llm
            .live
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("llm.live is not configured".into()))?;
        let key = std::env::var(&live.key_env)
            .map_err(|_| Error::InvalidConfig(format!("environment variable {} is not set", live.key_env)))?;
        Ok(HttpLlmClient::new(&live.endpoint, &live.model_id, Some(key), transport))
    }

    /// Builds whichever client is configured. In replay mode `transport` is
    /// never used.
    pub fn llm_client(&self, transport: Arc<dyn Transport>) -> Result<Arc<dyn LlmClient>> {
        match &self.llm.replay {
            Some(r) => Ok(Arc::new(ReplayClient::from_file(&r.model_id, &r.fixture)?)),
            None => Ok(Arc::new(self.live_client(transport)?)),
        }
    }

    pub fn hub_config(&self, registry: &PromptRegistry) -> HubConfig {
        let mut cfg = HubConfig::default();
        let chunk = registry.chunk_defaults();
        cfg.ingest.chunk.chunk_size = self.ingest.chunk_size.unwrap_or(chunk.chunk_size);
        cfg.ingest.chunk.overlap = self.ingest.overlap.unwrap_or(chunk.overlap);
        if self.ingest.sequential {
            cfg.ingest.exec = ExecMode::Sequential;
            cfg.exec = ExecMode::Sequential;
        }
        cfg.readiness.coverage_threshold = self.thresholds.coverage_threshold;
        cfg.readiness.min_judgments = self.thresholds.min_judgments;
        cfg.edge_cap = self.thresholds.edge_cap;
        cfg.accounts.session_ttl_secs = self.thresholds.session_ttl_secs;
        if let Some(r) = self.password_hash_rounds {
            cfg.accounts.pbkdf2_rounds = r;
        }
        cfg
    }

    pub fn open_hub(&self, transport: Arc<dyn Transport>, clock: Arc<dyn Clock>) -> Result<Hub> {
        let registry = self.registry()?;
        let llm = self.llm_client(transport)?;
        Hub::open(&self.data_dir, llm, registry.clone(), self.hub_config(&registry), clock)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REPLAY: &str = "data_dir: data\nllm:\n  replay:\n    fixture: fx.jsonl\n    model_id: m\n";

    #[test]
    fn relative_paths_follow_the_file() {
        let cfg = ServiceConfig::from_yaml(REPLAY, Path::new("/srv/kg")).unwrap();
        assert_eq!(cfg.data_dir, PathBuf::from("/srv/kg/data"));
        assert_eq!(cfg.llm.replay.unwrap().fixture, PathBuf::from("/srv/kg/fx.jsonl"));
        assert_eq!(cfg.listen, "127.0.0.1:8080");
        assert_eq!(cfg.thresholds, Thresholds::default());
    }

    #[test]
    fn exactly_one_llm_mode() {
        let both = format!("{REPLAY}  live:\n    endpoint: http://x\n    model_id: m\n    key_env: K\n");
        assert!(matches!(ServiceConfig::from_yaml(&both, Path::new(".")), Err(Error::InvalidConfig(_))));
        let none = "data_dir: d\nllm: {}\n";
        assert!(matches!(ServiceConfig::from_yaml(none, Path::new(".")), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn missing_key_variable_is_a_startup_error() {
        let text = "data_dir: d\nllm:\n  live:\n    endpoint: http://x\n    model_id: m\n    key_env: PROVKG_TEST_KEY_THAT_IS_NOT_SET\n";
        let cfg = ServiceConfig::from_yaml(text, Path::new(".")).unwrap();
        let Err(err) = cfg.llm_client(Arc::new(provkg_core::llm::UreqTransport::default())) else {
            panic!("live client built without a key");
        };
        assert!(err.to_string().contains("PROVKG_TEST_KEY_THAT_IS_NOT_SET"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{REPLAY}colour: blue\n");
        assert!(ServiceConfig::from_yaml(&text, Path::new(".")).is_err());
    }
}
