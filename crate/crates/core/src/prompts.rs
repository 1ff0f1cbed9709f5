//! Prompt registry backed by a YAML file.

use std::path::Path;

use serde_yaml::Value;

use crate::document::StandardId;
use crate::error::{Error, Result};
use crate::ingest::ChunkConfig;

pub const DEFAULT_REGISTRY: &str = include_str!("../prompts/default.yaml");

/// The system prompt and user template chosen for one extraction run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionPrompts {
    pub system_prompt: String,
    pub user_prompt_template: String,
}

impl ExtractionPrompts {
    /// Fills the chunk text into whichever placeholder the template uses.
    pub fn render_user(&self, chunk: &str) -> String {
        render(&self.user_prompt_template, &[("content", chunk), ("chunk", chunk)])
    }
}

#[derive(Debug, Clone)]
pub struct PromptRegistry {
    root: Value,
}

impl Default for PromptRegistry {
    fn default() -> Self {
        Self::from_yaml(DEFAULT_REGISTRY).expect("bundled registry parses")
    }
}

/// Replaces `{name}` placeholders. Other braces are left alone, so JSON
/// schemas inside templates survive.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (name, value) in vars {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}

impl PromptRegistry {
    pub fn from_yaml(text: &str) -> Result<Self> {
        let root: Value = serde_yaml::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("prompt registry: {e}")))?;
        if !root.is_mapping() {
            return Err(Error::InvalidConfig("prompt registry must be a mapping".into()));
        }
        Ok(Self { root })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_yaml(&std::fs::read_to_string(path)?)
    }

    /// Looks up a dotted key such as `extraction.tcfd.system`.
    pub fn get(&self, key: &str) -> Result<&str> {
        let mut node = &self.root;
        for part in key.split('.') {
            node = node
                .get(part)
                .ok_or_else(|| Error::MissingPrompt(key.to_string()))?;
        }
        node.as_str().ok_or_else(|| Error::MissingPrompt(key.to_string()))
    }

    pub fn chunk_defaults(&self) -> ChunkConfig {
        let read = |k: &str| self.root.get(k).and_then(Value::as_u64).map(|v| v as usize);
        let base = ChunkConfig::default();
        ChunkConfig {
            chunk_size: read("chunk_size").unwrap_or(base.chunk_size),
            overlap: read("overlap").unwrap_or(base.overlap),
        }
    }

    pub fn identification(&self) -> Result<&str> {
        self.get("identification.system")
    }

    pub fn select_prompt(&self, standard: StandardId) -> Result<ExtractionPrompts> {
        let (system, user) = match standard {
            StandardId::Unknown => (
                self.get("extraction.general.system")?,
                self.get("extraction.general.user")?,
            ),
            s => (
                self.get(&format!("extraction.{}.system", s.as_str()))?,
                self.get("extraction.chunk_user")?,
            ),
        };
        Ok(ExtractionPrompts {
            system_prompt: system.to_string(),
            user_prompt_template: user.to_string(),
        })
    }

    pub fn analysis_preset(&self, preset: &str) -> Result<&str> {
        self.get(&format!("analysis.presets.{preset}"))
    }

    pub fn analysis_mode(&self, depth: u8) -> Result<&str> {
        self.get(&format!("analysis.modes.{depth}"))
    }
}
