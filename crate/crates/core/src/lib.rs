//! Provenance-aware knowledge graph curation.
//!
//! Documents are ingested into draft graphs by an LLM extraction pipeline,
//! reviewed by experts, finalized by a meta expert and certified. Every
//! change lands in a hash-chained event log.

pub mod clock;
pub mod document;
pub mod error;
pub mod exec;
pub mod fusion;
pub mod governance;
pub mod hub;
pub mod ids;
pub mod ingest;
pub mod llm;
pub mod prompts;
pub mod store;
pub mod tasks;

pub use error::{Error, Result};
