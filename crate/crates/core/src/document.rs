//! Ingested documents and their lifecycle.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;
use crate::ids::{DocumentId, GraphId};
use crate::ingest::IngestReport;

/// One page of pre-extracted text. Pages are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageText {
    pub page: u32,
    pub text: String,
}

/// Disclosure framework used to route extraction prompts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StandardId {
    Sasb,
    Gri,
    IfrsS2,
    Tcfd,
    #[default]
    Unknown,
}

impl StandardId {
    pub const KNOWN: [StandardId; 4] = [
        StandardId::Sasb,
        StandardId::Gri,
        StandardId::IfrsS2,
        StandardId::Tcfd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StandardId::Sasb => "sasb",
            StandardId::Gri => "gri",
            StandardId::IfrsS2 => "ifrs_s2",
            StandardId::Tcfd => "tcfd",
            StandardId::Unknown => "unknown",
        }
    }
}

impl fmt::Display for StandardId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StandardId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sasb" => Ok(StandardId::Sasb),
            "gri" => Ok(StandardId::Gri),
            "ifrs_s2" => Ok(StandardId::IfrsS2),
            "tcfd" => Ok(StandardId::Tcfd),
            "unknown" => Ok(StandardId::Unknown),
            other => Err(format!("unknown standard `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DocumentState {
    Ingesting,
    Draft,
    UnderReview,
    Certified,
}

/// Issued when a meta expert certifies a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificationRecord {
    pub document_id: DocumentId,
    pub certified_at: Timestamp,
    pub certified_by: String,
    pub triple_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: DocumentId,
    pub graph_id: GraphId,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_file: Option<String>,
    pub standard: StandardId,
    pub state: DocumentState,
    pub pages: Vec<PageText>,
    pub created_at: Timestamp,
    pub created_by: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<IngestReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certification: Option<CertificationRecord>,
}

impl DocumentRecord {
    pub fn page_text(&self, page: u32) -> Option<&str> {
        self.pages
            .iter()
            .find(|p| p.page == page)
            .map(|p| p.text.as_str())
    }
}

/// Collapses every whitespace run to a single space and trims the ends.
pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
