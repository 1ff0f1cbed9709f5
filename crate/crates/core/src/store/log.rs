//! Append-only, hash-chained event log.
//!
//! Every line of the log is one envelope:
//!
//! ```text
//! {"v":1,"alg":"sha256","entry":{..audit entry..},"digest":"<hex>"}
//! ```
//!
//! `digest` is SHA-256 over the exact bytes of `entry` as written. Each entry
//! carries the digest of its predecessor in `prev_digest`; entry 0 chains from
//! [`GENESIS_DIGEST`]. Line `n` of the file holds entry `seq = n`.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::clock::Timestamp;
use crate::error::{Error, Result};
use crate::store::event::Event;

pub const LOG_VERSION: u32 = 1;
pub const DIGEST_ALG: &str = "sha256";
pub const GENESIS_DIGEST: &str = "0000000000000000000000000000000000000000000000000000000000000000";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditEntry {
    pub seq: u64,
    pub ts: Timestamp,
    pub actor: String,
    pub action: String,
    pub subject_ref: String,
    pub payload: Event,
    pub payload_digest: String,
    pub prev_digest: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope<'a> {
    v: u32,
    alg: &'a str,
    #[serde(borrow)]
    entry: &'a RawValue,
    digest: &'a str,
}

/// Outcome of a chain check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub entries: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_bad_seq: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl VerifyReport {
    pub fn into_result(self) -> Result<u64> {
        match self.first_bad_seq {
            None => Ok(self.entries),
            Some(seq) => Err(Error::ChainBroken {
                first_bad_seq: seq,
                reason: self.reason.unwrap_or_default(),
            }),
        }
    }
}

fn check_line(line: &str, seq: u64, prev: &str) -> std::result::Result<String, String> {
    let env: Envelope<'_> = serde_json::from_str(line).map_err(|e| format!("unparseable envelope: {e}"))?;
    if env.v != LOG_VERSION {
        return Err(format!("unsupported version {}", env.v));
    }
    if env.alg != DIGEST_ALG {
        return Err(format!("unsupported digest algorithm `{}`", env.alg));
    }
    let digest = sha256_hex(env.entry.get().as_bytes());
    if digest != env.digest {
        return Err("digest mismatch".into());
    }
    let entry: AuditEntry =
        serde_json::from_str(env.entry.get()).map_err(|e| format!("unparseable entry: {e}"))?;
    if entry.seq != seq {
        return Err(format!("sequence {} found at position {seq}", entry.seq));
    }
    if entry.prev_digest != prev {
        return Err("chain link mismatch".into());
    }
    let payload = serde_json::to_vec(&entry.payload).map_err(|e| e.to_string())?;
    if sha256_hex(&payload) != entry.payload_digest {
        return Err("payload digest mismatch".into());
    }
    Ok(digest)
}

/// Verifies raw log lines, reporting the first line that fails.
pub fn verify_lines<'a>(lines: impl IntoIterator<Item = &'a str>) -> VerifyReport {
    let mut prev = GENESIS_DIGEST.to_string();
    let mut count = 0u64;
    for (seq, line) in lines.into_iter().enumerate() {
        let seq = seq as u64;
        match check_line(line, seq, &prev) {
            Ok(d) => prev = d,
            Err(reason) => {
                return VerifyReport {
                    ok: false,
                    entries: seq,
                    first_bad_seq: Some(seq),
                    reason: Some(reason),
                }
            }
        }
        count += 1;
    }
    VerifyReport {
        ok: true,
        entries: count,
        first_bad_seq: None,
        reason: None,
    }
}

/// Splits a log file's bytes into lines. Invalid UTF-8 is replaced so the
/// affected line fails verification instead of aborting the read.
pub fn split_log_bytes(bytes: &[u8]) -> Vec<String> {
    let text = String::from_utf8_lossy(bytes);
    let mut lines: Vec<String> = text.split('\n').map(str::to_owned).collect();
    if lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines
}

pub fn verify_file(path: &Path) -> Result<VerifyReport> {
    let bytes = std::fs::read(path)?;
    let lines = split_log_bytes(&bytes);
    Ok(verify_lines(lines.iter().map(String::as_str)))
}

pub struct EventLog {
    lines: Vec<String>,
    entries: Vec<AuditEntry>,
    last_digest: String,
    sink: Option<(PathBuf, File)>,
}

impl std::fmt::Debug for EventLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EventLog")
            .field("entries", &self.entries.len())
            .field("path", &self.sink.as_ref().map(|(p, _)| p))
            .finish()
    }
}

impl Default for EventLog {
    fn default() -> Self {
        Self::in_memory()
    }
}

impl EventLog {
    pub fn in_memory() -> Self {
        Self {
            lines: Vec::new(),
            entries: Vec::new(),
            last_digest: GENESIS_DIGEST.to_string(),
            sink: None,
        }
    }

    /// Opens (or creates) a log file, verifying the existing chain.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut log = Self::in_memory();
        if path.exists() {
            let file = File::open(&path)?;
            let mut raw = Vec::new();
            for line in BufReader::new(file).split(b'\n') {
                raw.push(String::from_utf8_lossy(&line?).into_owned());
            }
            verify_lines(raw.iter().map(String::as_str)).into_result()?;
            for line in raw {
                let env: Envelope<'_> = serde_json::from_str(&line)
                    .map_err(|e| Error::Storage(format!("log envelope: {e}")))?;
                let entry: AuditEntry = serde_json::from_str(env.entry.get())
                    .map_err(|e| Error::Storage(format!("log entry: {e}")))?;
                log.last_digest = env.digest.to_string();
                log.entries.push(entry);
                log.lines.push(line);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        log.sink = Some((path, file));
        Ok(log)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[AuditEntry] {
        &self.entries
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn last_digest(&self) -> &str {
        &self.last_digest
    }

    pub fn path(&self) -> Option<&Path> {
        self.sink.as_ref().map(|(p, _)| p.as_path())
    }

    pub fn append(&mut self, actor: &str, ts: Timestamp, event: Event, fsync: bool) -> Result<AuditEntry> {
        let payload = serde_json::to_vec(&event).map_err(|e| Error::Storage(e.to_string()))?;
        let entry = AuditEntry {
            seq: self.entries.len() as u64,
            ts,
            actor: actor.to_string(),
            action: event.kind().to_string(),
            subject_ref: event.subject_ref(),
            payload_digest: sha256_hex(&payload),
            payload: event,
            prev_digest: self.last_digest.clone(),
        };
        let body = serde_json::to_string(&entry).map_err(|e| Error::Storage(e.to_string()))?;
        let digest = sha256_hex(body.as_bytes());
        let line = format!(
            r#"{{"v":{LOG_VERSION},"alg":"{DIGEST_ALG}","entry":{body},"digest":"{digest}"}}"#
        );
        if let Some((_, file)) = self.sink.as_mut() {
            file.write_all(line.as_bytes())?;
            file.write_all(b"\n")?;
            file.flush()?;
            if fsync {
                file.sync_all()?;
            }
        }
        self.last_digest = digest;
        self.lines.push(line);
        self.entries.push(entry.clone());
        Ok(entry)
    }

    pub fn verify(&self) -> VerifyReport {
        verify_lines(self.lines.iter().map(String::as_str))
    }
}
