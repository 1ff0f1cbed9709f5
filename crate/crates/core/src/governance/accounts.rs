//! Accounts, sessions and password-reset tokens.
//!
//! Accounts persist to their own JSON file, apart from the graph log.
//! Lifecycle changes are still written to the audit log. Sessions live in
//! memory only.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::Duration;
use pbkdf2::password_hash::{PasswordHash, PasswordHasher, PasswordVerifier, SaltString};
use pbkdf2::{Params, Pbkdf2};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::clock::{Clock, Timestamp};
use crate::error::{Error, Result};
use crate::ids::AccountId;
use crate::store::log::sha256_hex;
use crate::store::{Event, GraphStore};

use super::rbac::{ActionKind, Principal, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AccountsConfig {
    pub session_ttl_secs: i64,
    pub reset_token_ttl_secs: i64,
    pub pbkdf2_rounds: u32,
}

impl Default for AccountsConfig {
    fn default() -> Self {
        Self {
            session_ttl_secs: 24 * 3600,
            reset_token_ttl_secs: 3600,
            pbkdf2_rounds: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub id: AccountId,
    pub username: String,
    pub password_hash: String,
    pub role: Role,
    pub active: bool,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub token: String,
    /// None for guest sessions.
    pub account_id: Option<AccountId>,
    pub username: String,
    pub role: Role,
    pub expires_at: Timestamp,
}

impl Session {
    pub fn principal(&self) -> Principal {
        Principal {
            account_id: self.account_id,
            username: self.username.clone(),
            role: self.role,
        }
    }
}

/// A freshly issued reset token. The plain token is only ever returned here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssuedResetToken {
    pub token: String,
    pub account_id: AccountId,
    pub expires_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct ResetTokenRecord {
    digest: String,
    account_id: AccountId,
    expires_at: Timestamp,
    used: bool,
    revoked: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct AccountsFile {
    next_id: u64,
    accounts: Vec<Account>,
    reset_tokens: Vec<ResetTokenRecord>,
}

/// 256 random bits, hex encoded.
fn random_token() -> String {
    let mut bytes = [0u8; 32];
    rand::thread_rng().fill_bytes(&mut bytes);
    hex::encode(bytes)
}

pub struct AccountStore {
    config: AccountsConfig,
    data: AccountsFile,
    sessions: HashMap<String, Session>,
    path: Option<PathBuf>,
    clock: Arc<dyn Clock>,
}

impl std::fmt::Debug for AccountStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AccountStore")
            .field("accounts", &self.data.accounts.len())
            .field("sessions", &self.sessions.len())
            .field("path", &self.path)
            .finish()
    }
}

impl AccountStore {
    pub fn in_memory(config: AccountsConfig, clock: Arc<dyn Clock>) -> Self {
        Self {
            config,
            data: AccountsFile {
                next_id: 1,
                ..Default::default()
            },
            sessions: HashMap::new(),
            path: None,
            clock,
        }
    }

    /// Loads the accounts file, starting empty when it does not exist yet.
    pub fn open(path: impl AsRef<Path>, config: AccountsConfig, clock: Arc<dyn Clock>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut store = Self::in_memory(config, clock);
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            store.data = serde_json::from_str(&text)
                .map_err(|e| Error::Storage(format!("{}: {e}", path.display())))?;
        }
        store.path = Some(path);
        Ok(store)
    }

    fn save(&self) -> Result<()> {
        let Some(path) = &self.path else { return Ok(()) };
        let tmp = path.with_extension("tmp");
        let body = serde_json::to_vec_pretty(&self.data).map_err(|e| Error::Storage(e.to_string()))?;
        std::fs::write(&tmp, body)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn accounts(&self) -> &[Account] {
        &self.data.accounts
    }

    pub fn account(&self, id: AccountId) -> Result<&Account> {
        self.data
            .accounts
            .iter()
            .find(|a| a.id == id)
            .ok_or_else(|| Error::UnknownAccount(id.to_string()))
    }

    pub fn find_by_username(&self, username: &str) -> Option<&Account> {
        self.data.accounts.iter().find(|a| a.username == username)
    }

    fn hash_password(&self, password: &str) -> Result<String> {
        if password.is_empty() {
            return Err(Error::InvalidArgument("password is empty".into()));
        }
        let mut salt = [0u8; 16];
        rand::thread_rng().fill_bytes(&mut salt);
        let salt = SaltString::encode_b64(&salt).map_err(|e| Error::Storage(e.to_string()))?;
        let params = Params {
            rounds: self.config.pbkdf2_rounds.max(1),
            output_length: 32,
        };
        Pbkdf2
            .hash_password_customized(password.as_bytes(), None, None, params, &salt)
            .map(|h| h.to_string())
            .map_err(|e| Error::Storage(e.to_string()))
    }

    fn password_matches(hash: &str, password: &str) -> bool {
        PasswordHash::new(hash)
            .map(|h| Pbkdf2.verify_password(password.as_bytes(), &h).is_ok())
            .unwrap_or(false)
    }

    pub fn create_account(
        &mut self,
        audit: &mut GraphStore,
        by: &Principal,
        username: &str,
        password: &str,
        role: Role,
    ) -> Result<Account> {
        by.authorize(ActionKind::ManageAccounts)?;
        self.create_unchecked(audit, &by.actor(), username, password, role)
    }

    /// Creates an account without a permission check. Used to bootstrap the
    /// first admin from the command line.
    pub fn create_unchecked(
        &mut self,
        audit: &mut GraphStore,
        actor: &str,
        username: &str,
        password: &str,
        role: Role,
    ) -> Result<Account> {
        let username = username.trim();
        if username.is_empty() {
            return Err(Error::EmptyField("username"));
        }
        if self.find_by_username(username).is_some() {
            return Err(Error::DuplicateUsername(username.to_string()));
        }
        let password_hash = self.hash_password(password)?;
        let id = AccountId(self.data.next_id.max(1));
        audit.commit(
            actor,
            Event::AccountCreated {
                account_id: id,
                username: username.to_string(),
                role,
            },
        )?;
        let account = Account {
            id,
            username: username.to_string(),
            password_hash,
            role,
            active: true,
            created_at: self.clock.now(),
        };
        self.data.next_id = id.0 + 1;
        self.data.accounts.push(account.clone());
        self.save()?;
        Ok(account)
    }

    pub fn deactivate(&mut self, audit: &mut GraphStore, by: &Principal, id: AccountId) -> Result<Account> {
        by.authorize(ActionKind::ManageAccounts)?;
        self.account(id)?;
        audit.commit(&by.actor(), Event::AccountDeactivated { account_id: id })?;
        let account = self
            .data
            .accounts
            .iter_mut()
            .find(|a| a.id == id)
            .expect("checked above");
        account.active = false;
        let account = account.clone();
        self.sessions.retain(|_, s| s.account_id != Some(id));
        self.save()?;
        Ok(account)
    }

    /// One error for every failure cause, so callers cannot probe usernames.
    pub fn authenticate(&mut self, username: &str, password: &str) -> Result<Session> {
        let account = self
            .find_by_username(username.trim())
            .filter(|a| a.active && Self::password_matches(&a.password_hash, password))
            .ok_or(Error::InvalidCredentials)?;
        let session = Session {
            token: random_token(),
            account_id: Some(account.id),
            username: account.username.clone(),
            role: account.role,
            expires_at: self.clock.now() + Duration::seconds(self.config.session_ttl_secs),
        };
        self.sessions.insert(session.token.clone(), session.clone());
        Ok(session)
    }

    /// Opens an anonymous read-only session.
    pub fn guest_session(&mut self) -> Session {
        let guest = Principal::guest();
        let session = Session {
            token: random_token(),
            account_id: None,
            username: guest.username,
            role: guest.role,
            expires_at: self.clock.now() + Duration::seconds(self.config.session_ttl_secs),
        };
        self.sessions.insert(session.token.clone(), session.clone());
        session
    }

    /// Resolves a bearer token to its principal.
    pub fn session(&self, token: &str) -> Result<Principal> {
        let s = self.sessions.get(token).ok_or(Error::InvalidToken)?;
        if self.clock.now() >= s.expires_at {
            return Err(Error::SessionExpired);
        }
        Ok(s.principal())
    }

    pub fn logout(&mut self, token: &str) -> bool {
        self.sessions.remove(token).is_some()
    }

    pub fn purge_expired(&mut self) {
        let now = self.clock.now();
        self.sessions.retain(|_, s| s.expires_at > now);
    }

    pub fn issue_reset_token(
        &mut self,
        audit: &mut GraphStore,
        by: &Principal,
        id: AccountId,
    ) -> Result<IssuedResetToken> {
        by.authorize(ActionKind::ManageAccounts)?;
        self.account(id)?;
        let token = random_token();
        let digest = sha256_hex(token.as_bytes());
        audit.commit(
            &by.actor(),
            Event::ResetTokenIssued {
                account_id: id,
                token_digest: digest.clone(),
            },
        )?;
        let expires_at = self.clock.now() + Duration::seconds(self.config.reset_token_ttl_secs);
        self.data.reset_tokens.push(ResetTokenRecord {
            digest,
            account_id: id,
            expires_at,
            used: false,
            revoked: false,
        });
        self.save()?;
        Ok(IssuedResetToken {
            token,
            account_id: id,
            expires_at,
        })
    }

    fn live_token(&mut self, token: &str) -> Result<&mut ResetTokenRecord> {
        let digest = sha256_hex(token.as_bytes());
        let now = self.clock.now();
        self.data
            .reset_tokens
            .iter_mut()
            .find(|r| r.digest == digest && !r.used && !r.revoked && now < r.expires_at)
            .ok_or(Error::InvalidToken)
    }

    pub fn revoke_reset_token(&mut self, audit: &mut GraphStore, by: &Principal, token: &str) -> Result<()> {
        by.authorize(ActionKind::ManageAccounts)?;
        let digest = self.live_token(token)?.digest.clone();
        audit.commit(
            &by.actor(),
            Event::ResetTokenRevoked {
                token_digest: digest,
            },
        )?;
        self.live_token(token)?.revoked = true;
        self.save()
    }

    /// Spends a reset token. Tokens are single-use and expire.
    pub fn reset_password(&mut self, audit: &mut GraphStore, token: &str, new_password: &str) -> Result<()> {
        let account_id = self.live_token(token)?.account_id;
        let hash = self.hash_password(new_password)?;
        let username = self.account(account_id)?.username.clone();
        audit.commit(&username, Event::PasswordReset { account_id })?;
        self.live_token(token)?.used = true;
        if let Some(a) = self.data.accounts.iter_mut().find(|a| a.id == account_id) {
            a.password_hash = hash;
        }
        self.sessions.retain(|_, s| s.account_id != Some(account_id));
        self.save()
    }
}
