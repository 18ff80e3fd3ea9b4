use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use axum::extract::FromRequestParts;
use axum::http::header::AUTHORIZATION;
use axum::http::request::Parts;
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ServerError};
use crate::AppState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Admin,
    Researcher,
    Public,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Admin => "admin",
            Role::Researcher => "researcher",
            Role::Public => "public",
        }
    }

    /// Ingest, review and export.
    pub fn can_curate(self) -> bool {
        matches!(self, Role::Admin | Role::Researcher)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "admin" => Ok(Role::Admin),
            "researcher" => Ok(Role::Researcher),
            "public" => Ok(Role::Public),
            other => Err(format!("unknown role {other:?}")),
        }
    }
}

/// The authenticated principal of a request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caller {
    pub name: String,
    pub role: Role,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TokenEntry {
    Role(Role),
    Named { role: Role, name: String },
}

/// Static bearer-token table. The file is a JSON object mapping each token
/// either to a role or to `{"role": ..., "name": ...}`; the name is what
/// the decision log records as the reviewer.
#[derive(Debug, Clone, Default)]
pub struct TokenTable {
    tokens: HashMap<String, Caller>,
}

impl TokenTable {
    pub fn from_json(text: &str) -> Result<TokenTable, ServerError> {
        let raw: HashMap<String, TokenEntry> =
            serde_json::from_str(text).map_err(|e| ServerError::Config(format!("token table: {e}")))?;
        let tokens = raw
            .into_iter()
            .map(|(token, entry)| {
                let caller = match entry {
                    TokenEntry::Role(role) => Caller { name: role.as_str().to_owned(), role },
                    TokenEntry::Named { role, name } => Caller { name, role },
                };
                (token, caller)
            })
            .collect();
        Ok(TokenTable { tokens })
    }

    pub fn load(path: &Path) -> Result<TokenTable, ServerError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServerError::Config(format!("cannot read {}: {e}", path.display())))?;
        TokenTable::from_json(&text)
    }

    pub fn insert(&mut self, token: impl Into<String>, caller: Caller) {
        self.tokens.insert(token.into(), caller);
    }

    pub fn lookup(&self, token: &str) -> Option<&Caller> {
        self.tokens.get(token)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl FromRequestParts<AppState> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or(ApiError::Unauthorized)?;
        state.tokens.lookup(token).cloned().ok_or(ApiError::Unauthorized)
    }
}
