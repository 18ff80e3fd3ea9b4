use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use photocensus::sighting::{OccasionSetting, DEFAULT_EMBEDDING_DIM};
use serde::{Deserialize, Serialize};

use crate::error::ServerError;

/// Service settings. Every field has a default, so a config file need only
/// name what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServerConfig {
    pub listen: SocketAddr,
    pub data_dir: PathBuf,
    /// JSON token table; without one every request is rejected.
    pub token_file: Option<PathBuf>,
    /// JSON array of sensitive-species policies.
    pub sensitive_policy_file: Option<PathBuf>,
    /// Used only when the data directory holds no dataset yet.
    pub embedding_dim: usize,
    pub threshold: f64,
    pub top_k: usize,
    pub occasions: OccasionSetting,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: PathBuf::from("data"),
            token_file: None,
            sensitive_policy_file: None,
            embedding_dim: DEFAULT_EMBEDDING_DIM,
            threshold: 0.8,
            top_k: 10,
            occasions: OccasionSetting::CalendarDay,
        }
    }
}

impl ServerConfig {
    pub fn load(path: &Path) -> Result<ServerConfig, ServerError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServerError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: ServerConfig =
            serde_json::from_str(&text).map_err(|e| ServerError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ServerError> {
        if !(-1.0..=1.0).contains(&self.threshold) {
            return Err(ServerError::Config("threshold must be in [-1, 1]".into()));
        }
        if self.top_k == 0 {
            return Err(ServerError::Config("top_k must be positive".into()));
        }
        if self.embedding_dim == 0 {
            return Err(ServerError::Config("embedding_dim must be positive".into()));
        }
        Ok(())
    }
}
