use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use photocensus::census::Estimator;
use photocensus::sighting::{OccasionSetting, DEFAULT_EMBEDDING_DIM};
use photocensus_server::ServerConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Settings shared by every subcommand, read from `--config` and then
/// overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CliConfig {
    pub data_dir: PathBuf,
    pub threshold: f64,
    pub top_k: usize,
    pub estimator: Estimator,
    pub seed: u64,
    /// Used when a new dataset is created from headerless input.
    pub embedding_dim: usize,
    pub occasions: OccasionSetting,
    pub listen: SocketAddr,
    pub token_file: Option<PathBuf>,
    pub sensitive_policy_file: Option<PathBuf>,
}

impl Default for CliConfig {
    fn default() -> Self {
        let server = ServerConfig::default();
        CliConfig {
            data_dir: server.data_dir,
            threshold: server.threshold,
            top_k: server.top_k,
            estimator: Estimator::Chapman,
            seed: 0,
            embedding_dim: DEFAULT_EMBEDDING_DIM,
            occasions: OccasionSetting::CalendarDay,
            listen: server.listen,
            token_file: None,
            sensitive_policy_file: None,
        }
    }
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<CliConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::User(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::User(format!("config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(-1.0..=1.0).contains(&self.threshold) {
            return Err(CliError::User(format!("threshold must be in [-1, 1], got {}", self.threshold)));
        }
        if self.top_k == 0 {
            return Err(CliError::User("top_k must be positive".into()));
        }
        Ok(())
    }

    pub fn server(&self) -> ServerConfig {
        ServerConfig {
            listen: self.listen,
            data_dir: self.data_dir.clone(),
            token_file: self.token_file.clone(),
            sensitive_policy_file: self.sensitive_policy_file.clone(),
            embedding_dim: self.embedding_dim,
            threshold: self.threshold,
            top_k: self.top_k,
            occasions: self.occasions,
        }
    }
}
