//! HTTP front end for a photocensus data directory.
//!
//! Requests carry a bearer token from a static table; the token's [`Role`]
//! gates curation, and a [`SensitivePolicy`] snaps the coordinates of
//! protected species for every role without raw access.

#![forbid(unsafe_code)]

mod auth;
mod config;
mod error;
mod policy;
mod routes;
mod store;

use std::sync::Arc;

use parking_lot::RwLock;

pub use auth::{Caller, Role, TokenTable};
pub use config::ServerConfig;
pub use error::{ApiError, ServerError};
pub use policy::{obfuscate_location, snap, LocationPolicies, SensitivePolicy};
pub use routes::{router, AnnotationView, IndividualView, ReviewCard, StatsView};
pub use store::{DecisionOutcome, Store};

/// Shared handler state. All mutations take the write lock, so they are
/// applied one at a time and readers never see a half-applied change.
#[derive(Clone)]
pub struct AppState {
    pub store: Arc<RwLock<Store>>,
    pub tokens: Arc<TokenTable>,
    pub policies: Arc<LocationPolicies>,
}

impl AppState {
    pub fn new(store: Store, tokens: TokenTable, policies: LocationPolicies) -> Self {
        AppState { store: Arc::new(RwLock::new(store)), tokens: Arc::new(tokens), policies: Arc::new(policies) }
    }

    /// Replays the data directory and loads the token and policy files.
    pub fn open(config: &ServerConfig) -> Result<AppState, ServerError> {
        let tokens = match &config.token_file {
            Some(path) => TokenTable::load(path)?,
            None => TokenTable::default(),
        };
        if tokens.is_empty() {
            tracing::warn!("no bearer tokens configured; every request will be rejected");
        }
        let policies = match &config.sensitive_policy_file {
            Some(path) => LocationPolicies::load(path)?,
            None => LocationPolicies::default(),
        };
        Ok(AppState::new(Store::open(config)?, tokens, policies))
    }
}

/// Binds `config.listen` and serves until Ctrl-C.
pub async fn serve(config: ServerConfig) -> Result<(), ServerError> {
    serve_state(AppState::open(&config)?, config.listen).await
}

/// Serves an already opened state until Ctrl-C.
pub async fn serve_state(state: AppState, listen: std::net::SocketAddr) -> Result<(), ServerError> {
    let listener = tokio::net::TcpListener::bind(listen).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
