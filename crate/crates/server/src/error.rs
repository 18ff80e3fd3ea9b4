use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use photocensus::journal::JournalError;
use serde_json::json;
use thiserror::Error;

/// Startup and configuration failures.
#[derive(Debug, Error)]
pub enum ServerError {
    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Journal(#[from] JournalError),

    #[error(transparent)]
    Match(#[from] photocensus::matching::MatchError),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Request failures, rendered as `{"error": "..."}` with the matching status.
#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),

    #[error("missing or unknown bearer token")]
    Unauthorized,

    #[error("role {0} may not {1}")]
    Forbidden(crate::Role, &'static str),

    #[error("{0}")]
    NotFound(String),

    #[error("{0}")]
    Conflict(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Unauthorized => StatusCode::UNAUTHORIZED,
            ApiError::Forbidden(..) => StatusCode::FORBIDDEN,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl From<JournalError> for ApiError {
    fn from(e: JournalError) -> Self {
        tracing::error!("journal write failed: {e}");
        ApiError::Internal(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(json!({ "error": self.to_string() }))).into_response()
    }
}
