use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use lockdown_core::{ErrorClass, PipelineError, SeriesError};
use serde_json::json;
use thiserror::Error;

/// Request failure, rendered as `{"error": <name>, "detail": <message>}`.
#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{0}")]
    Ingest(#[from] SeriesError),
    #[error("unknown or expired session {0}")]
    UnknownSession(String),
    #[error("{1}")]
    Validation(&'static str, String),
    #[error("{0}")]
    Pipeline(#[from] PipelineError),
}

impl ApiError {
    pub fn name(&self) -> &'static str {
        match self {
            ApiError::Ingest(e) => e.name(),
            ApiError::UnknownSession(_) => "UnknownSession",
            ApiError::Validation(name, _) => name,
            ApiError::Pipeline(e) => e.name(),
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::Ingest(_) => StatusCode::BAD_REQUEST,
            ApiError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ApiError::Validation(..) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Pipeline(e) => match e.class() {
                ErrorClass::Numerical => StatusCode::INTERNAL_SERVER_ERROR,
                ErrorClass::Usage | ErrorClass::Data => StatusCode::UNPROCESSABLE_ENTITY,
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            log::error!("{}: {self}", self.name());
        }
        (status, Json(json!({ "error": self.name(), "detail": self.to_string() }))).into_response()
    }
}
