use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use mmw_core::Error;
use serde_json::json;

use crate::canonical_response;

/// An error as sent to clients: `{"error": {"code", "message"}}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { status, code: code.to_owned(), message: message.into() }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "validation_error", message)
    }

    pub fn not_found(kind: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("unknown {kind} `{id}`"))
    }
}

/// Status for a core error code.
pub fn status_for(err: &Error) -> StatusCode {
    match err {
        Error::Validation(_) | Error::Format(_) | Error::Version { .. } | Error::Encoding { .. } | Error::Parse { .. } => {
            StatusCode::BAD_REQUEST
        }
        Error::Reference { .. } => StatusCode::NOT_FOUND,
        Error::Conflict(_) => StatusCode::CONFLICT,
        Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        Self { status: status_for(&err), code: err.code().to_owned(), message: err.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.code, "message": self.message}});
        canonical_response(self.status, &body)
    }
}
