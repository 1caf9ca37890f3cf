use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use mobeq_core::city_data::LoadError;
use mobeq_core::Error;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiErrorBody {
    /// Stable machine-readable code, e.g. `invalid_city`.
    pub code: String,
    pub message: String,
    /// Code-specific payload: violation lists, field paths, witnesses.
    pub details: Value,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ApiErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>, details: Value) -> Self {
        ApiError {
            status,
            body: ApiErrorBody {
                code: code.into(),
                message: message.into(),
                details,
            },
        }
    }

    pub fn not_found(what: &str, id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "not_found",
            format!("{what} `{id}` does not exist"),
            json!({ "id": id }),
        )
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message, Value::Null)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message, Value::Null)
    }

    /// Maps a file-format failure. `code` names the document kind.
    pub fn from_load(code: &str, e: LoadError) -> Self {
        let unprocessable = StatusCode::UNPROCESSABLE_ENTITY;
        match e {
            LoadError::Syntax { line, column, .. } => Self::new(
                StatusCode::BAD_REQUEST,
                "malformed_json",
                e.to_string(),
                json!({ "line": line, "column": column }),
            ),
            LoadError::Schema { ref path, .. } => {
                let path = path.clone();
                Self::new(unprocessable, code, e.to_string(), json!({ "path": path }))
            }
            LoadError::Semantic(ref report) => {
                let details = json!({ "violations": report.violations });
                Self::new(unprocessable, code, e.to_string(), details)
            }
            LoadError::UnsupportedVersion(ref v) => {
                let details = json!({ "path": "schema_version", "found": v });
                Self::new(unprocessable, "unsupported_version", e.to_string(), details)
            }
            LoadError::Corrupted(_) => Self::new(unprocessable, code, e.to_string(), Value::Null),
            LoadError::Io(_) => Self::internal(e.to_string()),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::InvalidCity(report) => Self::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_city",
                message,
                json!({ "violations": report.violations }),
            ),
            Error::InvalidControls(report) => Self::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_controls",
                message,
                json!({ "violations": report.violations }),
            ),
            Error::MissingIteration(n) => Self::new(
                StatusCode::NOT_FOUND,
                "not_found",
                message,
                json!({ "iteration": n }),
            ),
            Error::NashViolation(cert) => Self::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "verification_failed",
                message,
                json!({ "witnesses": cert.witnesses }),
            ),
            Error::Precondition(_) | Error::Infeasible(_) => Self::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "unsolvable",
                message,
                Value::Null,
            ),
            _ => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "solver_error", message, Value::Null),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            log::error!("{}: {}", self.body.code, self.body.message);
        }
        (self.status, Json(self.body)).into_response()
    }
}
