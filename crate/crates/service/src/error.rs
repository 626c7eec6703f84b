use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use wf_core::model::DefinitionError;
use wf_core::EngineError;

use crate::store::StoreError;

/// Error body of every failed request: `{"code": ..., "message": ..., "details"?: ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl ApiError {
    pub fn new(status: u16, code: &str, message: impl Into<String>) -> ApiError {
        ApiError { status, code: code.to_owned(), message: message.into(), details: None }
    }

    pub fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(400, "BadRequest", message)
    }

    pub fn unknown_definition(name: &str) -> ApiError {
        ApiError::new(404, "UnknownDefinition", format!("no definition `{name}`"))
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", self.status, self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

/// HTTP status for each engine error.
pub fn status_of(e: &EngineError) -> u16 {
    match e {
        EngineError::IllegalTransition { .. }
        | EngineError::IllegalProducerState { .. }
        | EngineError::FeedbackTargetInactive { .. }
        | EngineError::DuplicateInstanceId(_) => 409,
        EngineError::UnknownInstance(_) | EngineError::UnknownActivity(_) | EngineError::UnknownEdge { .. } => 404,
        EngineError::InvalidDefinition(_)
        | EngineError::FormatMismatch { .. }
        | EngineError::MissingField { .. }
        | EngineError::ConditionTypeMismatch { .. } => 422,
        EngineError::UndecodablePacket(_) | EngineError::Inconsistent(_) => 500,
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> ApiError {
        let details = match &e {
            EngineError::InvalidDefinition(report) => serde_json::to_value(report).ok(),
            _ => None,
        };
        ApiError { status: status_of(&e), code: e.code().to_owned(), message: e.to_string(), details }
    }
}

impl From<DefinitionError> for ApiError {
    fn from(e: DefinitionError) -> ApiError {
        let (code, line, column) = match &e {
            DefinitionError::Syntax { line, column, .. } => ("SyntaxError", line, column),
            DefinitionError::UnknownKey { line, column, .. } => ("UnknownKey", line, column),
        };
        let details = serde_json::json!({ "line": line, "column": column });
        ApiError { details: Some(details), ..ApiError::new(400, code, e.to_string()) }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> ApiError {
        let code = match e {
            StoreError::CorruptLog { .. } => "CorruptLog",
            _ => "StorageFailure",
        };
        ApiError::new(500, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}
