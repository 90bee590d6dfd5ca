use axum::extract::rejection::JsonRejection;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;

use ssoa_core::api::ErrorDocument;
use ssoa_core::exact::SolveError;
use ssoa_core::heuristics::HeuristicError;
use ssoa_core::instance::{InstanceError, Violation};
use ssoa_core::milp::ModelError;
use ssoa_core::session::SessionError;
use ssoa_core::solver::SolverError;

/// Error response: a status code plus an [`ErrorDocument`] body.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub doc: ErrorDocument,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            doc: ErrorDocument::new(code, message),
        }
    }

    pub fn invalid_instance(violations: Vec<Violation>) -> Self {
        let message = violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
        let mut e = ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_instance", message);
        e.doc.violations = violations;
        e
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", what)
    }

    pub fn conflict(code: &str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::CONFLICT, code, message)
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn unprocessable(code: &str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.doc)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(e.status(), "malformed_request", e.body_text())
    }
}

impl From<InstanceError> for ApiError {
    fn from(e: InstanceError) -> Self {
        ApiError::unprocessable("instance_error", e.to_string())
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let msg = e.to_string();
        match e {
            SessionError::Invalid(v) => ApiError::invalid_instance(v),
            SessionError::Instance(_) => ApiError::unprocessable("instance_error", msg),
            SessionError::UnknownRound(_) => ApiError::not_found(msg),
            SessionError::OutOfOrder { .. } => ApiError::conflict("out_of_order", msg),
            SessionError::Closed(_) => ApiError::conflict("round_closed", msg),
            SessionError::NotSolved(_) => ApiError::conflict("round_not_solved", msg),
            SessionError::SessionClosed => ApiError::conflict("session_closed", msg),
            SessionError::Scenario(_) => ApiError::unprocessable("invalid_scenario", msg),
            SessionError::Ledger(_) => ApiError::internal(msg),
        }
    }
}

impl From<SolverError> for ApiError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Exact(e) => e.into(),
            SolverError::Heuristic(e) => e.into(),
            SolverError::Request(m) => ApiError::unprocessable("bad_solve_request", m),
        }
    }
}

impl From<SolveError> for ApiError {
    fn from(e: SolveError) -> Self {
        ApiError::unprocessable("solver_error", e.to_string())
    }
}

impl From<HeuristicError> for ApiError {
    fn from(e: HeuristicError) -> Self {
        ApiError::unprocessable("heuristic_error", e.to_string())
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        ApiError::unprocessable("model_error", e.to_string())
    }
}

pub type ApiResult<T> = Result<Json<T>, ApiError>;

/// Unwraps a JSON body, turning parse failures into error documents.
pub fn body<T>(b: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    Ok(b?.0)
}
