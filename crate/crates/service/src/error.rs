use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use fibnim_core::solver::{SolveError, BUDGET_ENV};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::session::Session;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("invalid position: {0}")]
    InvalidPosition(String),
    #[error("illegal move: {message}")]
    IllegalMove { message: String, detail: Value },
    #[error("no such session")]
    NotFound,
    #[error("hints are disabled for this session")]
    HintsDisabled,
    #[error("the game is over")]
    GameOver,
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Error body: a stable `code`, a human-readable `message` and free-form
/// `detail`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub detail: Value,
}

impl ServiceError {
    /// Rejected move, echoing the constraints the move broke.
    pub fn illegal_move(message: String, session: &Session, pile_index: usize) -> Self {
        ServiceError::IllegalMove {
            message,
            detail: json!({
                "pile_index": pile_index,
                "pile_size": session.piles.get(pile_index),
                "bound": session.bound,
                "max_take": session.max_take(pile_index),
                "piles": session.piles,
            }),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::InvalidPosition(_) => "invalid_position",
            ServiceError::IllegalMove { .. } => "illegal_move",
            ServiceError::NotFound => "not_found",
            ServiceError::HintsDisabled => "hints_disabled",
            ServiceError::GameOver => "game_over",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::Solve(SolveError::BudgetExceeded { .. }) => "budget_exceeded",
            ServiceError::Solve(_) => "solver_error",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::InvalidPosition(_) | ServiceError::IllegalMove { .. } | ServiceError::BadRequest(_) => {
                StatusCode::BAD_REQUEST
            }
            ServiceError::NotFound => StatusCode::NOT_FOUND,
            ServiceError::HintsDisabled => StatusCode::FORBIDDEN,
            ServiceError::GameOver => StatusCode::CONFLICT,
            ServiceError::Solve(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn body(&self) -> ErrorBody {
        let detail = match self {
            ServiceError::IllegalMove { detail, .. } => detail.clone(),
            ServiceError::Solve(SolveError::BudgetExceeded { budget }) => json!({
                "budget": budget,
                "hint": format!("raise {BUDGET_ENV} or play a smaller position"),
            }),
            _ => Value::Null,
        };
        ErrorBody {
            code: self.code().into(),
            message: self.to_string(),
            detail,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.status(), Json(self.body())).into_response()
    }
}
