//! JSON-over-HTTP interface, version 1.
//!
//! | method | path                                  | body                               |
//! |--------|---------------------------------------|------------------------------------|
//! | GET    | `/v1/health`                          |                                    |
//! | POST   | `/v1/sessions`                        | `{"annotator_id": s, "seed"?: u64}` |
//! | GET    | `/v1/sessions/{id}`                   |                                    |
//! | GET    | `/v1/sessions/{id}/next`              |                                    |
//! | POST   | `/v1/sessions/{id}/ratings`           | `{"sentence_id": s, "value": int}` |
//! | GET    | `/v1/export`                          |                                    |
//! | POST   | `/v1/annotators/{id}/eligibility`     | `{"eligible": bool}`               |
//!
//! Errors are returned as `{"error": {"code": ..., "message": ...}}`.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::ServiceError;
use crate::service::{AnnotationService, NextItem, RatingAck, SessionInfo};

pub const API_VERSION: &str = "v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSession {
    pub annotator_id: String,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmitRating {
    pub sentence_id: String,
    pub value: serde_json::Number,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetEligibility {
    pub eligible: bool,
}

pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let status = match &e {
            ServiceError::UnknownSession(_) | ServiceError::UnknownItem { .. } => {
                StatusCode::NOT_FOUND
            }
            ServiceError::Duplicate(_)
            | ServiceError::NotServed(_)
            | ServiceError::SessionComplete(_) => StatusCode::CONFLICT,
            ServiceError::OutOfRange(_) | ServiceError::Config(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ServiceError::NotEligible(_) => StatusCode::FORBIDDEN,
            ServiceError::InsufficientCapacity(_) | ServiceError::InsufficientFillers => {
                StatusCode::SERVICE_UNAVAILABLE
            }
            ServiceError::CorruptLog { .. } | ServiceError::Io(_) | ServiceError::Core(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        ApiError {
            status,
            code: e.code(),
            message: e.to_string(),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "bad_request",
            message: e.body_text(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({"error": {"code": self.code, "message": self.message}})),
        )
            .into_response()
    }
}

type Shared = State<Arc<AnnotationService>>;

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "internal",
            message: e.to_string(),
        })?
        .map_err(ApiError::from)
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({"status": "ok", "version": API_VERSION}))
}

async fn create_session(
    State(service): Shared,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionInfo>), ApiError> {
    let Json(req) = body?;
    let info = blocking(move || service.create_session(&req.annotator_id, req.seed)).await?;
    Ok((StatusCode::CREATED, Json(info)))
}

async fn session(
    State(service): Shared,
    Path(id): Path<String>,
) -> Result<Json<SessionInfo>, ApiError> {
    Ok(Json(service.session(&id)?))
}

async fn next_item(
    State(service): Shared,
    Path(id): Path<String>,
) -> Result<Json<NextItem>, ApiError> {
    Ok(Json(service.next_item(&id)?))
}

async fn submit_rating(
    State(service): Shared,
    Path(id): Path<String>,
    body: Result<Json<SubmitRating>, JsonRejection>,
) -> Result<Json<RatingAck>, ApiError> {
    let Json(req) = body?;
    let value = match req.value.as_i64() {
        Some(v) => v,
        None => {
            return Err(ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                code: "out_of_range",
                message: format!("rating {} is not an integer from 0 to 99", req.value),
            })
        }
    };
    let ack = blocking(move || service.submit_rating(&id, &req.sentence_id, value)).await?;
    Ok(Json(ack))
}

async fn export(State(service): Shared) -> Result<Response, ApiError> {
    let mut body = Vec::new();
    service.export(&mut body)?;
    Ok((
        [(
            header::CONTENT_TYPE,
            "text/tab-separated-values; charset=utf-8",
        )],
        body,
    )
        .into_response())
}

async fn set_eligibility(
    State(service): Shared,
    Path(id): Path<String>,
    body: Result<Json<SetEligibility>, JsonRejection>,
) -> Result<StatusCode, ApiError> {
    let Json(req) = body?;
    blocking(move || service.set_eligible(&id, req.eligible)).await?;
    Ok(StatusCode::NO_CONTENT)
}

pub fn router(service: Arc<AnnotationService>) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", get(session))
        .route("/v1/sessions/{id}/next", get(next_item))
        .route("/v1/sessions/{id}/ratings", post(submit_rating))
        .route("/v1/export", get(export))
        .route("/v1/annotators/{id}/eligibility", post(set_eligibility))
        .with_state(service)
}

/// Serves until the listener fails or the task is dropped.
pub async fn serve(
    listener: tokio::net::TcpListener,
    service: Arc<AnnotationService>,
) -> std::io::Result<()> {
    axum::serve(listener, router(service)).await
}
