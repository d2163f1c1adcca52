//! HTTP routes over [`Service`]. Bodies are parsed here rather than by the
//! `Json` extractor so every error comes back as JSON.

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use taskalloc::workflow::ScheduleEntry;

use crate::service::{Service, ServiceError};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let message = self.to_string();
        let (status, body) = match self {
            ServiceError::NotFound(_) => (StatusCode::NOT_FOUND, json!({ "error": message })),
            ServiceError::InvalidScenario(findings) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({ "error": message, "findings": findings }),
            ),
            ServiceError::Rejected(rejections) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({ "error": message, "rejections": rejections }),
            ),
            ServiceError::NotReady { status, .. } => {
                (StatusCode::CONFLICT, json!({ "error": message, "status": status }))
            }
            ServiceError::BadRequest(_) => (StatusCode::BAD_REQUEST, json!({ "error": message })),
            ServiceError::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": message })),
        };
        (status, Json(body)).into_response()
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::BadRequest(format!("malformed request body: {e}")))
}

#[derive(Serialize)]
struct AnalystLane {
    analyst_id: u64,
    availability: u64,
}

#[derive(Serialize)]
struct ScheduleView {
    run_id: String,
    analysts: Vec<AnalystLane>,
    entries: Vec<ScheduleEntry>,
}

pub fn router(service: Service) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/runs", post(create_run).get(list_runs))
        .route("/runs/{id}", get(get_run))
        .route("/runs/{id}/schedule", get(get_schedule))
        .route("/runs/{id}/stats", get(get_stats))
        .route("/runs/{id}/amendments", post(amend_run))
        .route("/runs/{id}/evaluate", post(evaluate))
        .with_state(service)
}

async fn healthz(State(service): State<Service>) -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "runs": service.store().len() }))
}

async fn create_run(State(service): State<Service>, body: Bytes) -> Result<Response, ServiceError> {
    let created = service.create_run(parse(&body)?)?;
    Ok((StatusCode::ACCEPTED, Json(created)).into_response())
}

async fn list_runs(State(service): State<Service>) -> Response {
    Json(service.store().list()).into_response()
}

async fn get_run(State(service): State<Service>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(service.get(&id)?).into_response())
}

async fn get_schedule(State(service): State<Service>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let run = service.get(&id)?;
    let Some(entries) = run.schedule else {
        return Err(ServiceError::NotReady {
            run_id: run.run_id,
            status: run.status,
        });
    };
    let analysts = run
        .scenario
        .analysts
        .iter()
        .map(|a| AnalystLane {
            analyst_id: a.analyst_id,
            availability: a.availability,
        })
        .collect();
    Ok(Json(ScheduleView {
        run_id: run.run_id,
        analysts,
        entries,
    })
    .into_response())
}

async fn get_stats(State(service): State<Service>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let run = service.get(&id)?;
    Ok(Json(json!({
        "run_id": run.run_id,
        "status": run.status,
        "generations": run.config.generations,
        "stats": run.stats,
    }))
    .into_response())
}

async fn amend_run(
    State(service): State<Service>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ServiceError> {
    let created = service.amend(&id, parse(&body)?)?;
    Ok((StatusCode::ACCEPTED, Json(created)).into_response())
}

async fn evaluate(
    State(service): State<Service>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ServiceError> {
    Ok(Json(service.evaluate(&id, parse(&body)?)?).into_response())
}
