//! HTTP API over the mobeq engine, versioned under `/api/v1`.
//!
//! | Method | Path | |
//! |---|---|---|
//! | GET | `/api/v1/health` | liveness |
//! | GET | `/api/v1/cities` | bundled and uploaded cities |
//! | POST | `/api/v1/cities` | upload a city document |
//! | GET | `/api/v1/cities/{id}` | full city document |
//! | POST | `/api/v1/sessions` | `{"city_id": ..}` opens a session |
//! | GET | `/api/v1/sessions/{id}` | session and its history |
//! | DELETE | `/api/v1/sessions/{id}` | discard a session |
//! | POST | `/api/v1/sessions/{id}/iterations` | solve a set of controls |
//! | GET | `/api/v1/sessions/{id}/iterations/{n}` | one stored report |
//! | POST | `/api/v1/sessions/{id}/reset` | clear the history |
//! | GET | `/api/v1/sessions/{id}/diff?a=&b=` | KPI delta `b - a` |
//!
//! Reports omit the full configuration unless `?include=configuration` is
//! given. Errors are JSON [`ApiErrorBody`] values.

mod error;
mod state;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mobeq_core::city_data::{parse_city, parse_controls};
use mobeq_core::session::{evaluate, EquilibriumReport};
use mobeq_core::Session;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

pub use error::{ApiError, ApiErrorBody};
pub use state::{AppState, CitySummary, ServerConfig, DEFAULT_SOLVE_TIMEOUT};

use state::SessionEntry;

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<T, ApiError>;

/// Builds the router. The static directory, if configured, answers every
/// path outside the API.
pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/cities", get(list_cities).post(upload_city))
        .route("/cities/{id}", get(get_city))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/iterations", post(run_iteration))
        .route("/sessions/{id}/iterations/{n}", get(get_iteration))
        .route("/sessions/{id}/reset", post(reset_session))
        .route("/sessions/{id}/diff", get(diff))
        .fallback(api_not_found);
    let static_dir = state.config.static_dir.clone();
    let app = Router::new().nest("/api/v1", api).with_state(state);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, config: ServerConfig) -> std::io::Result<()> {
    let state = Arc::new(AppState::new(config)?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

async fn api_not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint", Value::Null)
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

async fn list_cities(State(state): Shared) -> Json<Vec<CitySummary>> {
    Json(state.cities().iter().map(|c| c.summary()).collect())
}

async fn upload_city(State(state): Shared, body: String) -> ApiResult<Response> {
    let city = parse_city(&body).map_err(|e| ApiError::from_load("invalid_city", e))?;
    let entry = state.add_city(city).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok((StatusCode::CREATED, Json(entry.summary())).into_response())
}

async fn get_city(State(state): Shared, Path(id): Path<String>) -> ApiResult<Response> {
    let entry = state.city(&id).ok_or_else(|| ApiError::not_found("city", &id))?;
    Ok(Json(&*entry.city).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    city_id: String,
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &str) -> ApiResult<T> {
    let mut de = serde_json::Deserializer::from_str(body);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_request",
            e.inner().to_string(),
            json!({ "path": path }),
        )
    })
}

async fn create_session(State(state): Shared, body: String) -> ApiResult<Response> {
    let req: CreateSession = parse_body(&body)?;
    let entry = state
        .city(&req.city_id)
        .ok_or_else(|| ApiError::not_found("city", &req.city_id))?;
    let session = Session::create((*entry.city).clone())?;
    let shared = state
        .add_session(SessionEntry {
            city_id: entry.id,
            session,
        })
        .map_err(|e| ApiError::internal(e.to_string()))?;
    let guard = shared.lock().await;
    Ok((StatusCode::CREATED, Json(session_view(&guard, false))).into_response())
}

#[derive(Deserialize, Default)]
struct Include {
    include: Option<String>,
}

impl Include {
    fn configuration(&self) -> bool {
        self.include
            .as_deref()
            .is_some_and(|s| s.split(',').any(|p| p.trim() == "configuration"))
    }
}

fn report_view(report: &EquilibriumReport, with_configuration: bool) -> Value {
    let mut v = serde_json::to_value(report).expect("reports serialize");
    if !with_configuration {
        if let Value::Object(map) = &mut v {
            map.remove("configuration");
        }
    }
    v
}

fn session_view(entry: &SessionEntry, with_configuration: bool) -> Value {
    let s = &entry.session;
    json!({
        "id": s.id(),
        "city_id": entry.city_id,
        "city_name": s.city().name,
        "iterations": s.len(),
        "history": s.history().iter().map(|r| report_view(r, with_configuration)).collect::<Vec<_>>(),
    })
}

fn lookup(state: &AppState, id: &str) -> ApiResult<state::SharedSession> {
    state.session(id).ok_or_else(|| ApiError::not_found("session", id))
}

async fn get_session(
    State(state): Shared,
    Path(id): Path<String>,
    Query(include): Query<Include>,
) -> ApiResult<Json<Value>> {
    let shared = lookup(&state, &id)?;
    let guard = shared.lock().await;
    Ok(Json(session_view(&guard, include.configuration())))
}

async fn delete_session(State(state): Shared, Path(id): Path<String>) -> ApiResult<StatusCode> {
    match state.remove_session(&id) {
        Ok(true) => Ok(StatusCode::NO_CONTENT),
        Ok(false) => Err(ApiError::not_found("session", &id)),
        Err(e) => Err(ApiError::internal(e.to_string())),
    }
}

/// Solves on a blocking thread under the configured timeout. The session
/// stays locked for the duration, so iterations of one session are
/// serialized while other sessions proceed.
async fn run_iteration(
    State(state): Shared,
    Path(id): Path<String>,
    Query(include): Query<Include>,
    body: String,
) -> ApiResult<Response> {
    let controls = parse_controls(&body).map_err(|e| ApiError::from_load("invalid_controls", e))?;
    let shared = lookup(&state, &id)?;
    let mut guard = shared.lock().await;
    let city = guard.session.city().clone();
    let next = guard.session.len() + 1;

    let timeout = state.config.solve_timeout;
    let task = tokio::task::spawn_blocking(move || evaluate(&city, &controls, next));
    let report = match tokio::time::timeout(timeout, task).await {
        Err(_) => {
            return Err(ApiError::new(
                StatusCode::GATEWAY_TIMEOUT,
                "timeout",
                format!("solve exceeded {} s", timeout.as_secs_f64()),
                Value::Null,
            ))
        }
        Ok(Err(join)) => return Err(ApiError::internal(format!("solver task failed: {join}"))),
        Ok(Ok(result)) => result?,
    };

    guard.session.push_report(report)?;
    state
        .persist(&guard.session)
        .map_err(|e| ApiError::internal(e.to_string()))?;
    let report = guard.session.history().last().expect("just pushed");
    Ok((StatusCode::CREATED, Json(report_view(report, include.configuration()))).into_response())
}

async fn get_iteration(
    State(state): Shared,
    Path((id, n)): Path<(String, String)>,
    Query(include): Query<Include>,
) -> ApiResult<Json<Value>> {
    let n: usize = n
        .parse()
        .map_err(|_| ApiError::bad_request(format!("iteration must be a positive integer, got `{n}`")))?;
    let shared = lookup(&state, &id)?;
    let guard = shared.lock().await;
    let report = guard.session.report(n)?;
    Ok(Json(report_view(report, include.configuration())))
}

async fn reset_session(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let shared = lookup(&state, &id)?;
    let mut guard = shared.lock().await;
    guard.session.reset();
    state
        .persist(&guard.session)
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(session_view(&guard, false)))
}

async fn diff(
    State(state): Shared,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult<Json<Value>> {
    let index = |name: &str| -> ApiResult<usize> {
        let raw = query
            .get(name)
            .ok_or_else(|| ApiError::bad_request(format!("missing query parameter `{name}`")))?;
        raw.parse()
            .map_err(|_| ApiError::bad_request(format!("`{name}` must be a positive integer, got `{raw}`")))
    };
    let (a, b) = (index("a")?, index("b")?);
    let shared = lookup(&state, &id)?;
    let guard = shared.lock().await;
    let diff = guard.session.diff(a, b)?;
    Ok(Json(serde_json::to_value(diff).expect("diffs serialize")))
}
