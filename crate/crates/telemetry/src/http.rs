//! HTTP routes over [`Telemetry`].
//!
//! | method | path                | auth      | body / query                          |
//! |--------|---------------------|-----------|---------------------------------------|
//! | POST   | /api/upload-data    | hive key  | `?hive=`; sample object or array      |
//! | POST   | /api/upload-network | hive key  | `?hive=`; network object              |
//! | POST   | /api/upload-video   | hive key  | `?hive=`; any bytes, discarded        |
//! | GET    | /api/get-data       | none      | `?hive=&mode=latest` or `history&year=` |
//! | GET    | /api/get-network    | hive/admin| `?hive=`                              |
//! | GET    | /health             | none      |                                       |
//!
//! Keys travel as `Authorization: Bearer <key>`. Errors are JSON objects
//! with `error` and `message`, plus `fields` for validation failures.

use std::future::Future;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::net::TcpListener;

use crate::service::Telemetry;
use crate::TelemetryError;

pub const VIDEO_BODY_LIMIT: usize = 64 * 1024 * 1024;

struct AppState {
    telemetry: Telemetry,
    started: Instant,
}

type Shared = State<Arc<AppState>>;

pub fn router(telemetry: Telemetry) -> Router {
    let state = Arc::new(AppState {
        telemetry,
        started: Instant::now(),
    });
    Router::new()
        .route("/api/upload-data", post(upload_data))
        .route("/api/upload-network", post(upload_network))
        .route(
            "/api/upload-video",
            post(upload_video).layer(DefaultBodyLimit::max(VIDEO_BODY_LIMIT)),
        )
        .route("/api/get-data", get(get_data))
        .route("/api/get-network", get(get_network))
        .route("/health", get(health))
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    telemetry: Telemetry,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(telemetry))
        .with_graceful_shutdown(shutdown)
        .await
}

pub fn status_of(err: &TelemetryError) -> StatusCode {
    match err {
        TelemetryError::Unauthorized => StatusCode::UNAUTHORIZED,
        TelemetryError::UnknownHive(_) => StatusCode::NOT_FOUND,
        TelemetryError::Ordering { .. } => StatusCode::CONFLICT,
        TelemetryError::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
        TelemetryError::BadRequest(_) => StatusCode::BAD_REQUEST,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

fn kind_of(err: &TelemetryError) -> &'static str {
    match err {
        TelemetryError::Unauthorized => "unauthorized",
        TelemetryError::UnknownHive(_) => "not_found",
        TelemetryError::Ordering { .. } => "ordering",
        TelemetryError::Validation(_) => "validation",
        TelemetryError::BadRequest(_) => "bad_request",
        _ => "internal",
    }
}

struct ApiError(TelemetryError);

impl From<TelemetryError> for ApiError {
    fn from(e: TelemetryError) -> Self {
        Self(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = status_of(&self.0);
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            tracing::error!(error = %self.0, "request failed");
        }
        let mut body = json!({"error": kind_of(&self.0), "message": self.0.to_string()});
        match &self.0 {
            TelemetryError::Validation(fields) => body["fields"] = json!(fields),
            TelemetryError::Ordering { last, got } => {
                body["last"] = json!(last);
                body["got"] = json!(got);
            }
            _ => {}
        }
        (status, Json(body)).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

#[derive(Deserialize)]
struct HiveQuery {
    hive: String,
}

#[derive(Deserialize)]
struct DataQuery {
    hive: String,
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    year: Option<i32>,
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers
        .get(header::AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
        .map(str::trim)
}

fn parse_body(body: &[u8]) -> Result<Value, TelemetryError> {
    serde_json::from_slice(body).map_err(|e| TelemetryError::BadRequest(format!("body: {e}")))
}

async fn upload_data(
    State(app): Shared,
    Query(q): Query<HiveQuery>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let token = bearer(&headers).map(str::to_owned);
    app.telemetry.registry().authorize(&q.hive, token.as_deref())?;
    let payload = parse_body(&body)?;
    let is_batch = payload.is_array();
    let app2 = Arc::clone(&app);
    let seqs = tokio::task::spawn_blocking(move || {
        app2.telemetry.upload_data(&q.hive, token.as_deref(), &payload)
    })
    .await
    .map_err(|e| TelemetryError::Io(std::io::Error::other(e)))??;
    Ok(Json(if is_batch {
        json!({"status": "ok", "sequences": seqs})
    } else {
        json!({"status": "ok", "sequence": seqs[0]})
    }))
}

async fn upload_network(
    State(app): Shared,
    Query(q): Query<HiveQuery>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let token = bearer(&headers).map(str::to_owned);
    app.telemetry.registry().authorize(&q.hive, token.as_deref())?;
    let payload = parse_body(&body)?;
    let app2 = Arc::clone(&app);
    let info = tokio::task::spawn_blocking(move || {
        app2.telemetry.upload_network(&q.hive, token.as_deref(), &payload)
    })
    .await
    .map_err(|e| TelemetryError::Io(std::io::Error::other(e)))??;
    Ok(Json(json!({"status": "ok", "network": info})))
}

async fn upload_video(
    State(app): Shared,
    Query(q): Query<HiveQuery>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let n = app
        .telemetry
        .upload_video(&q.hive, bearer(&headers), body.len())?;
    Ok(Json(json!({"status": "ok", "bytes": n, "stored": false})))
}

async fn get_data(State(app): Shared, Query(q): Query<DataQuery>) -> ApiResult {
    match q.mode.as_deref().unwrap_or("latest") {
        "latest" => {
            let sample = app.telemetry.latest(&q.hive)?;
            Ok(Json(json!({"hive": q.hive, "mode": "latest", "sample": sample})))
        }
        "history" => {
            let year = q
                .year
                .ok_or_else(|| TelemetryError::BadRequest("history needs year".into()))?;
            let samples = app.telemetry.history(&q.hive, year)?;
            Ok(Json(json!({
                "hive": q.hive,
                "mode": "history",
                "year": year,
                "samples": samples,
            })))
        }
        other => Err(TelemetryError::BadRequest(format!("unknown mode {other:?}")).into()),
    }
}

async fn get_network(State(app): Shared, Query(q): Query<HiveQuery>, headers: HeaderMap) -> ApiResult {
    let network = app.telemetry.network(&q.hive, bearer(&headers))?;
    Ok(Json(json!({"hive": q.hive, "network": network})))
}

async fn health(State(app): Shared) -> Json<Value> {
    Json(json!({
        "status": "ok",
        "service": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "hives": app.telemetry.registry().hives.len(),
        "uptime_s": app.started.elapsed().as_secs(),
    }))
}
