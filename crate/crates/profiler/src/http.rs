// Copyright 2026 The Profiler Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! JSON-over-HTTP API for the engine. Every error body has the shape
//! `{"error": {"code": "...", "message": "..."}}`.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{any, get, post};
use axum::{Json, Router};
use profiler_core::table::CsvOptions;
use profiler_core::typo::FixDecision;
use profiler_core::NullMode;
use serde::Deserialize;
use serde_json::json;

use crate::engine::{Engine, EngineError};
use crate::results::ResultQuery;
use crate::spec::TaskSpec;

pub const MAX_UPLOAD_BYTES: usize = 1 << 30;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "validation_error", message)
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let code = e.code();
        let status = match code {
            "unknown_dataset" | "unknown_task" => StatusCode::NOT_FOUND,
            "not_finished" | "already_finished" | "stale_decision" => StatusCode::CONFLICT,
            "immutable_dataset" => StatusCode::FORBIDDEN,
            "storage_full" => StatusCode::INSUFFICIENT_STORAGE,
            "io_error" => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": {"code": self.code, "message": self.message}}))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;
type Shared = State<Arc<Engine>>;

/// Runs blocking engine work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, EngineError> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

pub fn router(engine: Arc<Engine>) -> Router {
    let not_found = || async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") };
    let api = Router::new()
        .route("/api/health", get(|| async { Json(json!({"status": "ok"})) }))
        .route("/api/datasets", get(list_datasets).post(upload_dataset))
        .route("/api/datasets/{id}", get(get_dataset).delete(delete_dataset))
        .route("/api/datasets/{id}/snippet", get(snippet))
        .route("/api/datasets/{id}/fixes", post(apply_fixes))
        .route("/api/tasks", get(list_tasks).post(submit_task))
        .route("/api/tasks/{id}", get(task_status))
        .route("/api/tasks/{id}/result", get(task_result))
        .route("/api/tasks/{id}/cancel", post(cancel_task))
        .route("/api/{*rest}", any(not_found))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES));
    let app = match engine.config().static_dir.clone() {
        Some(dir) => {
            let index = dir.join("index.html");
            api.fallback_service(tower_http::services::ServeDir::new(dir).fallback(tower_http::services::ServeFile::new(index)))
        }
        None => api.fallback(not_found),
    };
    app.with_state(engine)
}

/// Serves the API until ctrl-c.
pub async fn serve(engine: Arc<Engine>, listen: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(listen).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(engine))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn list_datasets(State(engine): Shared) -> impl IntoResponse {
    Json(engine.datasets())
}

async fn get_dataset(State(engine): Shared, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(engine.dataset(&id)?))
}

async fn delete_dataset(State(engine): Shared, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    blocking(move || engine.delete_dataset(&id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn snippet(State(engine): Shared, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || engine.snippet(&id)).await?))
}

fn parse_bool(field: &str, v: &str) -> ApiResult<bool> {
    match v.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(ApiError::bad_request(format!("{field}: expected a boolean, got {other:?}"))),
    }
}

/// Multipart fields: `file` (required), `name`, `separator`, `has_header`,
/// `null_mode`.
async fn upload_dataset(State(engine): Shared, mut form: Multipart) -> ApiResult<impl IntoResponse> {
    let mut file: Option<(Option<String>, Bytes)> = None;
    let mut name = None;
    let mut options = CsvOptions::default();
    while let Some(field) = form.next_field().await.map_err(|e| ApiError::bad_request(e.body_text()))? {
        let field_name = field.name().unwrap_or_default().to_string();
        match field_name.as_str() {
            "file" => {
                let file_name = field.file_name().map(str::to_string);
                let bytes = field.bytes().await.map_err(|e| ApiError::bad_request(e.body_text()))?;
                file = Some((file_name, bytes));
            }
            other => {
                let text = field.text().await.map_err(|e| ApiError::bad_request(e.body_text()))?;
                match other {
                    "name" => name = Some(text),
                    "separator" => {
                        let mut chars = text.chars();
                        options.separator = match (chars.next(), chars.next()) {
                            (Some(c), None) => c,
                            _ if text == "\\t" => '\t',
                            _ => return Err(ApiError::bad_request("separator must be a single character")),
                        };
                    }
                    "has_header" => options.has_header = parse_bool("has_header", &text)?,
                    "null_mode" => {
                        options.null_mode = serde_json::from_value::<NullMode>(json!(text))
                            .map_err(|_| ApiError::bad_request("null_mode must be null-equal or null-distinct"))?
                    }
                    _ => return Err(ApiError::bad_request(format!("unknown form field {other:?}"))),
                }
            }
        }
    }
    let (file_name, bytes) = file.ok_or_else(|| ApiError::bad_request("missing file field"))?;
    let name = name
        .or_else(|| file_name.map(|f| f.rsplit_once('.').map_or(f.clone(), |(stem, _)| stem.to_string())))
        .unwrap_or_else(|| "dataset".to_string());
    let entry = blocking(move || engine.upload(&name, &bytes, options)).await?;
    Ok((StatusCode::CREATED, Json(entry)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixRequest {
    decisions: Vec<FixDecision>,
    #[serde(default)]
    name: Option<String>,
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

async fn apply_fixes(State(engine): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let req: FixRequest = parse_json(&body)?;
    let entry = blocking(move || engine.apply_fixes(&id, &req.decisions, req.name.as_deref())).await?;
    Ok((StatusCode::CREATED, Json(entry)))
}

async fn list_tasks(State(engine): Shared) -> impl IntoResponse {
    Json(engine.tasks())
}

async fn submit_task(State(engine): Shared, body: Bytes) -> ApiResult<impl IntoResponse> {
    let spec: TaskSpec = parse_json(&body)?;
    let status = blocking(move || engine.submit(spec)).await?;
    Ok((StatusCode::ACCEPTED, Json(status)))
}

async fn task_status(State(engine): Shared, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(engine.status(&id)?))
}

async fn cancel_task(State(engine): Shared, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(engine.cancel(&id)?))
}

async fn task_result(
    State(engine): Shared,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<impl IntoResponse> {
    let number = |key: &str| -> ApiResult<Option<usize>> {
        params
            .get(key)
            .filter(|v| !v.is_empty())
            .map(|v| v.parse().map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "bad_page", format!("{key} must be a positive integer"))))
            .transpose()
    };
    if let Some(unknown) = params.keys().find(|k| !["sort", "filter", "page", "page_size"].contains(&k.as_str())) {
        return Err(ApiError::bad_request(format!("unknown query parameter {unknown:?}")));
    }
    let query = ResultQuery {
        sort: params.get("sort").cloned(),
        filter: params.get("filter").cloned(),
        page: number("page")?,
        page_size: number("page_size")?,
    };
    Ok(Json(blocking(move || engine.result_page(&id, &query)).await?))
}
