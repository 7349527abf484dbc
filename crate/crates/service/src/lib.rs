//! HTTP API over the shipped datasets, embedding bundles, projections and
//! comparisons. Projection and comparison runs are asynchronous jobs: `POST`
//! returns an id immediately and the client polls `GET` until the status is
//! `done` or `failed`. Every error body is `{"code", "message"}`.

mod error;
pub mod jobs;
pub mod store;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

pub use error::ApiError;
pub use jobs::{CompareRequest, JobStatus, ProjectionRequest};
pub use store::Store;

use jobs::{CompareStore, Created, JobStore};

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Directory holding `datasets/` and `bundles/`.
    pub data_dir: PathBuf,
    /// Where finished projection jobs are persisted and reloaded from.
    pub persist_dir: Option<PathBuf>,
    /// Static explorer assets served at `/`.
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct AppState {
    pub store: Store,
    pub jobs: JobStore,
    pub compares: CompareStore,
}

pub type SharedState = Arc<AppState>;

impl AppState {
    pub fn new(store: Store, persist_dir: Option<PathBuf>) -> std::io::Result<SharedState> {
        Ok(Arc::new(AppState { store, jobs: JobStore::new(persist_dir)?, compares: CompareStore::default() }))
    }
}

type ApiResult = Result<axum::response::Response, ApiError>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

async fn list_datasets(State(state): State<SharedState>) -> Json<Value> {
    let list: Vec<Value> = state
        .store
        .datasets()
        .iter()
        .map(|d| {
            json!({
                "id": d.id,
                "name": d.name,
                "item_count": d.len(),
                "domains": d.declared_domains,
            })
        })
        .collect();
    Json(Value::Array(list))
}

async fn get_dataset(State(state): State<SharedState>, Path(id): Path<String>) -> ApiResult {
    let d = state.store.dataset(&id).ok_or_else(|| ApiError::not_found(format!("unknown dataset {id:?}")))?;
    let mut class_counts: BTreeMap<String, usize> = BTreeMap::new();
    for item in &d.items {
        *class_counts.entry(item.item_class.to_string()).or_default() += 1;
    }
    Ok(Json(json!({
        "id": d.id,
        "name": d.name,
        "item_count": d.len(),
        "domains": d.declared_domains,
        "class_counts": class_counts,
        "items": d.items,
    }))
    .into_response())
}

async fn list_bundles(State(state): State<SharedState>) -> Json<Value> {
    let list: Vec<Value> = state
        .store
        .bundles()
        .map(|(id, b)| {
            json!({
                "id": id,
                "model_id": b.model_id,
                "dim": b.dim,
                "count": b.count(),
                "checksum": b.checksum,
            })
        })
        .collect();
    Json(Value::Array(list))
}

async fn create_projection(State(state): State<SharedState>, body: Bytes) -> ApiResult {
    let request: ProjectionRequest = parse(&body)?;
    let prepared = jobs::prepare(&state.store, &request)?;
    let key = prepared.key.clone();
    let (id, cached) = match state.jobs.create(request, key) {
        Created::Cached(id) => (id, true),
        Created::Queued(id) => {
            let worker = state.clone();
            let job_id = id.clone();
            tokio::spawn(async move {
                let runner = worker.clone();
                let run_id = job_id.clone();
                let outcome = tokio::task::spawn_blocking(move || {
                    runner.jobs.mark_running(&run_id);
                    jobs::compute(&prepared)
                })
                .await
                .unwrap_or_else(|e| Err(format!("projection task panicked: {e}")));
                worker.jobs.finish(&job_id, outcome);
            });
            (id, false)
        }
    };
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": id, "cached": cached }))).into_response())
}

async fn get_projection(State(state): State<SharedState>, Path(id): Path<String>) -> ApiResult {
    let job = state.jobs.get(&id).ok_or_else(|| ApiError::not_found(format!("unknown job {id:?}")))?;
    Ok(Json(job.body()).into_response())
}

async fn get_projection_metrics(State(state): State<SharedState>, Path(id): Path<String>) -> ApiResult {
    let job = state.jobs.get(&id).ok_or_else(|| ApiError::not_found(format!("unknown job {id:?}")))?;
    match (job.status, job.result) {
        (JobStatus::Done, Some(r)) => Ok(Json(r.metrics).into_response()),
        (JobStatus::Failed, _) => Err(ApiError::not_ready(format!(
            "job {id} failed: {}",
            job.error.unwrap_or_default()
        ))),
        (status, _) => Err(ApiError::not_ready(format!("job {id} is {}", json!(status).as_str().unwrap_or("")))),
    }
}

async fn create_compare(State(state): State<SharedState>, body: Bytes) -> ApiResult {
    let request: CompareRequest = parse(&body)?;
    let inputs = jobs::prepare_compare(&state.store, &request)?;
    let id = state.compares.create(request.clone());
    let worker = state.clone();
    let job_id = id.clone();
    tokio::spawn(async move {
        let runner = worker.clone();
        let run_id = job_id.clone();
        let outcome = tokio::task::spawn_blocking(move || {
            runner.compares.mark_running(&run_id);
            jobs::compute_compare(&inputs, &request)
        })
        .await
        .unwrap_or_else(|e| Err(format!("comparison task panicked: {e}")));
        worker.compares.finish(&job_id, outcome);
    });
    Ok((StatusCode::ACCEPTED, Json(json!({ "compare_id": id }))).into_response())
}

async fn get_compare(State(state): State<SharedState>, Path(id): Path<String>) -> ApiResult {
    let job = state.compares.get(&id).ok_or_else(|| ApiError::not_found(format!("unknown comparison {id:?}")))?;
    Ok(Json(job).into_response())
}

async fn unknown_api() -> ApiError {
    ApiError::not_found("no such endpoint")
}

pub fn router(state: SharedState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/datasets", get(list_datasets))
        .route("/datasets/{id}", get(get_dataset))
        .route("/bundles", get(list_bundles))
        .route("/projections", post(create_projection))
        .route("/projections/{id}", get(get_projection))
        .route("/projections/{id}/metrics", get(get_projection_metrics))
        .route("/compare", post(create_compare))
        .route("/compare/{id}", get(get_compare))
        .fallback(unknown_api)
        .with_state(state);
    let app = Router::new().nest("/api", api);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Loads the store and serves until the process is stopped.
pub async fn serve(config: ServiceConfig, addr: SocketAddr) -> std::io::Result<()> {
    let store = Store::load(&config.data_dir).map_err(std::io::Error::other)?;
    let state = AppState::new(store, config.persist_dir.clone())?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, config.static_dir)).await
}
