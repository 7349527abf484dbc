//! Projection and comparison jobs: request validation, the blocking compute
//! step, and the in-memory store with its result cache.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use semgeo::compare::ComparisonCell;
use semgeo::{
    align, apply_filter, full_report, project, rank_methods, run_matrix, AlignedData64, FilterSpec, MethodId,
    MethodParams, MetricsConfig, PhateParams, Projection64, RankWeights,
};

use crate::error::ApiError;
use crate::store::Store;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRequest {
    pub dataset_id: String,
    pub bundle_id: String,
    pub method: MethodId,
    /// Method parameters; omitted keys take their defaults.
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub filter: FilterSpec,
    #[serde(default)]
    pub normalize_embeddings: bool,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

/// A validated request, ready to run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub data: AlignedData64,
    pub params: MethodParams,
    pub metrics: MetricsConfig,
    /// Cache identity: dataset, bundle checksum, method params, filter and
    /// preprocessing.
    pub key: String,
}

fn aligned(
    store: &Store,
    dataset_id: &str,
    bundle_id: &str,
    filter: &FilterSpec,
    normalize: bool,
) -> Result<AlignedData64, ApiError> {
    let dataset = store
        .dataset(dataset_id)
        .ok_or_else(|| ApiError::not_found(format!("unknown dataset {dataset_id:?}")))?;
    let bundle = store
        .bundle(bundle_id)
        .ok_or_else(|| ApiError::not_found(format!("unknown bundle {bundle_id:?}")))?;
    let filtered = apply_filter(dataset, filter)?;
    let data = align(&filtered, bundle)?;
    Ok(if normalize { data.normalized() } else { data })
}

pub fn prepare(store: &Store, req: &ProjectionRequest) -> Result<Prepared, ApiError> {
    let data = aligned(store, &req.dataset_id, &req.bundle_id, &req.filter, req.normalize_embeddings)?;
    let mut tagged = req.params.clone();
    tagged.insert("method".into(), json!(req.method));
    let params: MethodParams = serde_json::from_value(Value::Object(tagged))
        .map_err(|e| ApiError::bad_request(format!("invalid {} parameters: {e}", req.method)))?;
    params.validate(data.len())?;
    let key = serde_json::to_string(&json!([
        req.dataset_id,
        data.source_checksum,
        params,
        req.filter,
        req.normalize_embeddings,
        req.metrics,
    ]))
    .expect("key serializes");
    Ok(Prepared { data, params, metrics: req.metrics.clone(), key })
}

/// Coordinates plus everything the UI needs to draw and filter each item.
pub fn projection_body(projection: &Projection64, data: &AlignedData64) -> Value {
    let items: Vec<Value> = data
        .dataset
        .items
        .iter()
        .zip(projection.coords.rows())
        .map(|(item, row)| {
            json!({
                "label": item.label,
                "gloss": item.gloss,
                "language": item.language,
                "category": item.category,
                "item_class": item.item_class,
                "sequence_index": item.sequence_index,
                "network_root": item.network_root,
                "coords": row.to_vec(),
            })
        })
        .collect();
    json!({
        "dataset_id": projection.dataset_id,
        "method": projection.method,
        "params": projection.params,
        "out_dims": projection.out_dims(),
        "count": projection.len(),
        "stress": projection.stress,
        "checksum": projection.checksum().ok(),
        "bundle_checksum": projection.provenance.bundle_checksum,
        "warnings": projection.warnings,
        "items": items,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobResult {
    pub projection: Value,
    pub metrics: Value,
}

/// The blocking part of a projection job.
pub fn compute(p: &Prepared) -> Result<JobResult, String> {
    let projection = project(&p.data, &p.params).map_err(|e| e.to_string())?;
    let report = full_report(&p.data, &projection, &p.metrics).map_err(|e| e.to_string())?;
    Ok(JobResult {
        projection: projection_body(&projection, &p.data),
        metrics: serde_json::to_value(&report).map_err(|e| e.to_string())?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionJob {
    pub id: String,
    pub status: JobStatus,
    /// Served from an earlier identical request.
    pub cached: bool,
    pub request: ProjectionRequest,
    pub result: Option<JobResult>,
    pub error: Option<String>,
    key: String,
}

impl ProjectionJob {
    /// Response body for `GET /api/projections/{id}`; no result until done.
    pub fn body(&self) -> Value {
        let mut body = json!({
            "job_id": self.id,
            "status": self.status,
            "cached": self.cached,
            "request": self.request,
        });
        if let Some(r) = &self.result {
            body["result"] = r.projection.clone();
            body["metrics"] = r.metrics.clone();
        }
        if let Some(e) = &self.error {
            body["error"] = json!(e);
        }
        body
    }
}

/// Jobs by id plus the cache of finished results. Status changes happen under
/// the lock, so every reader sees a linear history.
#[derive(Debug)]
pub struct JobStore {
    jobs: Mutex<HashMap<String, ProjectionJob>>,
    cache: Mutex<HashMap<String, String>>,
    next: AtomicU64,
    persist_dir: Option<PathBuf>,
}

pub enum Created {
    /// A fresh job that still has to be run.
    Queued(String),
    /// A finished copy of an earlier identical job.
    Cached(String),
}

impl JobStore {
    /// An empty store; with `persist_dir`, finished jobs found there are loaded
    /// and new ones are written there.
    pub fn new(persist_dir: Option<PathBuf>) -> std::io::Result<Self> {
        let store = JobStore {
            jobs: Mutex::new(HashMap::new()),
            cache: Mutex::new(HashMap::new()),
            next: AtomicU64::new(1),
            persist_dir,
        };
        if let Some(dir) = &store.persist_dir {
            fs::create_dir_all(dir)?;
            store.load(dir)?;
        }
        Ok(store)
    }

    fn load(&self, dir: &Path) -> std::io::Result<()> {
        let mut highest = 0;
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_none_or(|e| e != "json") {
                continue;
            }
            let job: ProjectionJob = match serde_json::from_slice(&fs::read(&path)?) {
                Ok(job) => job,
                Err(e) => {
                    log::warn!("skipping {}: {e}", path.display());
                    continue;
                }
            };
            if let Some(n) = job.id.strip_prefix("p").and_then(|n| n.parse::<u64>().ok()) {
                highest = highest.max(n);
            }
            if job.status == JobStatus::Done {
                self.cache.lock().unwrap().entry(job.key.clone()).or_insert_with(|| job.id.clone());
            }
            self.jobs.lock().unwrap().insert(job.id.clone(), job);
        }
        self.next.store(highest + 1, Ordering::SeqCst);
        Ok(())
    }

    fn fresh_id(&self) -> String {
        format!("p{:06}", self.next.fetch_add(1, Ordering::SeqCst))
    }

    pub fn create(&self, request: ProjectionRequest, key: String) -> Created {
        let hit = {
            let cache = self.cache.lock().unwrap();
            let jobs = self.jobs.lock().unwrap();
            cache.get(&key).and_then(|id| jobs.get(id)).and_then(|j| j.result.clone())
        };
        let id = self.fresh_id();
        let cached = hit.is_some();
        let job = ProjectionJob {
            id: id.clone(),
            status: if cached { JobStatus::Done } else { JobStatus::Queued },
            cached,
            request,
            result: hit,
            error: None,
            key,
        };
        if cached {
            self.persist(&job);
        }
        self.jobs.lock().unwrap().insert(id.clone(), job);
        if cached { Created::Cached(id) } else { Created::Queued(id) }
    }

    pub fn get(&self, id: &str) -> Option<ProjectionJob> {
        self.jobs.lock().unwrap().get(id).cloned()
    }

    pub fn mark_running(&self, id: &str) {
        if let Some(job) = self.jobs.lock().unwrap().get_mut(id) {
            if job.status == JobStatus::Queued {
                job.status = JobStatus::Running;
            }
        }
    }

    /// Records the outcome; finished jobs never change again.
    pub fn finish(&self, id: &str, outcome: Result<JobResult, String>) {
        let finished = {
            let mut jobs = self.jobs.lock().unwrap();
            let Some(job) = jobs.get_mut(id) else { return };
            if matches!(job.status, JobStatus::Done | JobStatus::Failed) {
                return;
            }
            match outcome {
                Ok(result) => {
                    job.status = JobStatus::Done;
                    job.result = Some(result);
                }
                Err(e) => {
                    job.status = JobStatus::Failed;
                    job.error = Some(e);
                }
            }
            job.clone()
        };
        if finished.status == JobStatus::Done {
            self.cache.lock().unwrap().entry(finished.key.clone()).or_insert_with(|| finished.id.clone());
        }
        self.persist(&finished);
    }

    fn persist(&self, job: &ProjectionJob) {
        let Some(dir) = &self.persist_dir else { return };
        if job.status != JobStatus::Done {
            return;
        }
        let path = dir.join(format!("{}.json", job.id));
        let written = serde_json::to_vec(job)
            .map_err(std::io::Error::other)
            .and_then(|bytes| fs::write(&path, bytes));
        if let Err(e) = written {
            log::warn!("could not persist job {}: {e}", job.id);
        }
    }
}

// ---- comparisons ----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareInput {
    pub dataset_id: String,
    pub bundle_id: String,
    #[serde(default)]
    pub filter: FilterSpec,
}

fn all_methods() -> Vec<MethodId> {
    MethodId::ALL.to_vec()
}

fn default_grid() -> Vec<PhateParams> {
    vec![PhateParams::default()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRequest {
    pub inputs: Vec<CompareInput>,
    #[serde(default = "all_methods")]
    pub methods: Vec<MethodId>,
    /// PHATE parameter sets; baselines reuse their `out_dims` (and `k` for
    /// spectral).
    #[serde(default = "default_grid")]
    pub param_grid: Vec<PhateParams>,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub weights: RankWeights,
    #[serde(default)]
    pub normalize_embeddings: bool,
}

pub fn prepare_compare(store: &Store, req: &CompareRequest) -> Result<Vec<AlignedData64>, ApiError> {
    if req.inputs.is_empty() || req.methods.is_empty() || req.param_grid.is_empty() {
        return Err(ApiError::bad_request("inputs, methods and param_grid must be non-empty"));
    }
    req.inputs
        .iter()
        .map(|i| aligned(store, &i.dataset_id, &i.bundle_id, &i.filter, req.normalize_embeddings))
        .collect()
}

fn cell_row(cell: &ComparisonCell<f64>) -> Value {
    let report = cell.report();
    json!({
        "dataset": cell.dataset_id,
        "method": cell.method,
        "params_hash": cell.params.hash(),
        "params": cell.params,
        "silhouette": report.and_then(|r| r.silhouette.value().copied()),
        "branch_linearity": report.and_then(|r| r.linearity_score.value().copied()),
        "global_preservation": report.and_then(|r| r.global_preservation.value().copied()),
        "status": cell.status(),
        "wall_time_ms": cell.wall_time.as_millis() as u64,
    })
}

pub fn compute_compare(inputs: &[AlignedData64], req: &CompareRequest) -> Result<Value, String> {
    let cells = run_matrix(inputs, &req.methods, &req.param_grid, &req.metrics).map_err(|e| e.to_string())?;
    let ranking = rank_methods(&cells, &req.weights);
    Ok(json!({
        "cells": cells.iter().map(cell_row).collect::<Vec<_>>(),
        "ranking": ranking,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareJob {
    pub compare_id: String,
    pub status: JobStatus,
    pub request: CompareRequest,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Default)]
pub struct CompareStore {
    jobs: Mutex<HashMap<String, CompareJob>>,
    next: AtomicU64,
}

impl CompareStore {
    pub fn create(&self, request: CompareRequest) -> String {
        let id = format!("c{:06}", self.next.fetch_add(1, Ordering::SeqCst) + 1);
        let job = CompareJob { compare_id: id.clone(), status: JobStatus::Queued, request, result: None, error: None };
        self.jobs.lock().unwrap().insert(id.clone(), job);
        id
    }

    pub fn get(&self, id: &str) -> Option<CompareJob> {
        self.jobs.lock().unwrap().get(id).cloned()
    }

    pub fn mark_running(&self, id: &str) {
        if let Some(job) = self.jobs.lock().unwrap().get_mut(id) {
            job.status = JobStatus::Running;
        }
    }

    pub fn finish(&self, id: &str, outcome: Result<Value, String>) {
        if let Some(job) = self.jobs.lock().unwrap().get_mut(id) {
            match outcome {
                Ok(v) => {
                    job.status = JobStatus::Done;
                    job.result = Some(v);
                }
                Err(e) => {
                    job.status = JobStatus::Failed;
                    job.error = Some(e);
                }
            }
        }
    }
}
