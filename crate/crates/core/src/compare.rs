//! The datasets × params × methods comparison matrix and method ranking.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::AlignedData;
use crate::error::{Error, Result};
use crate::metrics::{full_report, MetricsConfig, MetricsReport};
use crate::phate::PhateParams;
use crate::projection::{export_projection, project, MethodId, MethodParams, Projection};
use crate::scalar::Real;

pub const COMPARISON_HEADER: [&str; 8] = [
    "dataset",
    "method",
    "params_hash",
    "silhouette",
    "branch_linearity",
    "global_preservation",
    "status",
    "wall_time_ms",
];

#[derive(Debug, Clone)]
pub enum CellOutcome<T> {
    Done {
        projection: Box<Projection<T>>,
        report: Box<MetricsReport<T>>,
    },
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct ComparisonCell<T> {
    pub dataset_id: String,
    pub method: MethodId,
    pub params: MethodParams,
    pub outcome: CellOutcome<T>,
    pub wall_time: Duration,
}

impl<T: Real> ComparisonCell<T> {
    pub fn report(&self) -> Option<&MetricsReport<T>> {
        match &self.outcome {
            CellOutcome::Done { report, .. } => Some(report),
            CellOutcome::Failed(_) => None,
        }
    }

    pub fn projection(&self) -> Option<&Projection<T>> {
        match &self.outcome {
            CellOutcome::Done { projection, .. } => Some(projection),
            CellOutcome::Failed(_) => None,
        }
    }

    /// `ok` or `failed:<reason>`.
    pub fn status(&self) -> String {
        match &self.outcome {
            CellOutcome::Done { .. } => "ok".into(),
            CellOutcome::Failed(reason) => format!("failed:{reason}"),
        }
    }
}

fn run_cell<T: Real>(data: &AlignedData<T>, params: MethodParams, config: &MetricsConfig) -> ComparisonCell<T> {
    let start = Instant::now();
    let outcome = project(data, &params)
        .and_then(|projection| {
            let report = full_report(data, &projection, config)?;
            Ok(CellOutcome::Done { projection: Box::new(projection), report: Box::new(report) })
        })
        .unwrap_or_else(|e| CellOutcome::Failed(e.to_string()));
    ComparisonCell {
        dataset_id: data.dataset.id.clone(),
        method: params.method(),
        params,
        outcome,
        wall_time: start.elapsed(),
    }
}

/// One cell per (dataset, params, method), in that nesting order. Cells run
/// in parallel; a failing cell is recorded and the rest still run.
pub fn run_matrix<T: Real>(
    inputs: &[AlignedData<T>],
    methods: &[MethodId],
    param_grid: &[PhateParams],
    config: &MetricsConfig,
) -> Result<Vec<ComparisonCell<T>>> {
    if inputs.is_empty() || methods.is_empty() || param_grid.is_empty() {
        return Err(Error::param("comparison grid is empty"));
    }
    let jobs: Vec<(&AlignedData<T>, MethodParams)> = inputs
        .iter()
        .flat_map(|data| {
            param_grid
                .iter()
                .flat_map(move |p| methods.iter().map(move |&m| (data, MethodParams::for_method(m, p))))
        })
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(data, params)| run_cell(data, params, config))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankWeights {
    pub silhouette: f64,
    pub branch: f64,
    pub global: f64,
}

impl Default for RankWeights {
    fn default() -> Self {
        RankWeights { silhouette: 1.0, branch: 1.0, global: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScore {
    pub method: MethodId,
    pub score: f64,
    /// Mean raw criteria over the method's successful cells.
    pub silhouette: Option<f64>,
    pub branch_variance_ratio: Option<f64>,
    pub global_preservation: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Min-max normalization across methods; a constant criterion maps to 1.
fn normalize(values: &[Option<f64>]) -> Vec<f64> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let lo = present.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|v| match v {
            None => 0.0,
            Some(_) if hi <= lo => 1.0,
            Some(x) => (x - lo) / (hi - lo),
        })
        .collect()
}

/// Scores every method appearing in `cells` and sorts best first; equal
/// scores keep enum order (phate, pca, cmds, spectral).
pub fn rank_methods<T: Real>(cells: &[ComparisonCell<T>], weights: &RankWeights) -> Vec<MethodScore> {
    let methods: Vec<MethodId> = MethodId::ALL
        .into_iter()
        .filter(|m| cells.iter().any(|c| c.method == *m))
        .collect();
    let criterion = |m: MethodId, pick: &dyn Fn(&MetricsReport<T>) -> Option<f64>| {
        mean(cells.iter().filter(|c| c.method == m).filter_map(|c| c.report()).filter_map(pick))
    };
    let sil: Vec<Option<f64>> = methods
        .iter()
        .map(|&m| criterion(m, &|r| r.silhouette.value().map(|v| v.as_f64())))
        .collect();
    let branch: Vec<Option<f64>> = methods
        .iter()
        .map(|&m| criterion(m, &|r| r.linearity_score.value().map(|v| v.as_f64())))
        .collect();
    let global: Vec<Option<f64>> = methods
        .iter()
        .map(|&m| criterion(m, &|r| r.global_preservation.value().map(|v| v.as_f64())))
        .collect();
    let (ns, nb, ng) = (normalize(&sil), normalize(&branch), normalize(&global));
    let mut scores: Vec<MethodScore> = methods
        .iter()
        .enumerate()
        .map(|(i, &method)| MethodScore {
            method,
            score: weights.silhouette * ns[i] + weights.branch * nb[i] + weights.global * ng[i],
            silhouette: sil[i],
            branch_variance_ratio: branch[i],
            global_preservation: global[i],
        })
        .collect();
    scores.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(std::cmp::Ordering::Equal));
    scores
}

fn metric_field<T: Real>(m: Option<&T>) -> String {
    m.map(|v| v.as_f64().to_string()).unwrap_or_default()
}

/// Directory name of a cell's artifacts.
pub fn cell_dir_name<T>(cell: &ComparisonCell<T>) -> String {
    let safe: String = cell
        .dataset_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{safe}__{}__{}", cell.method, cell.params.hash())
}

/// Writes `comparison.csv` and, for successful cells, `cells/<name>/` with the
/// projection and both report forms.
pub fn export_comparison<T: Real>(cells: &[ComparisonCell<T>], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("comparison.csv"))?;
    w.write_record(COMPARISON_HEADER)?;
    for cell in cells {
        let report = cell.report();
        w.write_record([
            cell.dataset_id.clone(),
            cell.method.to_string(),
            cell.params.hash(),
            metric_field(report.and_then(|r| r.silhouette.value())),
            metric_field(report.and_then(|r| r.linearity_score.value())),
            metric_field(report.and_then(|r| r.global_preservation.value())),
            cell.status(),
            cell.wall_time.as_millis().to_string(),
        ])?;
        if let CellOutcome::Done { projection, report } = &cell.outcome {
            let cell_dir = dir.join("cells").join(cell_dir_name(cell));
            export_projection(projection, &cell_dir)?;
            fs::write(cell_dir.join("report.json"), report.to_json()?)?;
            fs::write(cell_dir.join("report.txt"), report.to_flat_text())?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_handles_missing_and_constant() {
        assert_eq!(normalize(&[Some(2.0), None, Some(4.0)]), vec![0.0, 0.0, 1.0]);
        assert_eq!(normalize(&[Some(3.0), Some(3.0)]), vec![1.0, 1.0]);
    }
}
