//! Projection records, method identifiers, and the on-disk projection format.
//!
//! An exported projection is a directory holding `projection.csv`
//! (`label,x,y[,z]`) and `projection.json` (method, params, dataset id,
//! bundle checksum, stress, warnings). Floats use the shortest text that
//! round-trips. No timestamp is written, so exports are reproducible.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines;
use crate::embedding::AlignedData;
use crate::error::{Error, Result};
use crate::phate::{self, PhateParams};
use crate::scalar::Real;

pub const CSV_FILE: &str = "projection.csv";
pub const MANIFEST_FILE: &str = "projection.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodId {
    Phate,
    Pca,
    Cmds,
    Spectral,
}

impl MethodId {
    pub const ALL: [MethodId; 4] = [MethodId::Phate, MethodId::Pca, MethodId::Cmds, MethodId::Spectral];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodId::Phate => "phate",
            MethodId::Pca => "pca",
            MethodId::Cmds => "cmds",
            MethodId::Spectral => "spectral",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = MethodId::ALL.iter().map(|m| m.as_str()).collect();
                Error::param(format!("unknown method {s:?}; valid methods: {}", valid.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearParams {
    pub out_dims: usize,
}

impl Default for LinearParams {
    fn default() -> Self {
        LinearParams { out_dims: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralParams {
    pub k: usize,
    pub out_dims: usize,
}

impl Default for SpectralParams {
    fn default() -> Self {
        SpectralParams { k: 10, out_dims: 2 }
    }
}

/// The full parameter record of one projection, tagged by method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum MethodParams {
    Phate(PhateParams),
    Pca(LinearParams),
    Cmds(LinearParams),
    Spectral(SpectralParams),
}

impl MethodParams {
    pub fn method(&self) -> MethodId {
        match self {
            MethodParams::Phate(_) => MethodId::Phate,
            MethodParams::Pca(_) => MethodId::Pca,
            MethodParams::Cmds(_) => MethodId::Cmds,
            MethodParams::Spectral(_) => MethodId::Spectral,
        }
    }

    pub fn out_dims(&self) -> usize {
        match self {
            MethodParams::Phate(p) => p.out_dims,
            MethodParams::Pca(p) | MethodParams::Cmds(p) => p.out_dims,
            MethodParams::Spectral(p) => p.out_dims,
        }
    }

    /// Parameters for `method` derived from a PHATE record: baselines take its
    /// `out_dims`, spectral also its `k`.
    pub fn for_method(method: MethodId, base: &PhateParams) -> Self {
        match method {
            MethodId::Phate => MethodParams::Phate(base.clone()),
            MethodId::Pca => MethodParams::Pca(LinearParams { out_dims: base.out_dims }),
            MethodId::Cmds => MethodParams::Cmds(LinearParams { out_dims: base.out_dims }),
            MethodId::Spectral => MethodParams::Spectral(SpectralParams { k: base.k, out_dims: base.out_dims }),
        }
    }

    /// Checks the parameters against an input of `n` points without running
    /// anything.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            MethodParams::Phate(p) => p.validate(n),
            MethodParams::Pca(p) => baselines::check_linear(n, p.out_dims, 2),
            MethodParams::Cmds(p) => baselines::check_linear(n, p.out_dims, 3),
            MethodParams::Spectral(p) => baselines::check_spectral(n, p),
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("params serialize");
        hex::encode(Sha256::digest(json.as_bytes()))[..16].to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub bundle_checksum: String,
    /// RFC 3339; empty for projections read back from disk.
    pub timestamp: String,
}

/// An `n × out_dims` coordinate set aligned to a dataset's items.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection<T> {
    pub coords: Array2<T>,
    pub labels: Vec<String>,
    pub method: MethodId,
    pub params: MethodParams,
    pub dataset_id: String,
    pub stress: Option<f64>,
    pub provenance: Provenance,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ProjectionManifest {
    method: MethodId,
    params: MethodParams,
    dataset_id: String,
    bundle_checksum: String,
    stress: Option<f64>,
    count: usize,
    out_dims: usize,
    #[serde(default)]
    warnings: Vec<String>,
}

fn axis_name(j: usize) -> String {
    match j {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        _ => format!("c{}", j + 1),
    }
}

impl<T: Real> Projection<T> {
    pub(crate) fn new(
        data: &AlignedData<T>,
        coords: Array2<T>,
        params: MethodParams,
        stress: Option<f64>,
        warnings: Vec<String>,
    ) -> Self {
        for w in &warnings {
            log::warn!("{w}");
        }
        Projection {
            coords,
            labels: data.dataset.items.iter().map(|i| i.label.clone()).collect(),
            method: params.method(),
            params,
            dataset_id: data.dataset.id.clone(),
            stress,
            provenance: Provenance {
                bundle_checksum: data.source_checksum.clone(),
                timestamp: chrono::Utc::now().to_rfc3339(),
            },
            warnings,
        }
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn out_dims(&self) -> usize {
        self.coords.ncols()
    }

    /// The `label,x,y[,z]` table.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["label".to_string()];
        header.extend((0..self.out_dims()).map(axis_name));
        w.write_record(&header)?;
        for (label, row) in self.labels.iter().zip(self.coords.rows()) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| v.as_f64().to_string()));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
    }

    /// `sha256:<hex>` of the CSV table; identifies the coordinates a report
    /// was computed from.
    pub fn checksum(&self) -> Result<String> {
        Ok(format!("sha256:{}", hex::encode(Sha256::digest(self.to_csv()?.as_bytes()))))
    }

    fn manifest(&self) -> ProjectionManifest {
        ProjectionManifest {
            method: self.method,
            params: self.params.clone(),
            dataset_id: self.dataset_id.clone(),
            bundle_checksum: self.provenance.bundle_checksum.clone(),
            stress: self.stress,
            count: self.len(),
            out_dims: self.out_dims(),
            warnings: self.warnings.clone(),
        }
    }

    pub fn manifest_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.manifest())?;
        s.push('\n');
        Ok(s)
    }
}

pub fn export_projection<T: Real>(projection: &Projection<T>, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    fs::write(dir.join(CSV_FILE), projection.to_csv()?)?;
    fs::write(dir.join(MANIFEST_FILE), projection.manifest_json()?)?;
    Ok(())
}

pub fn import_projection<T: Real>(dir: impl AsRef<Path>) -> Result<Projection<T>> {
    let dir = dir.as_ref();
    let manifest: ProjectionManifest = serde_json::from_slice(&fs::read(dir.join(MANIFEST_FILE))?)?;
    let csv_path = dir.join(CSV_FILE);
    let mut reader = csv::ReaderBuilder::new().from_path(&csv_path)?;
    let width = reader.headers()?.len();
    if width != manifest.out_dims + 1 {
        return Err(Error::Validation(format!(
            "{} has {} coordinate columns, manifest says {}",
            csv_path.display(),
            width.saturating_sub(1),
            manifest.out_dims
        )));
    }
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        labels.push(rec[0].to_string());
        for field in rec.iter().skip(1) {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                path: csv_path.clone(),
                line,
                message: format!("not a number: {field:?}"),
            })?;
            values.push(T::lit(v));
        }
    }
    if labels.len() != manifest.count {
        return Err(Error::Validation(format!(
            "{} rows in {}, manifest says {}",
            labels.len(),
            csv_path.display(),
            manifest.count
        )));
    }
    let coords = Array2::from_shape_vec((labels.len(), manifest.out_dims), values)
        .map_err(|e| Error::Validation(e.to_string()))?;
    Ok(Projection {
        coords,
        labels,
        method: manifest.method,
        params: manifest.params,
        dataset_id: manifest.dataset_id,
        stress: manifest.stress,
        provenance: Provenance {
            bundle_checksum: manifest.bundle_checksum,
            timestamp: String::new(),
        },
        warnings: manifest.warnings,
    })
}

/// Runs whichever method `params` names.
pub fn project<T: Real>(data: &AlignedData<T>, params: &MethodParams) -> Result<Projection<T>> {
    match params {
        MethodParams::Phate(p) => phate::phate_project(data, p),
        MethodParams::Pca(p) => baselines::pca_project(data, p.out_dims),
        MethodParams::Cmds(p) => baselines::cmds_project(data, p.out_dims),
        MethodParams::Spectral(p) => baselines::spectral_project(data, p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_method_lists_valid_ones() {
        let err = "warp".parse::<MethodId>().unwrap_err().to_string();
        assert!(err.contains("phate, pca, cmds, spectral"), "{err}");
        assert_eq!("cmds".parse::<MethodId>().unwrap(), MethodId::Cmds);
    }

    #[test]
    fn params_tagged_json() {
        let p = MethodParams::Spectral(SpectralParams { k: 4, out_dims: 2 });
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"method":"spectral","k":4,"out_dims":2}"#);
        let back: MethodParams = serde_json::from_str(r#"{"method":"phate","t":7}"#).unwrap();
        assert_eq!(back, MethodParams::Phate(PhateParams { t: 7, ..PhateParams::default() }));
    }

    #[test]
    fn hash_distinguishes_params() {
        let a = MethodParams::Pca(LinearParams { out_dims: 2 });
        let b = MethodParams::Cmds(LinearParams { out_dims: 2 });
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), a.clone().hash());
        assert_eq!(a.hash().len(), 16);
    }
}
