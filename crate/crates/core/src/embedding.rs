//! Embedding bundles: an `n × dim` matrix of little-endian `f32` plus a JSON
//! manifest binding rows to labels.
//!
//! A bundle named `<prefix>` lives in two files, `<prefix>.manifest.json` and
//! `<prefix>.f32`. The matrix file is `count × dim` raw little-endian IEEE-754
//! singles, row-major, no header. The manifest checksum is
//! `sha256:<hex>` over exactly those bytes.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub model_id: String,
    pub dim: usize,
    pub count: usize,
    pub dtype: String,
    pub byte_order: String,
    pub labels: Vec<String>,
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingBundle {
    pub model_id: String,
    pub dim: usize,
    pub labels: Vec<String>,
    /// Row-major `labels.len() × dim`.
    pub matrix: Vec<f32>,
    pub checksum: String,
}

fn matrix_bytes(values: &[f32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn checksum_of(values: &[f32]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(matrix_bytes(values))))
}

impl EmbeddingBundle {
    /// Validates the invariants and computes the checksum.
    pub fn new(model_id: impl Into<String>, labels: Vec<String>, dim: usize, matrix: Vec<f32>) -> Result<Self> {
        let checksum = checksum_of(&matrix);
        let bundle = EmbeddingBundle {
            model_id: model_id.into(),
            dim,
            labels,
            matrix,
            checksum,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn from_rows<T: Real>(model_id: impl Into<String>, labels: Vec<String>, rows: &Array2<T>) -> Result<Self> {
        let data = rows.iter().map(|v| v.as_f64() as f32).collect();
        EmbeddingBundle::new(model_id, labels, rows.ncols(), data)
    }

    pub fn count(&self) -> usize {
        self.labels.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.labels.is_empty() {
            return Err(Error::Bundle("empty bundles are not allowed".into()));
        }
        if self.dim == 0 {
            return Err(Error::Bundle("dim must be positive".into()));
        }
        if self.matrix.len() != self.labels.len() * self.dim {
            return Err(Error::Bundle(format!(
                "matrix holds {} values, expected {} × {}",
                self.matrix.len(),
                self.labels.len(),
                self.dim
            )));
        }
        let mut seen = HashSet::new();
        for l in &self.labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::Bundle(format!("duplicate label {l:?}")));
            }
        }
        if let Some(pos) = self.matrix.iter().position(|v| !v.is_finite()) {
            return Err(Error::Bundle(format!(
                "non-finite value in row {} ({:?})",
                pos / self.dim,
                self.labels[pos / self.dim]
            )));
        }
        let actual = checksum_of(&self.matrix);
        if actual != self.checksum {
            return Err(Error::Checksum {
                expected: self.checksum.clone(),
                actual,
            });
        }
        Ok(())
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.matrix[i * self.dim..(i + 1) * self.dim]
    }

    /// The matrix promoted to `T`.
    pub fn to_array<T: Real>(&self) -> Array2<T> {
        Array2::from_shape_fn((self.count(), self.dim), |(i, j)| {
            T::lit(f64::from(self.matrix[i * self.dim + j]))
        })
    }

    pub fn manifest(&self) -> BundleManifest {
        BundleManifest {
            model_id: self.model_id.clone(),
            dim: self.dim,
            count: self.count(),
            dtype: "f32".into(),
            byte_order: "little".into(),
            labels: self.labels.clone(),
            checksum: self.checksum.clone(),
        }
    }
}

/// Resolves `<prefix>`, `<prefix>.manifest.json` or `<prefix>.f32` to the two
/// bundle file paths.
pub fn bundle_paths(path: impl AsRef<Path>) -> (PathBuf, PathBuf) {
    let raw = path.as_ref().to_string_lossy().into_owned();
    let prefix = raw
        .strip_suffix(".manifest.json")
        .or_else(|| raw.strip_suffix(".f32"))
        .unwrap_or(&raw)
        .to_string();
    (
        PathBuf::from(format!("{prefix}.manifest.json")),
        PathBuf::from(format!("{prefix}.f32")),
    )
}

pub fn read_bundle(path: impl AsRef<Path>) -> Result<EmbeddingBundle> {
    let (manifest_path, matrix_path) = bundle_paths(path);
    let manifest: BundleManifest = serde_json::from_slice(&fs::read(&manifest_path)?)?;
    if manifest.dtype != "f32" {
        return Err(Error::Bundle(format!("unsupported dtype {:?}", manifest.dtype)));
    }
    if manifest.byte_order != "little" {
        return Err(Error::Bundle(format!(
            "unsupported byte order {:?}",
            manifest.byte_order
        )));
    }
    if manifest.count != manifest.labels.len() {
        return Err(Error::Bundle(format!(
            "manifest count {} disagrees with {} labels",
            manifest.count,
            manifest.labels.len()
        )));
    }
    let bytes = fs::read(&matrix_path)?;
    let expected = manifest.count * manifest.dim * 4;
    if bytes.len() != expected {
        return Err(Error::Bundle(format!(
            "matrix file has {} bytes, manifest implies {} ({} × {} × 4)",
            bytes.len(),
            expected,
            manifest.count,
            manifest.dim
        )));
    }
    let matrix: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let bundle = EmbeddingBundle {
        model_id: manifest.model_id,
        dim: manifest.dim,
        labels: manifest.labels,
        matrix,
        checksum: manifest.checksum,
    };
    bundle.validate()?;
    Ok(bundle)
}

pub fn write_bundle(bundle: &EmbeddingBundle, path: impl AsRef<Path>) -> Result<()> {
    bundle.validate()?;
    let (manifest_path, matrix_path) = bundle_paths(path);
    if let Some(parent) = manifest_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(&matrix_path, matrix_bytes(&bundle.matrix))?;
    let mut json = serde_json::to_string_pretty(&bundle.manifest())?;
    json.push('\n');
    fs::write(&manifest_path, json)?;
    Ok(())
}

/// A dataset with its embedding rows in item order.
#[derive(Debug, Clone)]
pub struct AlignedData<T> {
    pub dataset: Dataset,
    pub matrix: Array2<T>,
    /// Checksum of the bundle the rows came from.
    pub source_checksum: String,
}

impl<T: Real> AlignedData<T> {
    pub fn new(dataset: Dataset, matrix: Array2<T>, source_checksum: impl Into<String>) -> Result<Self> {
        if matrix.nrows() != dataset.len() {
            return Err(Error::Bundle(format!(
                "{} rows for {} items",
                matrix.nrows(),
                dataset.len()
            )));
        }
        Ok(AlignedData {
            dataset,
            matrix,
            source_checksum: source_checksum.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }

    /// Rows scaled to unit Euclidean length; zero rows are left as they are.
    pub fn normalized(&self) -> Self {
        let mut m = self.matrix.clone();
        for mut row in m.axis_iter_mut(Axis(0)) {
            let norm = row.iter().map(|&v| v * v).sum::<T>().sqrt();
            if norm > T::zero() {
                row.mapv_inplace(|v| v / norm);
            }
        }
        AlignedData {
            dataset: self.dataset.clone(),
            matrix: m,
            source_checksum: self.source_checksum.clone(),
        }
    }
}

/// Picks the bundle row for every dataset item, in dataset order.
pub fn align<T: Real>(dataset: &Dataset, bundle: &EmbeddingBundle) -> Result<AlignedData<T>> {
    let index: HashMap<&str, usize> = bundle
        .labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let missing: Vec<String> = dataset
        .items
        .iter()
        .filter(|i| !index.contains_key(i.label.as_str()))
        .map(|i| i.label.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingLabels(missing));
    }
    let matrix = Array2::from_shape_fn((dataset.len(), bundle.dim), |(r, c)| {
        let src = index[dataset.items[r].label.as_str()];
        T::lit(f64::from(bundle.matrix[src * bundle.dim + c]))
    });
    AlignedData::new(dataset.clone(), matrix, bundle.checksum.clone())
}

/// Parses a text embedding file: one row per line, `label<TAB>v1 v2 …`, or
/// `label v1 v2 …` when the line has no tab. Blank lines and lines starting
/// with `#` are skipped.
pub fn parse_text_embeddings(text: &str, model_id: &str, path: &Path) -> Result<EmbeddingBundle> {
    let mut labels = Vec::new();
    let mut matrix = Vec::new();
    let mut dim = None;
    for (i, line) in text.lines().enumerate() {
        let parse_err = |message: String| Error::Parse { path: path.to_path_buf(), line: i as u64 + 1, message };
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (label, rest) = match line.split_once('\t') {
            Some((l, r)) => (l.trim(), r),
            None => line.trim().split_once(char::is_whitespace).ok_or_else(|| parse_err("no values".into()))?,
        };
        let row: Vec<f32> = rest
            .split_whitespace()
            .map(|v| v.parse::<f32>().map_err(|_| parse_err(format!("not a number: {v:?}"))))
            .collect::<Result<_>>()?;
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(parse_err(format!("{} values, earlier rows have {d}", row.len())));
            }
            _ => {}
        }
        labels.push(label.to_string());
        matrix.extend(row);
    }
    EmbeddingBundle::new(model_id, labels, dim.unwrap_or(0), matrix)
}

/// A deterministic stand-in for real encoder output: every category gets a
/// random centre, items scatter around it, and sequenced items advance along
/// a per-branch direction in sequence order.
pub fn synthetic_bundle(dataset: &Dataset, dim: usize, seed: u64) -> Result<EmbeddingBundle> {
    if dim == 0 {
        return Err(Error::param("dim must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = |scale: f64| -> Vec<f64> { (0..dim).map(|_| rng.random_range(-1.0..1.0) * scale).collect() };
    let mut centres: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut directions: BTreeMap<(&str, Option<&str>), Vec<f64>> = BTreeMap::new();
    for item in &dataset.items {
        centres.entry(&item.category).or_insert_with(|| unit(4.0));
        if item.sequence_index.is_some() {
            directions.entry((&item.category, item.network_root.as_deref())).or_insert_with(|| unit(1.0));
        }
    }
    let mut matrix = Vec::with_capacity(dataset.len() * dim);
    for item in &dataset.items {
        let noise = unit(0.5);
        let centre = &centres[item.category.as_str()];
        let step = item.sequence_index.map(|s| {
            (s as f64, &directions[&(item.category.as_str(), item.network_root.as_deref())])
        });
        for k in 0..dim {
            let along = step.map_or(0.0, |(s, d)| s * d[k]);
            matrix.push((centre[k] + noise[k] + along) as f32);
        }
    }
    let labels = dataset.items.iter().map(|i| i.label.clone()).collect();
    EmbeddingBundle::new(format!("synthetic-{dim}d-seed{seed}"), labels, dim, matrix)
}
