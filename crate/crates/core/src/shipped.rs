//! Datasets shipped with the repository.

use std::env;
use std::path::{Path, PathBuf};

use crate::dataset::{load_dataset, Dataset};
use crate::error::{Error, Result};

/// Environment variable overriding [`default_data_dir`].
pub const DATA_DIR_ENV: &str = "SEMGEO_DATA_DIR";

/// Ids of the shipped datasets, in registry order.
pub const SHIPPED_IDS: [&str; 5] = ["ascii", "zinets", "yuanzi", "zi_family", "zi_network"];

/// Root data directory: `$SEMGEO_DATA_DIR` if set, else the repository's `data/`.
pub fn default_data_dir() -> PathBuf {
    match env::var_os(DATA_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"),
    }
}

pub fn datasets_dir(data_dir: &Path) -> PathBuf {
    data_dir.join("datasets")
}

pub fn bundles_dir(data_dir: &Path) -> PathBuf {
    data_dir.join("bundles")
}

pub fn dataset_path(data_dir: &Path, id: &str) -> PathBuf {
    datasets_dir(data_dir).join(format!("{id}.csv"))
}

/// Loads a shipped dataset by id from `data_dir`.
pub fn load_shipped(data_dir: &Path, id: &str) -> Result<Dataset> {
    let path = dataset_path(data_dir, id);
    if !path.is_file() {
        return Err(Error::Validation(format!(
            "no dataset {id:?} under {}",
            datasets_dir(data_dir).display()
        )));
    }
    load_dataset(path)
}

/// Every `*.csv` dataset in `data_dir/datasets`, shipped ids first, then the
/// rest sorted by id.
pub fn load_all(data_dir: &Path) -> Result<Vec<Dataset>> {
    let dir = datasets_dir(data_dir);
    let mut ids: Vec<String> = match std::fs::read_dir(&dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
            .collect(),
        Err(_) => Vec::new(),
    };
    ids.sort_by_key(|id| {
        (
            SHIPPED_IDS.iter().position(|s| s == id).unwrap_or(usize::MAX),
            id.clone(),
        )
    });
    ids.iter().map(|id| load_shipped(data_dir, id)).collect()
}
