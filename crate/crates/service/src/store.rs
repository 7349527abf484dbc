//! Read-only registry of datasets and embedding bundles.

use std::fs;
use std::path::Path;

use semgeo::embedding::read_bundle;
use semgeo::shipped::{bundles_dir, load_all};
use semgeo::{Dataset, EmbeddingBundle, Result};

#[derive(Debug, Clone, Default)]
pub struct Store {
    datasets: Vec<Dataset>,
    bundles: Vec<(String, EmbeddingBundle)>,
}

impl Store {
    pub fn new(datasets: Vec<Dataset>, bundles: Vec<(String, EmbeddingBundle)>) -> Self {
        Store { datasets, bundles }
    }

    /// Datasets from `data_dir/datasets/*.csv` and bundles from
    /// `data_dir/bundles/*.manifest.json` (bundle id = file prefix).
    pub fn load(data_dir: &Path) -> Result<Self> {
        let datasets = load_all(data_dir)?;
        let mut bundles = Vec::new();
        if let Ok(entries) = fs::read_dir(bundles_dir(data_dir)) {
            let mut manifests: Vec<_> = entries
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.to_string_lossy().ends_with(".manifest.json"))
                .collect();
            manifests.sort();
            for path in manifests {
                let name = path.file_name().unwrap_or_default().to_string_lossy();
                let id = name.trim_end_matches(".manifest.json").to_string();
                bundles.push((id, read_bundle(&path)?));
            }
        }
        log::info!("store: {} datasets, {} bundles", datasets.len(), bundles.len());
        Ok(Store { datasets, bundles })
    }

    pub fn datasets(&self) -> &[Dataset] {
        &self.datasets
    }

    pub fn dataset(&self, id: &str) -> Option<&Dataset> {
        self.datasets.iter().find(|d| d.id == id)
    }

    pub fn bundles(&self) -> impl Iterator<Item = (&str, &EmbeddingBundle)> {
        self.bundles.iter().map(|(id, b)| (id.as_str(), b))
    }

    pub fn bundle(&self, id: &str) -> Option<&EmbeddingBundle> {
        self.bundles.iter().find(|(i, _)| i == id).map(|(_, b)| b)
    }
}
