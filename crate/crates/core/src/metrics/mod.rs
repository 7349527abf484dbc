//! Geometric metrics over a projection, and the assembled [`MetricsReport`].

pub mod branch;
pub mod chisq;
pub mod cluster;
pub mod graph;
pub mod hull;
pub mod rank;
pub mod void;

pub use branch::{branch_linearity, discover_branches, BranchLinearity, BranchSpec};
pub use chisq::{spatial_chi_square, ChiSquare};
pub use cluster::{davies_bouldin, intra_cluster_distance, language_coherence, silhouette, IntraCluster};
pub use graph::{connectivity_graph_stats, connectivity_knn_stats, graph_stats, ConnectivityStats};
pub use hull::{convex_hull, convex_hull_areas, polygon_area, HullAreas};
pub use rank::{average_ranks, global_preservation, spearman};
pub use void::{void_analysis, VoidAnalysis, VoidRegion};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::embedding::AlignedData;
use crate::error::{Error, Result};
use crate::projection::{MethodId, Projection};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphMode {
    /// Join pairs within `radius_fraction × max distance`.
    #[default]
    Epsilon,
    /// Symmetric k-nearest-neighbour graph with `graph_k`.
    Knn,
}

/// Where silhouette and Davies–Bouldin are measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterSpace {
    #[default]
    Projection,
    Embedding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    pub graph_mode: GraphMode,
    pub radius_fraction: f64,
    pub graph_k: usize,
    pub grid_resolution: usize,
    pub radius_multiplier: f64,
    pub coherence_k: usize,
    pub chi_cells_per_axis: usize,
    pub cluster_space: ClusterSpace,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            graph_mode: GraphMode::Epsilon,
            radius_fraction: 1.0,
            graph_k: 10,
            grid_resolution: 50,
            radius_multiplier: 2.0,
            coherence_k: 10,
            chi_cells_per_axis: 2,
            cluster_space: ClusterSpace::Projection,
        }
    }
}

/// A metric value, or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Metric<V> {
    Value(V),
    Absent { absent: String },
}

impl<V> Metric<V> {
    pub fn absent(reason: impl Into<String>) -> Self {
        Metric::Absent { absent: reason.into() }
    }

    pub fn value(&self) -> Option<&V> {
        match self {
            Metric::Value(v) => Some(v),
            Metric::Absent { .. } => None,
        }
    }

    pub fn is_present(&self) -> bool {
        matches!(self, Metric::Value(_))
    }

    fn map<W>(&self, f: impl FnOnce(&V) -> W) -> Metric<W> {
        match self {
            Metric::Value(v) => Metric::Value(f(v)),
            Metric::Absent { absent } => Metric::absent(absent.clone()),
        }
    }
}

impl<T: Real> Metric<T> {
    fn real(r: Result<T>) -> Self {
        match r {
            Ok(v) if v.is_finite() => Metric::Value(v),
            Ok(v) => Metric::absent(format!("non-finite value {v}")),
            Err(e) => Metric::absent(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchEntry<T> {
    pub name: String,
    pub size: usize,
    pub linearity: Metric<BranchLinearity<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoidSummary<T> {
    pub cells: usize,
    pub area: T,
    pub mean_distance_to_nearest_point: T,
    pub centroid: (T, T),
}

/// The full metric battery for one projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport<T> {
    pub silhouette: Metric<T>,
    pub davies_bouldin: Metric<T>,
    pub language_coherence: Metric<T>,
    pub connected_components: Metric<usize>,
    pub total_edges: Metric<usize>,
    pub clustering_coefficient: Metric<T>,
    pub graph_density: Metric<T>,
    pub density_mean: Metric<T>,
    pub density_std: Metric<T>,
    pub mean_hull_area: Metric<T>,
    pub total_hull_area: Metric<T>,
    /// Mean branch variance ratio (the headline linearity).
    pub linearity_score: Metric<T>,
    /// Mean |ρ| over branches.
    pub spearman_linearity: Metric<T>,
    pub void_count: Metric<usize>,
    pub mean_void_distance: Metric<T>,
    pub total_void_area: Metric<T>,
    pub chi_square_p: Metric<T>,
    pub global_preservation: Metric<T>,
    pub intra_cluster_distance_mean: Metric<T>,

    pub n: usize,
    pub dataset_id: String,
    pub method: MethodId,
    pub projection_checksum: String,
    pub config: MetricsConfig,
    pub branches: Vec<BranchEntry<T>>,
    pub hull_areas: BTreeMap<String, T>,
    pub intra_cluster_distance: BTreeMap<String, T>,
    /// Mean pairwise distance per item class.
    pub intra_class_distance: BTreeMap<String, T>,
    pub voids: Vec<VoidSummary<T>>,
    pub warnings: Vec<String>,
}

/// Report over aligned data: global preservation uses `data.matrix`.
pub fn full_report<T: Real>(
    data: &AlignedData<T>,
    projection: &Projection<T>,
    config: &MetricsConfig,
) -> Result<MetricsReport<T>> {
    report_for(&data.dataset, Some(data.matrix.view()), projection, config)
}

/// Report over a dataset whose items match `projection.labels` in order.
/// Without `high`, embedding-space metrics are reported absent.
pub fn report_for<T: Real>(
    dataset: &Dataset,
    high: Option<ArrayView2<'_, T>>,
    projection: &Projection<T>,
    config: &MetricsConfig,
) -> Result<MetricsReport<T>> {
    let labels = dataset.labels();
    if labels.len() != projection.labels.len() || labels.iter().zip(&projection.labels).any(|(a, b)| *a != b) {
        return Err(Error::Validation(format!(
            "projection rows do not match the items of dataset {}",
            dataset.id
        )));
    }
    if let Some(h) = high {
        if h.nrows() != dataset.len() {
            return Err(Error::param("embedding rows do not match dataset items"));
        }
    }
    let coords = projection.coords.view();
    let n = dataset.len();
    let categories: Vec<&str> = dataset.items.iter().map(|i| i.category.as_str()).collect();
    let classes: Vec<&str> = dataset.items.iter().map(|i| i.item_class.as_str()).collect();
    let languages: Vec<&str> = dataset.items.iter().map(|i| i.language.as_str()).collect();
    let mut warnings = projection.warnings.clone();

    let cluster_coords = match (config.cluster_space, high) {
        (ClusterSpace::Projection, _) => Ok(coords),
        (ClusterSpace::Embedding, Some(h)) => Ok(h),
        (ClusterSpace::Embedding, None) => Err("no embedding matrix supplied"),
    };
    let (silhouette_m, davies_bouldin_m) = match cluster_coords {
        Ok(c) => (
            Metric::real(silhouette(c, &categories)),
            Metric::real(davies_bouldin(c, &categories)),
        ),
        Err(reason) => (Metric::absent(reason), Metric::absent(reason)),
    };

    let coherence_k = config.coherence_k.min(n.saturating_sub(1));
    if coherence_k < config.coherence_k {
        warnings.push(format!("coherence k lowered from {} to {coherence_k} (n = {n})", config.coherence_k));
    }
    let language_coherence_m = Metric::real(language_coherence(coords, &languages, coherence_k));

    let graph = match config.graph_mode {
        GraphMode::Epsilon => connectivity_graph_stats(coords, config.radius_fraction),
        GraphMode::Knn => connectivity_knn_stats(coords, config.graph_k),
    };
    let graph: Metric<ConnectivityStats<T>> = match graph {
        Ok(g) => Metric::Value(g),
        Err(e) => Metric::absent(e.to_string()),
    };

    let (hull_areas, mean_hull_area, total_hull_area) = match convex_hull_areas(coords, &categories) {
        Ok(h) => (h.per_label, Metric::Value(h.mean_hull_area), Metric::Value(h.total_hull_area)),
        Err(e) => (BTreeMap::new(), Metric::absent(e.to_string()), Metric::absent(e.to_string())),
    };

    let branches: Vec<BranchEntry<T>> = discover_branches(dataset)
        .into_iter()
        .map(|b| BranchEntry {
            size: b.indices.len(),
            linearity: match branch_linearity(coords, &b) {
                Ok(l) => Metric::Value(l),
                Err(e) => Metric::absent(e.to_string()),
            },
            name: b.name,
        })
        .collect();
    let measured: Vec<&BranchLinearity<T>> = branches.iter().filter_map(|b| b.linearity.value()).collect();
    let (linearity_score, spearman_linearity) = if measured.is_empty() {
        let reason = if branches.is_empty() {
            "no sequenced branch with at least 3 items"
        } else {
            "no branch could be measured"
        };
        (Metric::absent(reason), Metric::absent(reason))
    } else {
        let m = T::from_usize_lossy(measured.len());
        (
            Metric::Value(measured.iter().map(|b| b.variance_ratio).sum::<T>() / m),
            Metric::Value(measured.iter().map(|b| b.spearman.abs()).sum::<T>() / m),
        )
    };

    let voids = void_analysis(coords, config.grid_resolution, config.radius_multiplier);
    let (void_count, mean_void_distance, total_void_area, void_summaries) = match voids {
        Ok(v) => (
            Metric::Value(v.void_count),
            Metric::Value(v.mean_void_distance),
            Metric::Value(v.total_void_area),
            v.voids
                .iter()
                .map(|r| VoidSummary {
                    cells: r.cell_indices.len(),
                    area: r.area,
                    mean_distance_to_nearest_point: r.mean_distance_to_nearest_point,
                    centroid: r.centroid,
                })
                .collect(),
        ),
        Err(e) => {
            let reason = e.to_string();
            (Metric::absent(&reason), Metric::absent(&reason), Metric::absent(&reason), Vec::new())
        }
    };

    let chi_square_p = match spatial_chi_square(coords, config.chi_cells_per_axis) {
        Ok(c) => Metric::Value(T::lit(c.p_value)),
        Err(e) => Metric::absent(e.to_string()),
    };

    let global = match high {
        Some(h) => Metric::real(global_preservation(h, coords)),
        None => Metric::absent("no embedding matrix supplied"),
    };

    let (intra_cluster, intra_mean) = match intra_cluster_distance(coords, &categories) {
        Ok(r) => {
            warnings.extend(r.warnings);
            (r.per_label, Metric::Value(r.overall))
        }
        Err(e) => (BTreeMap::new(), Metric::absent(e.to_string())),
    };
    let intra_class = intra_cluster_distance(coords, &classes)
        .map(|r| r.per_label)
        .unwrap_or_default();

    Ok(MetricsReport {
        silhouette: silhouette_m,
        davies_bouldin: davies_bouldin_m,
        language_coherence: language_coherence_m,
        connected_components: graph.map(|g| g.connected_components),
        total_edges: graph.map(|g| g.total_edges),
        clustering_coefficient: graph.map(|g| g.clustering_coefficient),
        graph_density: graph.map(|g| g.graph_density),
        density_mean: graph.map(|g| g.density_mean),
        density_std: graph.map(|g| g.density_std),
        mean_hull_area,
        total_hull_area,
        linearity_score,
        spearman_linearity,
        void_count,
        mean_void_distance,
        total_void_area,
        chi_square_p,
        global_preservation: global,
        intra_cluster_distance_mean: intra_mean,
        n,
        dataset_id: dataset.id.clone(),
        method: projection.method,
        projection_checksum: projection.checksum()?,
        config: config.clone(),
        branches,
        hull_areas,
        intra_cluster_distance: intra_cluster,
        intra_class_distance: intra_class,
        voids: void_summaries,
        warnings,
    })
}

fn flat<V: std::fmt::Display>(out: &mut String, key: &str, m: &Metric<V>) {
    match m {
        Metric::Value(v) => writeln!(out, "{key}={v}"),
        Metric::Absent { absent } => writeln!(out, "{key}=absent:{}", absent.replace('\n', " ")),
    }
    .expect("write to string");
}

impl<T: Real> MetricsReport<T> {
    /// One `key=value` line per metric (`key=absent:<reason>` when missing),
    /// then the identifying fields and the configuration.
    pub fn to_flat_text(&self) -> String {
        let mut s = String::new();
        flat(&mut s, "silhouette", &self.silhouette);
        flat(&mut s, "davies_bouldin", &self.davies_bouldin);
        flat(&mut s, "language_coherence", &self.language_coherence);
        flat(&mut s, "connected_components", &self.connected_components);
        flat(&mut s, "total_edges", &self.total_edges);
        flat(&mut s, "clustering_coefficient", &self.clustering_coefficient);
        flat(&mut s, "graph_density", &self.graph_density);
        flat(&mut s, "density_mean", &self.density_mean);
        flat(&mut s, "density_std", &self.density_std);
        flat(&mut s, "mean_hull_area", &self.mean_hull_area);
        flat(&mut s, "total_hull_area", &self.total_hull_area);
        flat(&mut s, "linearity_score", &self.linearity_score);
        flat(&mut s, "spearman_linearity", &self.spearman_linearity);
        flat(&mut s, "void_count", &self.void_count);
        flat(&mut s, "mean_void_distance", &self.mean_void_distance);
        flat(&mut s, "total_void_area", &self.total_void_area);
        flat(&mut s, "chi_square_p", &self.chi_square_p);
        flat(&mut s, "global_preservation", &self.global_preservation);
        flat(&mut s, "intra_cluster_distance_mean", &self.intra_cluster_distance_mean);
        let c = &self.config;
        let _ = write!(
            s,
            "n={}\ndataset_id={}\nmethod={}\nprojection_checksum={}\n\
             config.graph_mode={}\nconfig.radius_fraction={}\nconfig.graph_k={}\n\
             config.grid_resolution={}\nconfig.radius_multiplier={}\nconfig.coherence_k={}\n\
             config.chi_cells_per_axis={}\nconfig.cluster_space={}\n",
            self.n,
            self.dataset_id,
            self.method,
            self.projection_checksum,
            match c.graph_mode {
                GraphMode::Epsilon => "epsilon",
                GraphMode::Knn => "knn",
            },
            c.radius_fraction,
            c.graph_k,
            c.grid_resolution,
            c.radius_multiplier,
            c.coherence_k,
            c.chi_cells_per_axis,
            match c.cluster_space {
                ClusterSpace::Projection => "projection",
                ClusterSpace::Embedding => "embedding",
            },
        );
        s
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
