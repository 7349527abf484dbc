//! Manifold projections (PHATE and baselines) and geometric metrics for
//! labeled embedding sets.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below are what the CLI and service use.

pub mod baselines;
pub mod compare;
pub mod dataset;
pub mod embedding;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod phate;
pub mod plot;
pub mod projection;
pub mod scalar;
pub mod shipped;

pub use baselines::{cmds_project, pca_project, spectral_project};
pub use compare::{export_comparison, rank_methods, run_matrix, CellOutcome, ComparisonCell, MethodScore, RankWeights};
pub use dataset::{apply_filter, load_dataset, partition_by_class, save_dataset, Dataset, FilterSpec, ItemClass, LexicalItem};
pub use embedding::{align, parse_text_embeddings, read_bundle, synthetic_bundle, write_bundle, AlignedData, EmbeddingBundle};
pub use error::{Error, Result};
pub use metrics::{full_report, report_for, Metric, MetricsConfig, MetricsReport};
pub use phate::{phate_project, select_t_entropy, DiffusionOperator, MdsInit, PhateParams};
pub use plot::plot_svg;
pub use projection::{export_projection, import_projection, project, MethodId, MethodParams, Projection};
pub use scalar::Real;

pub type Projection64 = Projection<f64>;
pub type Projection32 = Projection<f32>;
pub type AlignedData64 = AlignedData<f64>;
pub type AlignedData32 = AlignedData<f32>;
pub type MetricsReport64 = MetricsReport<f64>;
pub type MetricsReport32 = MetricsReport<f32>;
pub type ComparisonCell64 = ComparisonCell<f64>;
pub type DiffusionOperator64 = DiffusionOperator<f64>;
