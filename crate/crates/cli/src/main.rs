//! `semgeo`: ingest embeddings, project, measure, compare, plot, serve.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or numeric error. Diagnostics
//! go to stderr; results go to files or stdout.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use semgeo::MethodId;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] semgeo::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) | CliError::Io(_) => 2,
        }
    }
}

fn parse_method(s: &str) -> Result<MethodId, String> {
    s.parse::<MethodId>().map_err(|e| match e {
        semgeo::Error::InvalidParameter(m) => m,
        other => other.to_string(),
    })
}

#[derive(Debug, Parser)]
#[command(name = "semgeo", version, about = "Manifold projections and geometric metrics for labeled embeddings")]
pub struct Cli {
    /// Data directory with datasets/ and bundles/ (default: $SEMGEO_DATA_DIR,
    /// else the repository's data/).
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or check an embedding bundle against a dataset.
    Ingest(IngestArgs),
    /// Project a dataset's embeddings to 2-D or 3-D.
    Project(ProjectArgs),
    /// Compute the metric report for an exported projection.
    Metrics(MetricsArgs),
    /// Run every method over datasets × parameter grid and rank them.
    Compare(CompareArgs),
    /// Render a 2-D projection as SVG.
    Plot(PlotArgs),
    /// Serve the HTTP API (and optionally the explorer's static files).
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Dataset CSV path or shipped dataset id.
    #[arg(long)]
    pub dataset: String,
    /// Existing bundle (prefix, manifest path or bundle id) to check.
    #[arg(long, conflicts_with_all = ["from_text", "synthetic"])]
    pub bundle: Option<String>,
    /// Text embeddings, one `label<TAB>v1 v2 …` row per line.
    #[arg(long, conflicts_with = "synthetic")]
    pub from_text: Option<PathBuf>,
    /// Generate a deterministic synthetic bundle for the dataset.
    #[arg(long)]
    pub synthetic: bool,
    /// Dimension of the synthetic bundle.
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Model id recorded for --from-text bundles.
    #[arg(long, default_value = "text-import")]
    pub model_id: String,
    /// Output bundle prefix (required with --from-text or --synthetic).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitArg {
    Classical,
    Random,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Keep only these item classes (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub classes: Vec<String>,
    /// Keep only these categories (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub categories: Vec<String>,
    /// Keep only these languages (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub languages: Vec<String>,
}

#[derive(Debug, Args)]
pub struct PhateArgs {
    /// Neighbours for the adaptive bandwidth (also spectral's k).
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 10.0)]
    pub alpha: f64,
    /// Diffusion time, or `auto` for the entropy knee.
    #[arg(long, default_value = "20")]
    pub t: String,
    #[arg(long, default_value_t = 2)]
    pub out_dims: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub mds_max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub mds_tol: f64,
    #[arg(long, value_enum, default_value = "classical")]
    pub mds_init: InitArg,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub dataset: String,
    #[arg(long)]
    pub bundle: String,
    /// phate, pca, cmds or spectral.
    #[arg(long, default_value = "phate", value_parser = parse_method)]
    pub method: MethodId,
    #[command(flatten)]
    pub phate: PhateArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// Scale embedding rows to unit length before computing distances.
    #[arg(long)]
    pub normalize_embeddings: bool,
    /// Output directory for projection.csv and projection.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GraphArg {
    Epsilon,
    Knn,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[arg(long, default_value_t = 1.0)]
    pub radius_fraction: f64,
    #[arg(long, value_enum, default_value = "epsilon")]
    pub graph_mode: GraphArg,
    #[arg(long, default_value_t = 10)]
    pub graph_k: usize,
    #[arg(long, default_value_t = 50)]
    pub grid_resolution: usize,
    #[arg(long, default_value_t = 2.0)]
    pub radius_multiplier: f64,
    #[arg(long, default_value_t = 10)]
    pub coherence_k: usize,
    #[arg(long, default_value_t = 2)]
    pub chi_cells: usize,
    /// Measure silhouette and Davies–Bouldin in the embedding space.
    #[arg(long)]
    pub cluster_in_embedding: bool,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Directory written by `project`.
    #[arg(long)]
    pub projection: PathBuf,
    #[arg(long)]
    pub dataset: String,
    /// Bundle for global preservation and embedding-space clustering.
    #[arg(long)]
    pub bundle: Option<String>,
    #[arg(long)]
    pub normalize_embeddings: bool,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[arg(long, value_enum, default_value = "text")]
    pub format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Datasets (repeatable); paired with --bundle in order.
    #[arg(long, required = true)]
    pub dataset: Vec<String>,
    #[arg(long, required = true)]
    pub bundle: Vec<String>,
    /// Methods to run (comma-separated; default all).
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    pub methods: Vec<MethodId>,
    /// JSON file holding an array of PHATE parameter records.
    #[arg(long, conflicts_with_all = ["k", "t"])]
    pub param_grid: Option<PathBuf>,
    /// Grid values for k (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    /// Grid values for t (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub out_dims: usize,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[arg(long)]
    pub normalize_embeddings: bool,
    #[command(flatten)]
    pub metrics: MetricArgs,
    /// Ranking weights for silhouette, branch linearity, global preservation.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 1.0, 1.0])]
    pub weights: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub projection: PathBuf,
    #[arg(long)]
    pub dataset: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: std::net::SocketAddr,
    /// Persist finished projection jobs here.
    #[arg(long)]
    pub persist_dir: Option<PathBuf>,
    /// Static explorer assets to serve at /.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
