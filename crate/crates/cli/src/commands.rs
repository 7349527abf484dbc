use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use semgeo::linalg::pairwise_distances;
use semgeo::metrics::{ClusterSpace, GraphMode};
use semgeo::shipped::{bundles_dir, dataset_path, default_data_dir, load_shipped};
use semgeo::{
    align, apply_filter, export_comparison, export_projection, full_report, import_projection, load_dataset,
    parse_text_embeddings, plot_svg, project, rank_methods, read_bundle, report_for, run_matrix,
    select_t_entropy, synthetic_bundle, write_bundle, AlignedData64, Dataset, DiffusionOperator64,
    EmbeddingBundle, FilterSpec, ItemClass, MdsInit, MethodId, MethodParams, MetricsConfig, PhateParams,
    Projection64, RankWeights,
};
use semgeo_service::ServiceConfig;

use crate::{
    Cli, CliError, Command, CompareArgs, FilterArgs, FormatArg, GraphArg, IngestArgs, InitArg, MetricArgs,
    MetricsArgs, PhateArgs, PlotArgs, ProjectArgs, ServeArgs,
};

type Result<T> = std::result::Result<T, CliError>;

/// Candidate diffusion times for `--t auto`.
const AUTO_T_RANGE: std::ops::RangeInclusive<usize> = 1..=100;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn run(cli: Cli) -> Result<()> {
    let data_dir = cli.data_dir.unwrap_or_else(default_data_dir);
    match cli.command {
        Command::Ingest(a) => ingest(&data_dir, a),
        Command::Project(a) => project_cmd(&data_dir, a),
        Command::Metrics(a) => metrics_cmd(&data_dir, a),
        Command::Compare(a) => compare_cmd(&data_dir, a),
        Command::Plot(a) => plot_cmd(&data_dir, a),
        Command::Serve(a) => serve_cmd(data_dir, a),
    }
}

/// A dataset CSV path, or the id of a dataset under `data_dir/datasets`.
/// `zinets.csv` that does not exist locally falls back to the shipped file.
fn resolve_dataset(data_dir: &Path, arg: &str) -> Result<Dataset> {
    let path = Path::new(arg);
    if path.is_file() {
        return Ok(load_dataset(path)?);
    }
    let id = arg.strip_suffix(".csv").unwrap_or(arg);
    if !id.contains(['/', '\\']) && dataset_path(data_dir, id).is_file() {
        return Ok(load_shipped(data_dir, id)?);
    }
    Err(CliError::Io(std::io::Error::new(
        std::io::ErrorKind::NotFound,
        format!("dataset {arg:?} is neither a file nor a dataset under {}", data_dir.display()),
    )))
}

/// A bundle prefix (or manifest/matrix path), or a bundle id under
/// `data_dir/bundles`.
fn resolve_bundle(data_dir: &Path, arg: &str) -> Result<EmbeddingBundle> {
    let (manifest, _) = semgeo::embedding::bundle_paths(arg);
    if manifest.is_file() {
        return Ok(read_bundle(arg)?);
    }
    let shipped = bundles_dir(data_dir).join(arg);
    let (manifest, _) = semgeo::embedding::bundle_paths(&shipped);
    if !arg.contains(['/', '\\']) && manifest.is_file() {
        return Ok(read_bundle(shipped)?);
    }
    Err(CliError::Io(std::io::Error::new(
        std::io::ErrorKind::NotFound,
        format!("bundle {arg:?} is neither a bundle prefix nor a bundle under {}", bundles_dir(data_dir).display()),
    )))
}

fn filter_spec(args: &FilterArgs) -> Result<FilterSpec> {
    let mut spec = FilterSpec::all();
    if !args.classes.is_empty() {
        spec.include_classes = args
            .classes
            .iter()
            .map(|c| c.parse::<ItemClass>().map_err(usage))
            .collect::<Result<BTreeSet<_>>>()?;
    }
    if !args.categories.is_empty() {
        spec.include_categories = Some(args.categories.iter().cloned().collect());
    }
    if !args.languages.is_empty() {
        spec.include_languages = Some(args.languages.iter().cloned().collect());
    }
    Ok(spec)
}

fn aligned(dataset: &Dataset, bundle: &EmbeddingBundle, normalize: bool) -> Result<AlignedData64> {
    let data: AlignedData64 = align(dataset, bundle)?;
    Ok(if normalize { data.normalized() } else { data })
}

fn metrics_config(args: &MetricArgs) -> MetricsConfig {
    MetricsConfig {
        graph_mode: match args.graph_mode {
            GraphArg::Epsilon => GraphMode::Epsilon,
            GraphArg::Knn => GraphMode::Knn,
        },
        radius_fraction: args.radius_fraction,
        graph_k: args.graph_k,
        grid_resolution: args.grid_resolution,
        radius_multiplier: args.radius_multiplier,
        coherence_k: args.coherence_k,
        chi_cells_per_axis: args.chi_cells,
        cluster_space: if args.cluster_in_embedding { ClusterSpace::Embedding } else { ClusterSpace::Projection },
    }
}

fn write_output(out: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(out, contents)?;
    Ok(())
}

fn ingest(data_dir: &Path, a: IngestArgs) -> Result<()> {
    let dataset = resolve_dataset(data_dir, &a.dataset)?;
    let (bundle, out): (EmbeddingBundle, Option<PathBuf>) = if let Some(b) = &a.bundle {
        (resolve_bundle(data_dir, b)?, None)
    } else if let Some(text_path) = &a.from_text {
        let out = a.out.clone().ok_or_else(|| usage("--from-text needs --out <PREFIX>"))?;
        let text = fs::read_to_string(text_path)?;
        (parse_text_embeddings(&text, &a.model_id, text_path)?, Some(out))
    } else if a.synthetic {
        let out = a.out.clone().ok_or_else(|| usage("--synthetic needs --out <PREFIX>"))?;
        (synthetic_bundle(&dataset, a.dim, a.seed)?, Some(out))
    } else {
        return Err(usage("ingest needs one of --bundle, --from-text or --synthetic"));
    };
    // Alignment is the check: every dataset label must have a row.
    let data: AlignedData64 = align(&dataset, &bundle)?;
    if let Some(out) = out {
        if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        write_bundle(&bundle, &out)?;
        log::info!("wrote bundle {}", out.display());
    }
    println!(
        "dataset={} items={} bundle_rows={} dim={} model_id={} checksum={}",
        dataset.id,
        data.len(),
        bundle.count(),
        bundle.dim,
        bundle.model_id,
        bundle.checksum
    );
    Ok(())
}

fn parse_t(raw: &str) -> Result<Option<usize>> {
    if raw == "auto" {
        return Ok(None);
    }
    raw.parse::<usize>()
        .map(Some)
        .map_err(|_| usage(format!("--t expects a positive integer or `auto`, got {raw:?}")))
}

fn phate_params(args: &PhateArgs, data: &AlignedData64) -> Result<PhateParams> {
    let mut params = PhateParams {
        k: args.k,
        alpha: args.alpha,
        t: 1,
        out_dims: args.out_dims,
        seed: args.seed,
        mds_max_iter: args.mds_max_iter,
        mds_tol: args.mds_tol,
        mds_init: match args.mds_init {
            InitArg::Classical => MdsInit::Classical,
            InitArg::Random => MdsInit::Random,
        },
        ..PhateParams::default()
    };
    params.t = match parse_t(&args.t)? {
        Some(t) => t,
        None => {
            params.validate(data.len())?;
            let d = pairwise_distances(data.matrix.view())?;
            let op = DiffusionOperator64::from_distances(d.view(), params.k, params.alpha)?;
            let t = select_t_entropy(&op, &AUTO_T_RANGE.collect::<Vec<_>>())?;
            log::info!("entropy knee selected t = {t}");
            t
        }
    };
    Ok(params)
}

fn project_cmd(data_dir: &Path, a: ProjectArgs) -> Result<()> {
    parse_t(&a.phate.t)?;
    let filter = filter_spec(&a.filter)?;
    let dataset = apply_filter(&resolve_dataset(data_dir, &a.dataset)?, &filter)?;
    let bundle = resolve_bundle(data_dir, &a.bundle)?;
    let data = aligned(&dataset, &bundle, a.normalize_embeddings)?;
    let base = phate_params(&a.phate, &data)?;
    let params = MethodParams::for_method(a.method, &base);
    params.validate(data.len())?;
    let projection = project(&data, &params)?;
    export_projection(&projection, &a.out)?;
    for w in &projection.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "method={} dataset={} items={} out_dims={} stress={} out={}",
        projection.method,
        projection.dataset_id,
        projection.len(),
        projection.out_dims(),
        projection.stress.map_or_else(|| "-".to_string(), |s| format!("{s:.6}")),
        a.out.display()
    );
    Ok(())
}

fn metrics_cmd(data_dir: &Path, a: MetricsArgs) -> Result<()> {
    let config = metrics_config(&a.metrics);
    if config.cluster_space == ClusterSpace::Embedding && a.bundle.is_none() {
        return Err(usage("--cluster-in-embedding needs --bundle"));
    }
    let projection: Projection64 = import_projection(&a.projection)?;
    let dataset = resolve_dataset(data_dir, &a.dataset)?.restrict_to(&projection.labels)?;
    let report = match &a.bundle {
        Some(b) => {
            let bundle = resolve_bundle(data_dir, b)?;
            let data = aligned(&dataset, &bundle, a.normalize_embeddings)?;
            full_report(&data, &projection, &config)?
        }
        None => report_for(&dataset, None, &projection, &config)?,
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let text = match a.format {
        FormatArg::Text => report.to_flat_text(),
        FormatArg::Json => report.to_json()?,
    };
    match &a.out {
        Some(out) => write_output(out, &text),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn compare_cmd(data_dir: &Path, a: CompareArgs) -> Result<()> {
    if a.dataset.len() != a.bundle.len() {
        return Err(usage(format!(
            "got {} --dataset but {} --bundle; they pair up in order",
            a.dataset.len(),
            a.bundle.len()
        )));
    }
    let weights = RankWeights { silhouette: a.weights[0], branch: a.weights[1], global: a.weights[2] };
    let filter = filter_spec(&a.filter)?;
    let grid: Vec<PhateParams> = match &a.param_grid {
        Some(path) => {
            let grid: Vec<PhateParams> = serde_json::from_slice(&fs::read(path)?)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            grid
        }
        None => {
            let base = PhateParams { out_dims: a.out_dims, ..PhateParams::default() };
            let ks = if a.k.is_empty() { vec![base.k] } else { a.k.clone() };
            let ts = if a.t.is_empty() { vec![base.t] } else { a.t.clone() };
            let mut grid = Vec::with_capacity(ks.len() * ts.len());
            for &k in &ks {
                for &t in &ts {
                    grid.push(PhateParams { k, t, ..base.clone() });
                }
            }
            grid
        }
    };
    let methods = if a.methods.is_empty() { MethodId::ALL.to_vec() } else { a.methods.clone() };
    let inputs = a
        .dataset
        .iter()
        .zip(&a.bundle)
        .map(|(d, b)| {
            let dataset = apply_filter(&resolve_dataset(data_dir, d)?, &filter)?;
            aligned(&dataset, &resolve_bundle(data_dir, b)?, a.normalize_embeddings)
        })
        .collect::<Result<Vec<_>>>()?;
    let cells = run_matrix(&inputs, &methods, &grid, &metrics_config(&a.metrics))?;
    export_comparison(&cells, &a.out)?;
    let ranking = rank_methods(&cells, &weights);
    write_output(&a.out.join("ranking.json"), &serde_json::to_string_pretty(&ranking).map_err(semgeo::Error::from)?)?;
    for cell in cells.iter().filter(|c| c.report().is_none()) {
        eprintln!("warning: {} {} {}: {}", cell.dataset_id, cell.method, cell.params.hash(), cell.status());
    }
    for (rank, s) in ranking.iter().enumerate() {
        println!("{}. {} score={:.4}", rank + 1, s.method, s.score);
    }
    Ok(())
}

fn plot_cmd(data_dir: &Path, a: PlotArgs) -> Result<()> {
    let projection: Projection64 = import_projection(&a.projection)?;
    let dataset = resolve_dataset(data_dir, &a.dataset)?.restrict_to(&projection.labels)?;
    let svg = plot_svg(&projection, &dataset)?;
    write_output(&a.out, &svg)
}

fn serve_cmd(data_dir: PathBuf, a: ServeArgs) -> Result<()> {
    let config = ServiceConfig { data_dir, persist_dir: a.persist_dir, static_dir: a.static_dir };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(semgeo_service::serve(config, a.addr))?;
    Ok(())
}
