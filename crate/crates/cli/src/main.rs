//! `graph-rerank`: feature extraction, rank tables, synthetic corpora,
//! reranking and evaluation from the command line.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use graph_rerank::corpus_io::{load_ground_truth, load_rank_table, synth_generate, write_atomic, NameMap, SynthSpec};
use graph_rerank::eval::{evaluate, per_query_tsv, reports_to_tsv, sweep_k, Metric};
use graph_rerank::features::{
    build_rank_table, image_descriptor, load_feature_matrix, load_ppm, DEFAULT_BINS_PER_CHANNEL,
    DEFAULT_SCALING_EXPONENT,
};
use graph_rerank::ranking::format_ranked_lists;
use graph_rerank::{
    build_directed_graph, build_undirected_graph, fuse_scaled, FeatureMatrix, FeatureSource, FusionInput, GraphParams,
    ImageId, Method, RankTable, RerankConfig, SelfMatch,
};
use rayon::prelude::*;

use config::{FileConfig, MethodArg, MetricArg, ScoreArg};

const DEFAULT_SWEEP: [usize; 5] = [5, 10, 20, 40, 60];

#[derive(Parser)]
#[command(name = "graph-rerank", version, about = "Rerank image-search results with per-query k-NN graphs")]
struct Cli {
    /// TOML file with default values for any flag; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// HSV color histograms for every image listed in a manifest.
    Features(FeaturesArgs),
    /// Exact Euclidean rank table from a feature matrix.
    Ranks(RanksArgs),
    /// Seeded synthetic corpus: features, rank tables and ground truth per space.
    Synth(SynthArgs),
    /// Reranked retrieval lists.
    Rerank(RerankArgs),
    /// Baseline and reranked scores against a ground truth.
    Eval(EvalArgs),
    /// Reranked scores over several neighborhood sizes.
    Sweep(SweepArgs),
    /// Edge list of one query's (fused) graph.
    GraphDump(GraphDumpArgs),
}

#[derive(Args)]
struct FeaturesArgs {
    /// One P6 image path per line, in id order; relative paths resolve against the manifest's directory.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Bins per HSV channel.
    #[arg(long)]
    bins: Option<usize>,
    /// Element-wise power applied after L1 normalization.
    #[arg(long)]
    exponent: Option<f64>,
    /// Also write an id-to-path name map here.
    #[arg(long)]
    names: Option<PathBuf>,
}

#[derive(Args)]
struct RanksArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    n_groups: Option<usize>,
    #[arg(long)]
    group_size: Option<usize>,
    #[arg(long)]
    dims: Option<usize>,
    #[arg(long)]
    n_spaces: Option<usize>,
    #[arg(long)]
    intra_spread: Option<f64>,
    #[arg(long)]
    inter_spread: Option<f64>,
    /// Probability that a group is coherent in each space.
    #[arg(long)]
    agreement: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TableArgs {
    /// Rank table; repeat to fuse features. The first table supplies initial lists and tie-breaks.
    #[arg(long = "table", required = true, value_name = "PATH")]
    tables: Vec<PathBuf>,
    /// Weight multiplier per table, in --table order.
    #[arg(long = "scale", value_name = "FACTOR")]
    scales: Vec<f64>,
}

#[derive(Args)]
struct GraphArgs {
    /// Decay base for hop distance from the query.
    #[arg(long)]
    alpha0: Option<f64>,
    /// Breadth-first hops explored from the query.
    #[arg(long)]
    depth: Option<usize>,
    /// Cap on graph size.
    #[arg(long)]
    max_nodes: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Candidate score: heaviest incoming edge or sum of them.
    #[arg(long, value_enum)]
    score: Option<ScoreArg>,
    /// Don't count an image as its own first neighbor.
    #[arg(long)]
    exclude_self: bool,
    /// Output list length (default: every other image).
    #[arg(long)]
    top: Option<usize>,
}

#[derive(Args)]
struct RerankArgs {
    #[command(flatten)]
    tables: TableArgs,
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    k: Option<usize>,
    /// Query id; repeat for several (default: all).
    #[arg(long = "query")]
    queries: Vec<u32>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    tables: TableArgs,
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    ground_truth: PathBuf,
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-query values go here.
    #[arg(long)]
    per_query: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    tables: TableArgs,
    #[command(flatten)]
    graph: GraphArgs,
    /// Comma-separated neighborhood sizes [default: 5,10,20,40,60].
    #[arg(long = "k", value_delimiter = ',')]
    k_values: Vec<usize>,
    #[arg(long)]
    ground_truth: PathBuf,
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    per_query: Option<PathBuf>,
}

#[derive(Args)]
struct GraphDumpArgs {
    #[command(flatten)]
    tables: TableArgs,
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    query: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Features(a) => cmd_features(&a, &file),
        Command::Ranks(a) => cmd_ranks(&a),
        Command::Synth(a) => cmd_synth(&a, &file),
        Command::Rerank(a) => cmd_rerank(&a, &file),
        Command::Eval(a) => cmd_eval(&a, &file),
        Command::Sweep(a) => cmd_sweep(&a, &file),
        Command::GraphDump(a) => cmd_graph_dump(&a, &file),
    }
}

/// `RERANK_THREADS` caps the worker pool; unset or 0 leaves it to rayon.
fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("RERANK_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("RERANK_THREADS={raw:?} is not a thread count"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    Ok(())
}

fn require_file(path: &Path) -> Result<()> {
    ensure!(path.is_file(), "{}: no such file", path.display());
    Ok(())
}

fn require_out_dir(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            bail!("{}: output directory does not exist", dir.display())
        }
        _ => Ok(()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => Ok(write_atomic(path, text.as_bytes())?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_features(a: &FeaturesArgs, file: &FileConfig) -> Result<()> {
    require_file(&a.manifest)?;
    require_out_dir(&a.out)?;
    if let Some(names) = &a.names {
        require_out_dir(names)?;
    }
    let bins = a.bins.or(file.bins).unwrap_or(DEFAULT_BINS_PER_CHANNEL);
    let exponent = a.exponent.or(file.exponent).unwrap_or(DEFAULT_SCALING_EXPONENT);
    let manifest = std::fs::read_to_string(&a.manifest)
        .with_context(|| format!("reading manifest {}", a.manifest.display()))?;
    let base = a.manifest.parent().unwrap_or(Path::new(""));
    let entries: Vec<&str> = manifest
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    ensure!(!entries.is_empty(), "{}: manifest lists no images", a.manifest.display());
    let paths: Vec<PathBuf> = entries.iter().map(|e| base.join(e)).collect();
    for p in &paths {
        require_file(p)?;
    }
    let rows = paths
        .par_iter()
        .map(|p| {
            let img = load_ppm(p)?;
            image_descriptor(&img, bins, exponent).with_context(|| format!("describing {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    let matrix = FeatureMatrix::new(rows)?;
    write_atomic(&a.out, matrix.to_text().as_bytes())?;
    if let Some(names) = &a.names {
        write_atomic(names, NameMap::from_names(entries).to_text().as_bytes())?;
    }
    Ok(())
}

fn cmd_ranks(a: &RanksArgs) -> Result<()> {
    require_file(&a.features)?;
    require_out_dir(&a.out)?;
    let features = load_feature_matrix(&a.features)?;
    let table = build_rank_table(&features)?;
    write_atomic(&a.out, table.to_text().as_bytes())?;
    Ok(())
}

fn cmd_synth(a: &SynthArgs, file: &FileConfig) -> Result<()> {
    let d = SynthSpec::default();
    let spec = SynthSpec {
        n_groups: a.n_groups.unwrap_or(d.n_groups),
        group_size: a.group_size.unwrap_or(d.group_size),
        dims: a.dims.unwrap_or(d.dims),
        n_spaces: a.n_spaces.unwrap_or(d.n_spaces),
        intra_spread: a.intra_spread.unwrap_or(d.intra_spread),
        inter_spread: a.inter_spread.unwrap_or(d.inter_spread),
        agreement: a.agreement.unwrap_or(d.agreement),
        seed: a.seed.or(file.seed).unwrap_or(d.seed),
    };
    spec.validate()?;
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let corpus = synth_generate(&spec)?;
    for (i, features) in corpus.spaces.iter().enumerate() {
        let table = build_rank_table(features)?;
        write_atomic(a.out_dir.join(format!("space{i}.features")), features.to_text().as_bytes())?;
        write_atomic(a.out_dir.join(format!("space{i}.ranks")), table.to_text().as_bytes())?;
    }
    write_atomic(a.out_dir.join("truth.txt"), corpus.ground_truth.to_text().as_bytes())?;
    Ok(())
}

struct LoadedTables {
    labels: Vec<String>,
    tables: Vec<RankTable>,
    scales: Vec<f64>,
}

impl LoadedTables {
    fn load(a: &TableArgs) -> Result<Self> {
        for p in &a.tables {
            require_file(p)?;
        }
        ensure!(
            a.scales.is_empty() || a.scales.len() == a.tables.len(),
            "{} --scale values for {} tables",
            a.scales.len(),
            a.tables.len()
        );
        let tables = a.tables.iter().map(load_rank_table).collect::<Result<Vec<_>, _>>()?;
        let mut labels: Vec<String> = Vec::new();
        for (i, p) in a.tables.iter().enumerate() {
            let stem = p.file_stem().map_or_else(|| format!("t{i}"), |s| s.to_string_lossy().into_owned());
            let label = if labels.contains(&stem) { format!("{stem}#{i}") } else { stem };
            labels.push(label);
        }
        let scales = if a.scales.is_empty() { vec![1.0; tables.len()] } else { a.scales.clone() };
        Ok(Self { labels, tables, scales })
    }

    fn sources(&self) -> Vec<FeatureSource<'_>> {
        self.labels
            .iter()
            .zip(&self.tables)
            .zip(&self.scales)
            .map(|((l, t), &s)| FeatureSource::new(l, t).scaled(s))
            .collect()
    }

    fn n(&self) -> usize {
        self.tables[0].len()
    }
}

fn rerank_config(g: &GraphArgs, k: Option<usize>, file: &FileConfig) -> RerankConfig {
    let d = GraphParams::default();
    let exclude = g.exclude_self || file.exclude_self.unwrap_or(false);
    RerankConfig {
        graph: GraphParams {
            k: k.or(file.k).unwrap_or(d.k),
            alpha0: g.alpha0.or(file.alpha0).unwrap_or(d.alpha0),
            depth: g.depth.or(file.depth).unwrap_or(d.depth),
            max_nodes: g.max_nodes.or(file.max_nodes),
            self_match: if exclude { SelfMatch::Excluded } else { SelfMatch::Included },
        },
        method: g.method.or(file.method).map(Into::into).unwrap_or_default(),
        score: g.score.or(file.score).map(Into::into).unwrap_or_default(),
        target_len: g.top.or(file.top),
    }
}

fn metric(flag: Option<MetricArg>, file: &FileConfig) -> Metric {
    flag.or(file.metric).map_or(Metric::Map, Into::into)
}

fn cmd_rerank(a: &RerankArgs, file: &FileConfig) -> Result<()> {
    if let Some(out) = &a.out {
        require_out_dir(out)?;
    }
    let loaded = LoadedTables::load(&a.tables)?;
    let config = rerank_config(&a.graph, a.k, file);
    let queries: Vec<ImageId> = if a.queries.is_empty() {
        loaded.tables[0].ids().collect()
    } else {
        a.queries.iter().copied().map(ImageId).collect()
    };
    let sources = loaded.sources();
    let lists = queries
        .par_iter()
        .map(|&q| graph_rerank::rerank(&sources, q, &config))
        .collect::<Result<Vec<_>, _>>()?;
    let header = format!("{} sources={}", config.describe(), loaded.labels.join(","));
    emit(a.out.as_deref(), &format_ranked_lists(&header, &lists))
}

fn cmd_eval(a: &EvalArgs, file: &FileConfig) -> Result<()> {
    for out in a.out.iter().chain(&a.per_query) {
        require_out_dir(out)?;
    }
    require_file(&a.ground_truth)?;
    let loaded = LoadedTables::load(&a.tables)?;
    let truth = load_ground_truth(&a.ground_truth, loaded.n())?;
    let config = rerank_config(&a.graph, a.k, file);
    let e = evaluate(&loaded.sources(), &truth, &config, metric(a.metric, file))?;
    let reports = [e.baseline, e.reranked];
    if let Some(path) = &a.per_query {
        write_atomic(path, per_query_tsv(&reports).as_bytes())?;
    }
    emit(a.out.as_deref(), &reports_to_tsv(&reports))
}

fn cmd_sweep(a: &SweepArgs, file: &FileConfig) -> Result<()> {
    for out in a.out.iter().chain(&a.per_query) {
        require_out_dir(out)?;
    }
    require_file(&a.ground_truth)?;
    let loaded = LoadedTables::load(&a.tables)?;
    let truth = load_ground_truth(&a.ground_truth, loaded.n())?;
    let k_values = if !a.k_values.is_empty() {
        a.k_values.clone()
    } else {
        file.k_values.clone().unwrap_or_else(|| DEFAULT_SWEEP.to_vec())
    };
    let config = rerank_config(&a.graph, None, file);
    let reports = sweep_k(&loaded.sources(), &truth, &config, &k_values, metric(a.metric, file))?;
    if let Some(path) = &a.per_query {
        write_atomic(path, per_query_tsv(&reports).as_bytes())?;
    }
    emit(a.out.as_deref(), &reports_to_tsv(&reports))
}

fn cmd_graph_dump(a: &GraphDumpArgs, file: &FileConfig) -> Result<()> {
    if let Some(out) = &a.out {
        require_out_dir(out)?;
    }
    let loaded = LoadedTables::load(&a.tables)?;
    let config = rerank_config(&a.graph, a.k, file);
    let build = match config.method {
        Method::Directed => build_directed_graph,
        Method::Undirected => build_undirected_graph,
    };
    let query = ImageId(a.query);
    let graphs = loaded
        .tables
        .iter()
        .map(|t| build(t, query, &config.graph))
        .collect::<Result<Vec<_>, _>>()?;
    let inputs: Vec<_> = loaded
        .labels
        .iter()
        .zip(&graphs)
        .zip(&loaded.scales)
        .map(|((l, g), &s)| FusionInput::new(l, g).scaled(s))
        .collect();
    emit(a.out.as_deref(), &fuse_scaled(&inputs)?.to_edge_list())
}
