//! `scorenet`: chord-network analysis of symbolic scores.
//!
//! Every subcommand reads a MusicXML file (plain or .mxl), runs one slice of
//! the library, and emits deterministic text: JSON to stdout for structured
//! results, CSV for tables, GraphML/DOT for graphs. A plain-text key=value
//! config file can hold defaults; command-line flags always win.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand};
use serde_json::json;

use scorenet_core::{
    agreement, assign_chords, barabasi_albert, binary_segmentation, build_network,
    build_region_table, build_series, choose_gamma, choose_m, chordify, compare_histograms,
    degree_stats, detect_communities, euler_circuit, euler_circuit_undirected, eulerize_directed,
    eulerize_undirected, export, fit_power_law, global_key, layer_networks, load_score,
    network_labels, similarity_matrix, vl_histogram, walk_stats, AnalyzeConfig, AnnotationFile,
    CostModel, GenConfig, LabeledSeries,
};

#[derive(Parser)]
#[command(
    name = "scorenet",
    version,
    about = "Turn symbolic scores into chord networks: segmentation, topology, tonal regions, circuits, and generative models"
)]
struct Cli {
    /// Plain-text key=value file with defaults; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Chordify a score; one JSON line per chord (index, bar, pcset).
    Ingest(IngestArgs),
    /// Encode the chord series; CSV (index, bar, id, pcset) to stdout.
    Series(SeriesArgs),
    /// Detect change points; segmentation JSON to stdout.
    Segment(SegmentArgs),
    /// Build the chord network; GraphML, DOT, or JSON to stdout.
    Network(NetworkArgs),
    /// Label tonal regions per segment; CSV table to stdout.
    Regions(RegionsArgs),
    /// Minimal closed circuit covering every progression; JSON to stdout.
    Euler(EulerArgs),
    /// Grow a degree-matched random network labeled from a reference score.
    Generate(GenerateArgs),
    /// Layer-similarity matrix, or agreement against an annotation file.
    Compare(CompareArgs),
    /// Full pipeline; writes every artifact into an output directory.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// MusicXML file (.musicxml, .xml, or compressed .mxl).
    file: PathBuf,
    /// Keep consecutive repeated chords as separate events.
    #[arg(long, action = ArgAction::SetTrue)]
    keep_repeats: Option<bool>,
}

#[derive(Args)]
struct SeriesArgs {
    file: PathBuf,
    /// Drop pcsets occurring under FRACTION of the most frequent one's count.
    #[arg(long, value_name = "FRACTION")]
    filter: Option<f64>,
    #[arg(long, action = ArgAction::SetTrue)]
    keep_repeats: Option<bool>,
    /// Also write the occurrence histogram CSV to this path ("-" = stdout).
    #[arg(long, value_name = "PATH")]
    histogram: Option<PathBuf>,
}

#[derive(Args)]
struct SegmentArgs {
    file: PathBuf,
    /// Split-acceptance penalty.
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long, value_name = "FRACTION")]
    filter: Option<f64>,
    /// Minimum events per segment.
    #[arg(long)]
    min_size: Option<usize>,
    /// Kernel bandwidth; computed from the series when absent.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, action = ArgAction::SetTrue)]
    keep_repeats: Option<bool>,
}

#[derive(Args)]
struct NetworkArgs {
    file: PathBuf,
    /// Output form.
    #[arg(long, value_parser = ["graphml", "dot", "json"])]
    format: Option<String>,
    /// Filter threshold (default 0: the network keeps every chord).
    #[arg(long, value_name = "FRACTION")]
    filter: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Louvain resolution for the community attribute.
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long, action = ArgAction::SetTrue)]
    keep_repeats: Option<bool>,
}

#[derive(Args)]
struct RegionsArgs {
    file: PathBuf,
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long, value_name = "FRACTION")]
    filter: Option<f64>,
    #[arg(long)]
    min_size: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Scale-degree spelling overrides, e.g. "8=bVI,6=bV".
    #[arg(long)]
    spelling: Option<String>,
    #[arg(long, action = ArgAction::SetTrue)]
    keep_repeats: Option<bool>,
}

#[derive(Args)]
struct EulerArgs {
    file: PathBuf,
    /// Filter threshold (default 0: the circuit covers every progression).
    #[arg(long, value_name = "FRACTION")]
    filter: Option<f64>,
    /// Also write the circuit as a chord-sequence CSV.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[arg(long, action = ArgAction::SetTrue)]
    keep_repeats: Option<bool>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Reference score whose network sets the size, density, and labels.
    file: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Attachment edges per arriving node; derived from the reference when absent.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_name = "FRACTION")]
    filter: Option<f64>,
    /// Write the generated network as GraphML to this path.
    #[arg(long, value_name = "PATH")]
    graphml: Option<PathBuf>,
    #[arg(long, action = ArgAction::SetTrue)]
    keep_repeats: Option<bool>,
}

#[derive(Args)]
struct CompareArgs {
    file: PathBuf,
    /// Reference regions; when given, prints the agreement fraction.
    #[arg(long, value_name = "FILE")]
    annotations: Option<PathBuf>,
    /// Write the layer-similarity CSV to this path ("-" = stdout).
    #[arg(long, value_name = "PATH")]
    similarity: Option<PathBuf>,
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long, value_name = "FRACTION")]
    filter: Option<f64>,
    #[arg(long)]
    min_size: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    spelling: Option<String>,
    #[arg(long, action = ArgAction::SetTrue)]
    keep_repeats: Option<bool>,
}

#[derive(Args)]
struct AnalyzeArgs {
    file: PathBuf,
    /// Artifact directory (created if missing).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long, value_name = "FRACTION")]
    filter: Option<f64>,
    #[arg(long)]
    min_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long)]
    spelling: Option<String>,
    #[arg(long, value_name = "FILE")]
    annotations: Option<PathBuf>,
    #[arg(long, action = ArgAction::SetTrue)]
    keep_repeats: Option<bool>,
}

/// Defaults file: one `key = value` per line, `#` comments. Keys mirror the
/// long flag names.
struct FileConfig {
    values: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "filter",
    "penalty",
    "min_size",
    "gamma",
    "seed",
    "keep_repeats",
    "resolution",
    "spelling",
    "annotations",
    "m",
    "format",
    "out",
    "histogram",
    "graphml",
    "csv",
    "similarity",
];

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<FileConfig> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            for (ln, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    bail!("config line {} is not key=value: {:?}", ln + 1, line);
                };
                let key = key.trim().to_string();
                if !KNOWN_KEYS.contains(&key.as_str()) {
                    bail!("unknown config key {key:?} on line {}", ln + 1);
                }
                values.insert(key, value.trim().to_string());
            }
        }
        Ok(FileConfig { values })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config key {key}={raw:?}: {e}")),
        }
    }

    fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.values.get(key).map(String::as_str) {
            None => Ok(None),
            Some("true") | Some("1") | Some("yes") => Ok(Some(true)),
            Some("false") | Some("0") | Some("no") => Ok(Some(false)),
            Some(raw) => bail!("config key {key}={raw:?}: expected a boolean"),
        }
    }

    fn get_path(&self, key: &str) -> Option<PathBuf> {
        self.values.get(key).map(PathBuf::from)
    }
}

fn resolve<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn resolve_flag(flag: Option<bool>, file: Option<bool>) -> bool {
    // SetTrue yields Some(true) when present and None when absent.
    flag.filter(|&b| b).or(file).unwrap_or(false)
}

/// Load, chordify, encode, and optionally filter a score.
fn load_series(file: &Path, keep_repeats: bool, filter: f64) -> Result<LabeledSeries> {
    let doc = load_score(file)?;
    let seq = chordify(&doc, keep_repeats)?;
    let series = build_series(&seq)?;
    if filter > 0.0 {
        Ok(series.filter(filter)?)
    } else {
        Ok(series)
    }
}

fn pick_model(series: &LabeledSeries, gamma: Option<f64>) -> Result<CostModel> {
    match gamma {
        Some(g) if g > 0.0 => Ok(CostModel { gamma: g }),
        Some(g) => bail!("gamma must be positive, got {g}"),
        None => Ok(choose_gamma(series)?),
    }
}

fn write_or_print(path: &Path, content: &str) -> Result<()> {
    if path == Path::new("-") {
        print!("{content}");
    } else {
        fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', "; ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file_cfg = FileConfig::load(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Ingest(args) => run_ingest(args, &file_cfg),
        Cmd::Series(args) => run_series(args, &file_cfg),
        Cmd::Segment(args) => run_segment(args, &file_cfg),
        Cmd::Network(args) => run_network(args, &file_cfg),
        Cmd::Regions(args) => run_regions(args, &file_cfg),
        Cmd::Euler(args) => run_euler(args, &file_cfg),
        Cmd::Generate(args) => run_generate(args, &file_cfg),
        Cmd::Compare(args) => run_compare(args, &file_cfg),
        Cmd::Analyze(args) => run_analyze(args, &file_cfg),
    }
}

fn run_ingest(args: IngestArgs, cfg: &FileConfig) -> Result<()> {
    let keep = resolve_flag(args.keep_repeats, cfg.get_bool("keep_repeats")?);
    let doc = load_score(&args.file)?;
    let seq = chordify(&doc, keep)?;
    let mut out = String::new();
    for ev in &seq.events {
        out.push_str(&serde_json::to_string(&json!({
            "index": ev.index,
            "bar": ev.bar,
            "pcset": ev.pcset.pcs(),
        }))?);
        out.push('\n');
    }
    print!("{out}");
    Ok(())
}

fn run_series(args: SeriesArgs, cfg: &FileConfig) -> Result<()> {
    let keep = resolve_flag(args.keep_repeats, cfg.get_bool("keep_repeats")?);
    let filter = resolve(args.filter, cfg.get("filter")?, 0.10);
    let series = load_series(&args.file, keep, filter)?;
    print!("{}", export::series_csv(&series));
    let histogram = args.histogram.or_else(|| cfg.get_path("histogram"));
    if let Some(path) = histogram {
        write_or_print(&path, &export::histogram_csv(&series))?;
    }
    Ok(())
}

fn run_segment(args: SegmentArgs, cfg: &FileConfig) -> Result<()> {
    let keep = resolve_flag(args.keep_repeats, cfg.get_bool("keep_repeats")?);
    let filter = resolve(args.filter, cfg.get("filter")?, 0.10);
    let penalty = resolve(args.penalty, cfg.get("penalty")?, 3.0);
    let min_size = resolve(args.min_size, cfg.get("min_size")?, 2);
    let series = load_series(&args.file, keep, filter)?;
    let model = pick_model(&series, args.gamma.or(cfg.get("gamma")?))?;
    let seg = binary_segmentation(&series, penalty, &model, min_size)?;
    let out = json!({
        "events": series.len(),
        "alphabet": series.alphabet_size(),
        "gamma": model.gamma,
        "penalty": seg.penalty,
        "breakpoints": seg.breakpoints,
        "bar_breaks": seg.bar_breaks,
        "segments": seg.segments,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn run_network(args: NetworkArgs, cfg: &FileConfig) -> Result<()> {
    let keep = resolve_flag(args.keep_repeats, cfg.get_bool("keep_repeats")?);
    let filter = resolve(args.filter, cfg.get("filter")?, 0.0);
    let seed = resolve(args.seed, cfg.get("seed")?, 0);
    let resolution = resolve(args.resolution, cfg.get("resolution")?, 1.0);
    let format = resolve(args.format, cfg.get("format")?, "graphml".to_string());
    let series = load_series(&args.file, keep, filter)?;
    let net = build_network(&series)?;
    let communities = detect_communities(&net, seed, resolution);
    match format.as_str() {
        "graphml" => print!("{}", export::graphml(&net, Some(&communities))),
        "dot" => print!("{}", export::dot(&net, Some(&communities))),
        "json" => {
            let stats = degree_stats(&net);
            let degrees: Vec<u64> = stats.per_node.values().map(|d| d.total as u64).collect();
            let power_law = fit_power_law(&degrees).ok();
            let nodes: Vec<_> = net
                .nodes
                .iter()
                .map(|(id, info)| {
                    json!({
                        "id": id,
                        "pcset": info.pcset.pcs(),
                        "label": info.pcset.label(),
                        "count": info.count,
                        "community": communities.assignment.get(id),
                    })
                })
                .collect();
            let edges: Vec<_> = net
                .edges
                .iter()
                .map(|(&(s, t), &w)| json!({"from": s, "to": t, "weight": w}))
                .collect();
            let out = json!({
                "node_count": net.node_count(),
                "edge_count": net.edge_count(),
                "total_weight": net.total_weight(),
                "mean_degree": stats.mean_degree,
                "modularity": communities.modularity,
                "communities": communities.community_count(),
                "power_law": power_law,
                "degree_stats": stats.per_node,
                "nodes": nodes,
                "edges": edges,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        other => bail!("unknown format {other:?}"),
    }
    Ok(())
}

fn run_regions(args: RegionsArgs, cfg: &FileConfig) -> Result<()> {
    let keep = resolve_flag(args.keep_repeats, cfg.get_bool("keep_repeats")?);
    let filter = resolve(args.filter, cfg.get("filter")?, 0.10);
    let penalty = resolve(args.penalty, cfg.get("penalty")?, 3.0);
    let min_size = resolve(args.min_size, cfg.get("min_size")?, 2);
    let spelling = spelling_table(
        args.spelling
            .or_else(|| cfg.values.get("spelling").cloned()),
    )?;
    let series = load_series(&args.file, keep, filter)?;
    let model = pick_model(&series, args.gamma.or(cfg.get("gamma")?))?;
    let seg = binary_segmentation(&series, penalty, &model, min_size)?;
    let layers = layer_networks(&series, &seg)?;
    let net = build_network(&series)?;
    let global = global_key(&net)?;
    let table = build_region_table(&layers, &seg, &series, global, &spelling);
    print!("{}", export::regions_csv(&table));
    Ok(())
}

fn spelling_table(spec: Option<String>) -> Result<scorenet_core::SpellingTable> {
    Ok(match spec {
        Some(s) => scorenet_core::SpellingTable::with_overrides(&s)?,
        None => scorenet_core::SpellingTable::default(),
    })
}

fn run_euler(args: EulerArgs, cfg: &FileConfig) -> Result<()> {
    let keep = resolve_flag(args.keep_repeats, cfg.get_bool("keep_repeats")?);
    let filter = resolve(args.filter, cfg.get("filter")?, 0.0);
    let series = load_series(&args.file, keep, filter)?;
    let stats = walk_stats(&series);
    let net = build_network(&series)?;
    let labels = network_labels(&net);
    let g = eulerize_directed(&net)?;
    let circuit = euler_circuit(&g, series.values[0])?;
    let duplications: Vec<_> = g
        .duplications
        .iter()
        .map(|(&(s, t), &extra)| {
            json!({
                "from": labels[&s].label(),
                "to": labels[&t].label(),
                "extra": extra,
            })
        })
        .collect();
    let circuit_labels: Vec<String> = circuit.nodes.iter().map(|id| labels[id].label()).collect();
    let out = json!({
        "walk_stats": stats,
        "duplications": duplications,
        "duplicated_total": g.duplicated_total(),
        "lengths": {
            "edges_traversed": circuit.edges_traversed,
            "nodes_visited": circuit.nodes_visited,
            "duplicated_edges": circuit.duplicated_edges,
        },
        "circuit": circuit_labels,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    let csv = args.csv.or_else(|| cfg.get_path("csv"));
    if let Some(path) = csv {
        write_or_print(&path, &export::circuit_csv(&circuit, &labels))?;
    }
    Ok(())
}

fn run_generate(args: GenerateArgs, cfg: &FileConfig) -> Result<()> {
    let keep = resolve_flag(args.keep_repeats, cfg.get_bool("keep_repeats")?);
    let filter = resolve(args.filter, cfg.get("filter")?, 0.0);
    let seed = resolve(args.seed, cfg.get("seed")?, 0);
    let series = load_series(&args.file, keep, filter)?;
    let reference = build_network(&series)?;
    let m = match args.m.or(cfg.get("m")?) {
        Some(m) => m,
        None => choose_m(&reference),
    };
    let gen_cfg = GenConfig {
        n: reference.node_count(),
        m,
        seed,
    };
    let graph = barabasi_albert(&gen_cfg)?;
    let gen_labels = assign_chords(&graph, &reference)?;
    let eulerized = eulerize_undirected(&graph)?;
    let start = *graph
        .nodes
        .iter()
        .next()
        .expect("generated graph is non-empty");
    let gen_circuit = euler_circuit_undirected(&eulerized, start)?;
    let gen_hist = vl_histogram(&gen_circuit, &gen_labels)?;

    let ref_labels = network_labels(&reference);
    let ref_eulerized = eulerize_directed(&reference)?;
    let ref_circuit = euler_circuit(&ref_eulerized, series.values[0])?;
    let ref_hist = vl_histogram(&ref_circuit, &ref_labels)?;
    let tv = compare_histograms(&gen_hist, &ref_hist);

    let circuit_labels: Vec<String> = gen_circuit
        .nodes
        .iter()
        .map(|id| gen_labels[id].label())
        .collect();
    let out = json!({
        "config": gen_cfg,
        "matching_exact": eulerized.matching_exact,
        "tv_distance_vs_original": tv,
        "lengths": {
            "reference_walk": walk_stats(&series),
            "reference_circuit": {
                "edges_traversed": ref_circuit.edges_traversed,
                "nodes_visited": ref_circuit.nodes_visited,
                "duplicated_edges": ref_circuit.duplicated_edges,
            },
            "generated_circuit": {
                "edges_traversed": gen_circuit.edges_traversed,
                "nodes_visited": gen_circuit.nodes_visited,
                "duplicated_edges": gen_circuit.duplicated_edges,
            },
        },
        "histogram": gen_hist,
        "reference_histogram": ref_hist,
        "circuit": circuit_labels,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    let graphml = args.graphml.or_else(|| cfg.get_path("graphml"));
    if let Some(path) = graphml {
        write_or_print(&path, &export::graphml_undirected(&graph, &gen_labels))?;
    }
    Ok(())
}

fn run_compare(args: CompareArgs, cfg: &FileConfig) -> Result<()> {
    let keep = resolve_flag(args.keep_repeats, cfg.get_bool("keep_repeats")?);
    let filter = resolve(args.filter, cfg.get("filter")?, 0.10);
    let penalty = resolve(args.penalty, cfg.get("penalty")?, 3.0);
    let min_size = resolve(args.min_size, cfg.get("min_size")?, 2);
    let series = load_series(&args.file, keep, filter)?;
    let model = pick_model(&series, args.gamma.or(cfg.get("gamma")?))?;
    let seg = binary_segmentation(&series, penalty, &model, min_size)?;
    let layers = layer_networks(&series, &seg)?;
    let sim = similarity_matrix(&layers)?;

    let similarity = args.similarity.or_else(|| cfg.get_path("similarity"));
    let annotations = args.annotations.or_else(|| cfg.get_path("annotations"));
    if let Some(path) = &similarity {
        write_or_print(path, &export::similarity_csv(&sim))?;
    }
    match annotations {
        Some(path) => {
            let spelling = spelling_table(
                args.spelling
                    .or_else(|| cfg.values.get("spelling").cloned()),
            )?;
            let net = build_network(&series)?;
            let global = global_key(&net)?;
            let table = build_region_table(&layers, &seg, &series, global, &spelling);
            let text = fs::read_to_string(&path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let reference = AnnotationFile::parse(&text)?;
            let score = agreement(&table, &reference)?;
            println!("{score}");
        }
        None => {
            if similarity.is_none() {
                print!("{}", export::similarity_csv(&sim));
            }
        }
    }
    Ok(())
}

fn run_analyze(args: AnalyzeArgs, cfg: &FileConfig) -> Result<()> {
    let out_dir = resolve(args.out, cfg.get_path("out"), PathBuf::from("scorenet-out"));
    let config = AnalyzeConfig {
        filter: resolve(args.filter, cfg.get("filter")?, 0.10),
        penalty: resolve(args.penalty, cfg.get("penalty")?, 3.0),
        min_size: resolve(args.min_size, cfg.get("min_size")?, 2),
        seed: resolve(args.seed, cfg.get("seed")?, 0),
        keep_repeats: resolve_flag(args.keep_repeats, cfg.get_bool("keep_repeats")?),
        resolution: resolve(args.resolution, cfg.get("resolution")?, 1.0),
        spelling: args
            .spelling
            .or_else(|| cfg.values.get("spelling").cloned()),
        annotations: args.annotations.or_else(|| cfg.get_path("annotations")),
    };
    let output = scorenet_core::analyze(&args.file, &out_dir, &config)?;
    println!("{}", serde_json::to_string_pretty(&output.manifest)?);
    Ok(())
}
