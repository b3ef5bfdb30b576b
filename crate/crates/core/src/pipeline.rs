//! End-to-end analysis pipeline: score file in, artifact directory out.
//! Runs ingestion, series encoding, filtering, change-point segmentation,
//! network construction, power-law and community analysis, and tonal region
//! labeling, then writes every table and graph plus a manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::community::{detect_communities, CommunityPartition};
use crate::error::{Error, Result};
use crate::export;
use crate::ingest::{chordify, load_score};
use crate::network::{build_network, degree_stats, layer_networks, similarity_matrix};
use crate::powerlaw::{fit_power_law, PowerLawFit};
use crate::segment::{binary_segmentation, choose_gamma, Segmentation};
use crate::series::{build_series, LabeledSeries};
use crate::tonal::{
    agreement, build_region_table, global_key, AnnotationFile, RegionTable, SpellingTable,
};

/// Tunables for a full run. Flags and config files land here; unset values
/// fall back to these defaults.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalyzeConfig {
    /// Occurrence-threshold filter applied before segmentation.
    pub filter: f64,
    /// Split-acceptance penalty.
    pub penalty: f64,
    /// Minimum events per segment.
    pub min_size: usize,
    /// Seed for every random choice in the run.
    pub seed: u64,
    /// Keep consecutive repeated chords as separate events.
    pub keep_repeats: bool,
    /// Louvain resolution.
    pub resolution: f64,
    /// Scale-degree spelling overrides, e.g. "8=bVI".
    pub spelling: Option<String>,
    /// Reference region annotations to score against.
    pub annotations: Option<PathBuf>,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            filter: 0.10,
            penalty: 3.0,
            min_size: 2,
            seed: 0,
            keep_repeats: false,
            resolution: 1.0,
            spelling: None,
            annotations: None,
        }
    }
}

/// Everything a run computed, echoed into `manifest.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub input: String,
    pub config: AnalyzeConfig,
    /// Chordified event count with repeats kept.
    pub events_raw: usize,
    /// Event count after merging consecutive repeats.
    pub events_merged: usize,
    /// Event count entering segmentation (after the filter).
    pub events_analyzed: usize,
    pub alphabet_raw: usize,
    pub alphabet_analyzed: usize,
    pub gamma: f64,
    pub breakpoints: Vec<usize>,
    pub bar_breaks: Vec<u32>,
    pub segment_count: usize,
    pub node_count: usize,
    pub edge_count: usize,
    pub mean_degree: f64,
    pub global_key: String,
    pub modularity: f64,
    pub community_count: usize,
    pub power_law: Option<PowerLawFit>,
    pub agreement: Option<f64>,
    pub artifacts: Vec<String>,
}

/// The in-memory results backing a manifest, for callers that want the data
/// rather than the files.
pub struct AnalyzeOutput {
    pub manifest: Manifest,
    pub series: LabeledSeries,
    pub segmentation: Segmentation,
    pub regions: RegionTable,
    pub communities: CommunityPartition,
}

/// Run the whole pipeline on one score and write every artifact into
/// `out_dir` (created if missing).
pub fn analyze(input: &Path, out_dir: &Path, cfg: &AnalyzeConfig) -> Result<AnalyzeOutput> {
    let doc = load_score(input)?;
    let merged = chordify(&doc, false)?;
    let raw = chordify(&doc, true)?;
    let analyzed_seq = if cfg.keep_repeats { &raw } else { &merged };

    let full_series = build_series(analyzed_seq)?;
    let series = full_series.filter(cfg.filter)?;

    let model = choose_gamma(&series)?;
    let seg = binary_segmentation(&series, cfg.penalty, &model, cfg.min_size)?;

    let net = build_network(&series)?;
    let stats = degree_stats(&net);
    let layers = layer_networks(&series, &seg)?;
    let sim = similarity_matrix(&layers)?;

    let degrees: Vec<u64> = stats.per_node.values().map(|d| d.total as u64).collect();
    let power_law = match fit_power_law(&degrees) {
        Ok(fit) => Some(fit),
        Err(e) => {
            log::warn!("degree distribution admits no power-law fit: {e}");
            None
        }
    };
    let communities = detect_communities(&net, cfg.seed, cfg.resolution);

    let spelling = match &cfg.spelling {
        Some(spec) => SpellingTable::with_overrides(spec)?,
        None => SpellingTable::default(),
    };
    let global = global_key(&net)?;
    let regions = build_region_table(&layers, &seg, &series, global, &spelling);

    let agreement_score = match &cfg.annotations {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let reference = AnnotationFile::parse(&text)?;
            Some(agreement(&regions, &reference)?)
        }
        None => None,
    };

    fs::create_dir_all(out_dir)?;
    let mut artifacts = Vec::new();
    let mut write = |name: &str, content: String| -> Result<()> {
        fs::write(out_dir.join(name), content)?;
        artifacts.push(name.to_string());
        Ok(())
    };
    write("series.csv", export::series_csv(&series))?;
    write("histogram.csv", export::histogram_csv(&series))?;
    write(
        "segmentation.json",
        serde_json::to_string_pretty(&seg).map_err(|e| Error::invalid(e.to_string()))? + "\n",
    )?;
    write("network.graphml", export::graphml(&net, Some(&communities)))?;
    write("network.dot", export::dot(&net, Some(&communities)))?;
    write("degrees.csv", export::degree_distribution_csv(&net))?;
    write("similarity.csv", export::similarity_csv(&sim))?;
    write("regions.csv", export::regions_csv(&regions))?;

    let manifest = Manifest {
        input: input.display().to_string(),
        config: cfg.clone(),
        events_raw: raw.events.len(),
        events_merged: merged.events.len(),
        events_analyzed: series.len(),
        alphabet_raw: full_series.alphabet_size(),
        alphabet_analyzed: series.alphabet_size(),
        gamma: model.gamma,
        breakpoints: seg.breakpoints.clone(),
        bar_breaks: seg.bar_breaks.clone(),
        segment_count: seg.segments.len(),
        node_count: net.node_count(),
        edge_count: net.edge_count(),
        mean_degree: stats.mean_degree,
        global_key: global.to_string(),
        modularity: communities.modularity,
        community_count: communities.community_count(),
        power_law,
        agreement: agreement_score,
        artifacts: artifacts.clone(),
    };
    let manifest_json =
        serde_json::to_string_pretty(&manifest).map_err(|e| Error::invalid(e.to_string()))? + "\n";
    fs::write(out_dir.join("manifest.json"), manifest_json)?;

    Ok(AnalyzeOutput {
        manifest,
        series,
        segmentation: seg,
        regions,
        communities,
    })
}
