//! Score-network analysis: turn a symbolic score into a directed chord
//! network, segment it into tonal regions by kernel change-point detection,
//! quantify its topology (degrees, communities, power-law tails, subgraph
//! similarity), and run the generative side (minimal closed circuits over
//! all progressions; preferential-attachment graphs with chord labels and
//! voice-leading statistics).
//!
//! Everything is deterministic: one seed drives all randomness, and ordered
//! containers keep every output byte-stable.

pub mod community;
pub mod error;
pub mod euler;
pub mod export;
pub mod generate;
pub mod ingest;
pub mod network;
pub mod pcset;
pub mod pipeline;
pub mod powerlaw;
pub mod segment;
pub mod series;
pub mod tonal;

pub use community::{detect_communities, modularity, CommunityPartition};
pub use error::{Error, Result};
pub use euler::{
    euler_circuit, eulerize_directed, verify_circuit, walk_stats, Circuit, EulerizedGraph,
    WalkStats,
};
pub use generate::{
    assign_chords, barabasi_albert, choose_m, compare_histograms, euler_circuit_undirected,
    eulerize_undirected, network_labels, verify_circuit_undirected, vl_histogram,
    EulerizedUndirected, GenConfig, GeneratedScoreNetwork, OperatorHistogram, UndirectedGraph,
};
pub use ingest::{
    chordify, load_score, load_score_bytes, ChordEvent, ChordSequence, ScoreDocument,
};
pub use network::{
    build_network, degree_stats, layer_networks, mcs_similarity, mcs_similarity_nets,
    similarity_matrix, DegreeStats, LayerNetwork, NodeInfo, ScoreNetwork,
};
pub use pcset::{ChordQuality, PcSet, VlVector, DEFAULT_TET};
pub use pipeline::{analyze, AnalyzeConfig, AnalyzeOutput, Manifest};
pub use powerlaw::{fit_power_law, hurwitz_zeta, PowerLawFit};
pub use segment::{
    binary_segmentation, breakpoints_to_bars, choose_gamma, rbf_cost, CostModel, Segmentation,
};
pub use series::{build_series, LabeledSeries};
pub use tonal::{
    agreement, build_region_table, chord_to_key, global_key, parse_key, prevalent_chord,
    region_label, AnnotationFile, Key, Mode, RegionRow, RegionTable, SpellingTable,
};
