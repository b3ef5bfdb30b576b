//! The directed weighted chord network: construction from a series,
//! per-segment layers, degree statistics, and subgraph similarity.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcset::PcSet;
use crate::segment::Segmentation;
use crate::series::LabeledSeries;

/// One node: its pcset and how often it occurs in the network's scope.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeInfo {
    pub pcset: PcSet,
    pub count: u32,
}

/// Directed weighted graph of chord progressions. Node keys are series ids,
/// so layers of the same score share node identity.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ScoreNetwork {
    pub nodes: BTreeMap<u32, NodeInfo>,
    /// (source, target) -> traversal count.
    pub edges: BTreeMap<(u32, u32), u64>,
}

/// A score sub-network induced by one segment's events.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayerNetwork {
    pub net: ScoreNetwork,
    pub segment: usize,
    pub bar_range: (u32, u32),
}

/// Unweighted degree counts over distinct edges.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeDegrees {
    pub in_degree: u32,
    pub out_degree: u32,
    pub total: u32,
    pub weighted: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DegreeStats {
    pub per_node: BTreeMap<u32, NodeDegrees>,
    /// Distinct directed edges per node; equals the mean out-degree.
    pub mean_degree: f64,
}

impl ScoreNetwork {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    /// Node ids ranked by total degree, ties by occurrence count then id.
    pub fn rank_by_total_degree(&self) -> Vec<u32> {
        let stats = degree_stats(self);
        let mut ids: Vec<u32> = self.nodes.keys().copied().collect();
        ids.sort_by_key(|id| {
            (
                std::cmp::Reverse(stats.per_node[id].total),
                std::cmp::Reverse(self.nodes[id].count),
                *id,
            )
        });
        ids
    }
}

/// One directed edge increment per consecutive pair of the series.
pub fn build_network(series: &LabeledSeries) -> Result<ScoreNetwork> {
    if series.len() < 2 {
        return Err(Error::invalid(
            "need at least two events to build a network",
        ));
    }
    build_from_slice(series, 0, series.len())
}

fn build_from_slice(series: &LabeledSeries, a: usize, b: usize) -> Result<ScoreNetwork> {
    let mut nodes: BTreeMap<u32, NodeInfo> = BTreeMap::new();
    for &v in &series.values[a..b] {
        nodes
            .entry(v)
            .or_insert_with(|| NodeInfo {
                pcset: series.dictionary[v as usize].clone(),
                count: 0,
            })
            .count += 1;
    }
    let mut edges: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for w in series.values[a..b].windows(2) {
        *edges.entry((w[0], w[1])).or_insert(0) += 1;
    }
    Ok(ScoreNetwork { nodes, edges })
}

/// In/out/total/weighted degree per node plus the network mean degree.
pub fn degree_stats(net: &ScoreNetwork) -> DegreeStats {
    let mut per_node: BTreeMap<u32, NodeDegrees> = net
        .nodes
        .keys()
        .map(|&id| {
            (
                id,
                NodeDegrees {
                    in_degree: 0,
                    out_degree: 0,
                    total: 0,
                    weighted: 0,
                },
            )
        })
        .collect();
    for (&(s, t), &w) in &net.edges {
        if let Some(d) = per_node.get_mut(&s) {
            d.out_degree += 1;
            d.weighted += w;
        }
        if let Some(d) = per_node.get_mut(&t) {
            d.in_degree += 1;
            d.weighted += w;
        }
    }
    for d in per_node.values_mut() {
        d.total = d.in_degree + d.out_degree;
    }
    let mean_degree = if net.nodes.is_empty() {
        0.0
    } else {
        net.edges.len() as f64 / net.nodes.len() as f64
    };
    DegreeStats {
        per_node,
        mean_degree,
    }
}

/// One network per segment, built from that segment's consecutive pairs
/// only; edges never cross a breakpoint. Node counts are per-segment.
pub fn layer_networks(series: &LabeledSeries, seg: &Segmentation) -> Result<Vec<LayerNetwork>> {
    let mut layers = Vec::with_capacity(seg.segments.len());
    for (si, &(a, b)) in seg.segments.iter().enumerate() {
        if b > series.len() || a >= b {
            return Err(Error::invalid(format!(
                "segment {si} [{a}, {b}) does not fit the series"
            )));
        }
        let net = build_from_slice(series, a, b)?;
        layers.push(LayerNetwork {
            net,
            segment: si,
            bar_range: (series.bars[a], series.bars[b - 1]),
        });
    }
    Ok(layers)
}

/// Similarity via the largest weakly connected piece of the intersection
/// graph (shared node ids, shared directed edges), normalized by the larger
/// node count. 1.0 means the larger graph is contained in the other.
pub fn mcs_similarity(g1: &LayerNetwork, g2: &LayerNetwork) -> Result<f64> {
    mcs_similarity_nets(&g1.net, &g2.net)
}

pub fn mcs_similarity_nets(g1: &ScoreNetwork, g2: &ScoreNetwork) -> Result<f64> {
    if g1.nodes.is_empty() || g2.nodes.is_empty() {
        return Err(Error::invalid("similarity of an empty graph"));
    }
    let shared_nodes: BTreeSet<u32> = g1
        .nodes
        .keys()
        .filter(|id| g2.nodes.contains_key(id))
        .copied()
        .collect();
    if shared_nodes.is_empty() {
        return Ok(0.0);
    }
    let shared_edges: Vec<(u32, u32)> = g1
        .edges
        .keys()
        .filter(|e| g2.edges.contains_key(e))
        .copied()
        .collect();

    // Union-find over the shared nodes, joined by shared edges either way.
    let ids: Vec<u32> = shared_nodes.iter().copied().collect();
    let index: BTreeMap<u32, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (s, t) in shared_edges {
        let (a, b) = (index[&s], index[&t]);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..ids.len() {
        let r = find(&mut parent, i);
        *sizes.entry(r).or_insert(0) += 1;
    }
    let largest = sizes.values().copied().max().unwrap_or(0);
    Ok(largest as f64 / g1.nodes.len().max(g2.nodes.len()) as f64)
}

/// Pairwise layer similarity matrix.
pub fn similarity_matrix(layers: &[LayerNetwork]) -> Result<Vec<Vec<f64>>> {
    let n = layers.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = if i == j {
                1.0
            } else {
                mcs_similarity(&layers[i], &layers[j])?
            };
        }
    }
    Ok(m)
}
