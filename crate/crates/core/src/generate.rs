//! Generative side: grow a scale-free undirected graph by preferential
//! attachment, label its nodes with the reference score's chords by degree
//! rank, close the graph into a single traversal, and compare voice-leading
//! operator statistics against the original.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::euler::Circuit;
use crate::network::ScoreNetwork;
use crate::pcset::PcSet;

/// Undirected multigraph; edge keys are normalized (low, high) pairs and the
/// value is the edge multiplicity.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct UndirectedGraph {
    pub nodes: BTreeSet<u32>,
    pub edges: BTreeMap<(u32, u32), u64>,
}

impl UndirectedGraph {
    pub fn add_edge(&mut self, u: u32, v: u32) {
        self.nodes.insert(u);
        self.nodes.insert(v);
        *self.edges.entry(edge_key(u, v)).or_insert(0) += 1;
    }

    /// Incident edge endpoints counted with multiplicity; loops count twice.
    pub fn degree(&self, v: u32) -> u64 {
        let mut d = 0;
        for (&(a, b), &m) in &self.edges {
            if a == v {
                d += m;
            }
            if b == v {
                d += m;
            }
        }
        d
    }

    pub fn degrees(&self) -> BTreeMap<u32, u64> {
        let mut d: BTreeMap<u32, u64> = self.nodes.iter().map(|&v| (v, 0)).collect();
        for (&(a, b), &m) in &self.edges {
            *d.get_mut(&a).unwrap() += m;
            *d.get_mut(&b).unwrap() += m;
        }
        d
    }

    /// Total multiplicity.
    pub fn edge_count(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn is_connected(&self) -> bool {
        let Some(&first) = self.nodes.iter().next() else {
            return true;
        };
        let adj = self.adjacency();
        let mut seen = BTreeSet::from([first]);
        let mut queue = VecDeque::from([first]);
        while let Some(u) = queue.pop_front() {
            if let Some(neigh) = adj.get(&u) {
                for &v in neigh {
                    if seen.insert(v) {
                        queue.push_back(v);
                    }
                }
            }
        }
        seen.len() == self.nodes.len()
    }

    /// Distinct neighbors (loops excluded), ascending.
    fn adjacency(&self) -> BTreeMap<u32, BTreeSet<u32>> {
        let mut adj: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
        for &(a, b) in self.edges.keys() {
            if a != b {
                adj.entry(a).or_default().insert(b);
                adj.entry(b).or_default().insert(a);
            }
        }
        adj
    }
}

fn edge_key(u: u32, v: u32) -> (u32, u32) {
    (u.min(v), u.max(v))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GenConfig {
    /// Final node count.
    pub n: usize,
    /// Edges attached by each arriving node.
    pub m: usize,
    pub seed: u64,
}

/// A generated graph whose nodes carry the reference network's pcsets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratedScoreNetwork {
    pub graph: UndirectedGraph,
    pub labels: BTreeMap<u32, PcSet>,
    pub config: GenConfig,
}

/// Relative occurrence of each voice-leading operator class (canonical
/// sorted signed steps). Frequencies sum to 1.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OperatorHistogram {
    pub freq: BTreeMap<Vec<i64>, f64>,
}

impl OperatorHistogram {
    pub fn total(&self) -> f64 {
        self.freq.values().sum()
    }
}

impl Serialize for OperatorHistogram {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.freq.len()))?;
        for (steps, f) in &self.freq {
            let key: Vec<String> = steps.iter().map(|s| s.to_string()).collect();
            map.serialize_entry(&format!("({})", key.join(",")), f)?;
        }
        map.end()
    }
}

/// Preferential-attachment growth: start from `m` isolated nodes, then each
/// arriving node draws `m` distinct targets with probability proportional
/// to current degree (degree-zero nodes weigh 1). Final edge count is
/// exactly (n − m)·m.
pub fn barabasi_albert(cfg: &GenConfig) -> Result<UndirectedGraph> {
    if cfg.m < 1 {
        return Err(Error::invalid("attachment count m must be at least 1"));
    }
    if cfg.m >= cfg.n {
        return Err(Error::invalid(format!(
            "attachment count m = {} must be below node count n = {}",
            cfg.m, cfg.n
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut graph = UndirectedGraph::default();
    let mut degree = vec![0u64; cfg.n];
    for v in 0..cfg.m {
        graph.nodes.insert(v as u32);
    }
    for j in cfg.m..cfg.n {
        // Snapshot attachment weights before j's own edges land.
        let weights: Vec<u64> = degree[..j].iter().map(|&d| d.max(1)).collect();
        let dist = WeightedIndex::new(&weights)
            .map_err(|e| Error::invalid(format!("bad attachment weights: {e}")))?;
        let mut targets: BTreeSet<usize> = BTreeSet::new();
        while targets.len() < cfg.m {
            targets.insert(dist.sample(&mut rng));
        }
        for t in targets {
            graph.add_edge(j as u32, t as u32);
            degree[j] += 1;
            degree[t] += 1;
        }
    }
    Ok(graph)
}

/// Attachment count matching the reference's density: round(edges / nodes),
/// at least 1.
pub fn choose_m(reference: &ScoreNetwork) -> usize {
    let n = reference.node_count().max(1);
    let e = reference.edge_count();
    ((e as f64 / n as f64).round() as usize).max(1)
}

/// Label generated nodes with reference pcsets, pairing degree ranks:
/// highest generated degree gets the reference's highest-total-degree pcset.
pub fn assign_chords(
    graph: &UndirectedGraph,
    reference: &ScoreNetwork,
) -> Result<BTreeMap<u32, PcSet>> {
    if graph.nodes.len() != reference.node_count() {
        return Err(Error::invalid(format!(
            "generated graph has {} nodes, reference has {}",
            graph.nodes.len(),
            reference.node_count()
        )));
    }
    let degrees = graph.degrees();
    let mut gen_order: Vec<u32> = graph.nodes.iter().copied().collect();
    gen_order.sort_by_key(|v| (std::cmp::Reverse(degrees[v]), *v));
    let ref_order = reference.rank_by_total_degree();
    Ok(gen_order
        .into_iter()
        .zip(ref_order)
        .map(|(g, r)| (g, reference.nodes[&r].pcset.clone()))
        .collect())
}

/// An undirected multigraph with every degree even.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EulerizedUndirected {
    pub base: UndirectedGraph,
    /// Extra copies per edge beyond the base multiplicity.
    pub duplications: BTreeMap<(u32, u32), u64>,
    /// False when the odd-vertex pairing fell back to the greedy heuristic.
    pub matching_exact: bool,
}

impl EulerizedUndirected {
    pub fn multiplicity(&self, edge: (u32, u32)) -> u64 {
        self.base.edges.get(&edge).copied().unwrap_or(0)
            + self.duplications.get(&edge).copied().unwrap_or(0)
    }

    pub fn total_edges(&self) -> u64 {
        self.base.edge_count() + self.duplicated_total()
    }

    pub fn duplicated_total(&self) -> u64 {
        self.duplications.values().sum()
    }

    /// Base and duplications merged into one multigraph.
    pub fn combined(&self) -> UndirectedGraph {
        let mut g = self.base.clone();
        for (&edge, &extra) in &self.duplications {
            *g.edges
                .get_mut(&edge)
                .expect("duplications lie on base edges") += extra;
        }
        g
    }
}

/// Largest odd-vertex set handled by the exact matching; beyond it a greedy
/// nearest-pair heuristic takes over (flagged in the result).
const EXACT_MATCHING_LIMIT: usize = 14;

/// Make every degree even by duplicating edges along shortest paths between
/// paired odd-degree vertices. Pairing minimizes total duplicated edges
/// (exact matching up to 14 odd vertices, greedy beyond).
pub fn eulerize_undirected(graph: &UndirectedGraph) -> Result<EulerizedUndirected> {
    if graph.nodes.is_empty() {
        return Err(Error::invalid("empty graph"));
    }
    if !graph.is_connected() {
        return Err(Error::NotEulerizable("graph is not connected".into()));
    }
    let degrees = graph.degrees();
    let odd: Vec<u32> = degrees
        .iter()
        .filter(|&(_, &d)| d % 2 == 1)
        .map(|(&v, _)| v)
        .collect();
    if odd.is_empty() {
        return Ok(EulerizedUndirected {
            base: graph.clone(),
            duplications: BTreeMap::new(),
            matching_exact: true,
        });
    }
    let adj = graph.adjacency();
    let hops: Vec<BTreeMap<u32, u32>> = odd.iter().map(|&v| bfs_hops(&adj, v)).collect();
    let k = odd.len();
    let mut dist = vec![vec![u64::MAX; k]; k];
    for i in 0..k {
        for j in 0..k {
            if let Some(&h) = hops[i].get(&odd[j]) {
                dist[i][j] = h as u64;
            }
        }
    }
    let (pairs, exact) = if k <= EXACT_MATCHING_LIMIT {
        (exact_matching(&dist)?, true)
    } else {
        (greedy_matching(&dist), false)
    };

    let mut duplications: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for (i, j) in pairs {
        let path = bfs_path(&adj, odd[i], odd[j]).ok_or_else(|| {
            Error::NotEulerizable(format!("no path between nodes {} and {}", odd[i], odd[j]))
        })?;
        for w in path.windows(2) {
            *duplications.entry(edge_key(w[0], w[1])).or_insert(0) += 1;
        }
    }
    Ok(EulerizedUndirected {
        base: graph.clone(),
        duplications,
        matching_exact: exact,
    })
}

fn bfs_hops(adj: &BTreeMap<u32, BTreeSet<u32>>, start: u32) -> BTreeMap<u32, u32> {
    let mut dist = BTreeMap::from([(start, 0u32)]);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        if let Some(neigh) = adj.get(&u) {
            for &v in neigh {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(v) {
                    e.insert(du + 1);
                    queue.push_back(v);
                }
            }
        }
    }
    dist
}

/// One shortest path, deterministic by visiting neighbors in ascending order.
fn bfs_path(adj: &BTreeMap<u32, BTreeSet<u32>>, from: u32, to: u32) -> Option<Vec<u32>> {
    if from == to {
        return Some(vec![from]);
    }
    let mut parent: BTreeMap<u32, u32> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = BTreeSet::from([from]);
    while let Some(u) = queue.pop_front() {
        if let Some(neigh) = adj.get(&u) {
            for &v in neigh {
                if seen.insert(v) {
                    parent.insert(v, u);
                    if v == to {
                        let mut path = vec![to];
                        let mut cur = to;
                        while let Some(&p) = parent.get(&cur) {
                            path.push(p);
                            cur = p;
                        }
                        path.reverse();
                        return Some(path);
                    }
                    queue.push_back(v);
                }
            }
        }
    }
    None
}

/// Minimum-total-distance perfect matching over an even-sized set, by
/// bitmask dynamic programming.
fn exact_matching(dist: &[Vec<u64>]) -> Result<Vec<(usize, usize)>> {
    let k = dist.len();
    debug_assert_eq!(k % 2, 0, "odd-degree vertices come in pairs");
    let full = 1usize << k;
    let mut dp = vec![u64::MAX; full];
    let mut choice = vec![(usize::MAX, usize::MAX); full];
    dp[0] = 0;
    for mask in 1..full {
        if (mask.count_ones() % 2) != 0 {
            continue;
        }
        let i = mask.trailing_zeros() as usize;
        let mut best = u64::MAX;
        let mut best_pair = (usize::MAX, usize::MAX);
        // j doubles as a bit position in the mask, not just a dist index.
        #[allow(clippy::needless_range_loop)]
        for j in (i + 1)..k {
            if mask & (1 << j) == 0 || dist[i][j] == u64::MAX {
                continue;
            }
            let prev = mask & !(1 << i) & !(1 << j);
            if dp[prev] != u64::MAX && dp[prev] + dist[i][j] < best {
                best = dp[prev] + dist[i][j];
                best_pair = (i, j);
            }
        }
        dp[mask] = best;
        choice[mask] = best_pair;
    }
    if dp[full - 1] == u64::MAX {
        return Err(Error::NotEulerizable(
            "odd-degree vertices cannot all be paired".into(),
        ));
    }
    let mut pairs = Vec::with_capacity(k / 2);
    let mut mask = full - 1;
    while mask != 0 {
        let (i, j) = choice[mask];
        pairs.push((i, j));
        mask &= !(1 << i);
        mask &= !(1 << j);
    }
    Ok(pairs)
}

/// Nearest-pair heuristic for large odd-vertex sets; ties break toward the
/// smallest index pair.
fn greedy_matching(dist: &[Vec<u64>]) -> Vec<(usize, usize)> {
    let k = dist.len();
    let mut remaining: BTreeSet<usize> = (0..k).collect();
    let mut pairs = Vec::with_capacity(k / 2);
    while remaining.len() >= 2 {
        let mut best: Option<(u64, usize, usize)> = None;
        for &i in &remaining {
            for &j in &remaining {
                if j <= i || dist[i][j] == u64::MAX {
                    continue;
                }
                let cand = (dist[i][j], i, j);
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
        }
        let Some((_, i, j)) = best else { break };
        remaining.remove(&i);
        remaining.remove(&j);
        pairs.push((i, j));
    }
    pairs
}

/// Closed walk over the balanced multigraph, smallest available neighbor
/// first (Hierholzer). Direction of each undirected edge is induced by the
/// traversal order.
pub fn euler_circuit_undirected(g: &EulerizedUndirected, start: u32) -> Result<Circuit> {
    if !g.base.nodes.contains(&start) {
        return Err(Error::invalid(format!("start node {start} not in graph")));
    }
    let total_edges = g.total_edges();
    if total_edges == 0 {
        return Ok(Circuit {
            nodes: vec![start],
            start,
            edges_traversed: 0,
            nodes_visited: 1,
            duplicated_edges: 0,
        });
    }
    let mut remaining: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    let mut neighbors: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for &edge in g.base.edges.keys() {
        remaining.insert(edge, g.multiplicity(edge));
        let (a, b) = edge;
        neighbors.entry(a).or_default().insert(b);
        neighbors.entry(b).or_default().insert(a);
    }

    let mut stack = vec![start];
    let mut out: Vec<u32> = Vec::with_capacity(total_edges as usize + 1);
    while let Some(&v) = stack.last() {
        let next = neighbors.get(&v).and_then(|ns| {
            ns.iter()
                .copied()
                .find(|&t| remaining.get(&edge_key(v, t)).copied().unwrap_or(0) > 0)
        });
        match next {
            Some(t) => {
                *remaining.get_mut(&edge_key(v, t)).unwrap() -= 1;
                stack.push(t);
            }
            None => out.push(stack.pop().unwrap()),
        }
    }
    out.reverse();

    if out.len() as u64 != total_edges + 1 {
        return Err(Error::NotEulerizable(
            "graph is not connected enough for a single circuit".into(),
        ));
    }
    Ok(Circuit {
        nodes: out,
        start,
        edges_traversed: total_edges,
        nodes_visited: total_edges + 1,
        duplicated_edges: g.duplicated_total(),
    })
}

/// Checker: consecutive (normalized) pairs must equal the multigraph's edge
/// multiset exactly.
pub fn verify_circuit_undirected(g: &EulerizedUndirected, circuit: &Circuit) -> Result<()> {
    if circuit.nodes.first() != circuit.nodes.last() {
        return Err(Error::invalid("circuit is not closed"));
    }
    let mut used: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for w in circuit.nodes.windows(2) {
        *used.entry(edge_key(w[0], w[1])).or_insert(0) += 1;
    }
    for &edge in g.base.edges.keys() {
        let want = g.multiplicity(edge);
        let got = used.remove(&edge).unwrap_or(0);
        if got != want {
            return Err(Error::invalid(format!(
                "edge {edge:?} traversed {got} times, required {want}"
            )));
        }
    }
    if let Some((&edge, _)) = used.iter().next() {
        return Err(Error::invalid(format!(
            "circuit uses edge {edge:?} absent from the graph"
        )));
    }
    Ok(())
}

/// Node id → pcset map of a score network, for histogram labeling.
pub fn network_labels(net: &ScoreNetwork) -> BTreeMap<u32, PcSet> {
    net.nodes
        .iter()
        .map(|(&id, info)| (id, info.pcset.clone()))
        .collect()
}

/// Relative occurrence of each voice-leading operator along a circuit.
/// Each consecutive chord pair contributes its minimal operator in
/// canonical (sorted) form; counts are normalized by transition count.
pub fn vl_histogram(circuit: &Circuit, labels: &BTreeMap<u32, PcSet>) -> Result<OperatorHistogram> {
    let transitions = circuit.nodes.len().saturating_sub(1);
    if transitions == 0 {
        return Err(Error::invalid("circuit has no transitions"));
    }
    let mut counts: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
    for w in circuit.nodes.windows(2) {
        let a = labels
            .get(&w[0])
            .ok_or_else(|| Error::invalid(format!("node {} has no pcset label", w[0])))?;
        let b = labels
            .get(&w[1])
            .ok_or_else(|| Error::invalid(format!("node {} has no pcset label", w[1])))?;
        let op = a.vl_operator(b)?;
        *counts.entry(op.canonical()).or_insert(0) += 1;
    }
    let total = transitions as f64;
    Ok(OperatorHistogram {
        freq: counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / total))
            .collect(),
    })
}

/// Total-variation distance between two operator histograms: half the sum
/// of absolute frequency differences over the union of operator classes.
pub fn compare_histograms(a: &OperatorHistogram, b: &OperatorHistogram) -> f64 {
    let keys: BTreeSet<&Vec<i64>> = a.freq.keys().chain(b.freq.keys()).collect();
    let sum: f64 = keys
        .into_iter()
        .map(|k| {
            let fa = a.freq.get(k).copied().unwrap_or(0.0);
            let fb = b.freq.get(k).copied().unwrap_or(0.0);
            (fa - fb).abs()
        })
        .sum();
    sum / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_from_edges(edges: &[(u32, u32)]) -> UndirectedGraph {
        let mut g = UndirectedGraph::default();
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    #[test]
    fn ba_edge_count_is_forced() {
        for (n, m) in [(3usize, 1usize), (10, 2), (25, 3)] {
            let g = barabasi_albert(&GenConfig { n, m, seed: 7 }).unwrap();
            assert_eq!(g.nodes.len(), n);
            assert_eq!(g.edge_count(), ((n - m) * m) as u64);
            // Distinct targets per arrival: no multi-edges.
            assert!(g.edges.values().all(|&w| w == 1));
        }
    }

    #[test]
    fn ba_is_deterministic_per_seed() {
        let cfg = GenConfig {
            n: 40,
            m: 2,
            seed: 11,
        };
        let g1 = barabasi_albert(&cfg).unwrap();
        let g2 = barabasi_albert(&cfg).unwrap();
        assert_eq!(g1.edges, g2.edges);
        let g3 = barabasi_albert(&GenConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(g1.edges, g3.edges);
    }

    #[test]
    fn ba_rejects_bad_m() {
        assert!(barabasi_albert(&GenConfig {
            n: 3,
            m: 0,
            seed: 0
        })
        .is_err());
        assert!(barabasi_albert(&GenConfig {
            n: 3,
            m: 3,
            seed: 0
        })
        .is_err());
    }

    #[test]
    fn ba_hubs_attract() {
        // With n large and m=1 the max degree should clearly exceed m.
        let g = barabasi_albert(&GenConfig {
            n: 200,
            m: 1,
            seed: 5,
        })
        .unwrap();
        let max = g.degrees().values().copied().max().unwrap();
        assert!(max >= 5, "max degree {max} suspiciously flat");
    }

    #[test]
    fn choose_m_rounds_reference_density() {
        use crate::network::NodeInfo;
        let mut net = ScoreNetwork::default();
        for id in 0..10u32 {
            net.nodes.insert(
                id,
                NodeInfo {
                    pcset: PcSet::tet12(&[id as i64]),
                    count: 1,
                },
            );
        }
        for i in 0..9u32 {
            net.edges.insert((i, i + 1), 1);
        }
        assert_eq!(choose_m(&net), 1); // 9 edges / 10 nodes
        for i in 0..9u32 {
            net.edges.insert((i + 1, i), 1);
        }
        assert_eq!(choose_m(&net), 2); // 18 / 10
    }

    #[test]
    fn assign_chords_pairs_degree_ranks() {
        use crate::network::NodeInfo;
        // Generated star: node 0 has degree 3, leaves degree 1.
        let graph = graph_from_edges(&[(0, 1), (0, 2), (0, 3)]);
        // Reference chain a->b->c->d: b and c have total degree 2.
        let mut reference = ScoreNetwork::default();
        let sets = [
            PcSet::tet12(&[0, 4, 7]),
            PcSet::tet12(&[7, 11, 2]),
            PcSet::tet12(&[5, 9, 0]),
            PcSet::tet12(&[9, 0, 4]),
        ];
        for (id, set) in sets.iter().enumerate() {
            reference.nodes.insert(
                id as u32,
                NodeInfo {
                    pcset: set.clone(),
                    count: 1,
                },
            );
        }
        for i in 0..3u32 {
            reference.edges.insert((i, i + 1), 1);
        }
        let labels = assign_chords(&graph, &reference).unwrap();
        // Reference rank: 1 and 2 (total 2, tie -> lower id first), then 0, 3.
        // Generated rank: 0 (degree 3), then 1, 2, 3 (degree 1).
        assert_eq!(labels[&0], sets[1]);
        assert_eq!(labels[&1], sets[2]);
        assert_eq!(labels[&2], sets[0]);
        assert_eq!(labels[&3], sets[3]);
    }

    #[test]
    fn assign_chords_rejects_size_mismatch() {
        use crate::network::NodeInfo;
        let graph = graph_from_edges(&[(0, 1)]);
        let mut reference = ScoreNetwork::default();
        reference.nodes.insert(
            0,
            NodeInfo {
                pcset: PcSet::tet12(&[0]),
                count: 1,
            },
        );
        assert!(assign_chords(&graph, &reference).is_err());
    }

    #[test]
    fn even_cycle_needs_no_duplication() {
        let g = graph_from_edges(&[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let e = eulerize_undirected(&g).unwrap();
        assert!(e.duplications.is_empty());
        assert!(e.matching_exact);
        let c = euler_circuit_undirected(&e, 0).unwrap();
        assert_eq!(c.nodes, vec![0, 1, 2, 3, 0]);
        verify_circuit_undirected(&e, &c).unwrap();
    }

    #[test]
    fn path_graph_doubles_every_edge() {
        let g = graph_from_edges(&[(0, 1), (1, 2), (2, 3)]);
        let e = eulerize_undirected(&g).unwrap();
        assert_eq!(e.duplicated_total(), 3);
        assert!(e.combined().degrees().values().all(|d| d % 2 == 0));
        let c = euler_circuit_undirected(&e, 0).unwrap();
        assert_eq!(c.edges_traversed, 6);
        verify_circuit_undirected(&e, &c).unwrap();
    }

    #[test]
    fn star_pairs_four_odd_vertices_minimally() {
        let g = graph_from_edges(&[(0, 1), (0, 2), (0, 3)]);
        let e = eulerize_undirected(&g).unwrap();
        assert_eq!(e.duplicated_total(), 3);
        assert!(e.matching_exact);
        let c = euler_circuit_undirected(&e, 0).unwrap();
        assert_eq!(c.edges_traversed, 6);
        verify_circuit_undirected(&e, &c).unwrap();
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let g = graph_from_edges(&[(0, 1), (2, 3)]);
        assert!(eulerize_undirected(&g).is_err());
    }

    #[test]
    fn histogram_of_alternating_dominant_tonic() {
        let labels = BTreeMap::from([
            (0u32, PcSet::tet12(&[7, 11, 2])),
            (1u32, PcSet::tet12(&[0, 4, 7])),
        ]);
        let circuit = Circuit {
            nodes: vec![0, 1, 0],
            start: 0,
            edges_traversed: 2,
            nodes_visited: 3,
            duplicated_edges: 0,
        };
        let h = vl_histogram(&circuit, &labels).unwrap();
        assert_eq!(h.freq.len(), 2);
        assert_eq!(h.freq[&vec![0, 1, 2]], 0.5); // dominant -> tonic
        assert_eq!(h.freq[&vec![-2, -1, 0]], 0.5); // tonic -> dominant
        assert!((h.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_chord_circuit_is_all_zero_operator() {
        let labels = BTreeMap::from([(0u32, PcSet::tet12(&[0, 4, 7]))]);
        let circuit = Circuit {
            nodes: vec![0, 0, 0],
            start: 0,
            edges_traversed: 2,
            nodes_visited: 3,
            duplicated_edges: 0,
        };
        let h = vl_histogram(&circuit, &labels).unwrap();
        assert_eq!(h.freq.len(), 1);
        assert_eq!(h.freq[&vec![0, 0, 0]], 1.0);
    }

    #[test]
    fn histogram_distance_is_total_variation() {
        let mk = |pairs: &[(&[i64], f64)]| OperatorHistogram {
            freq: pairs.iter().map(|&(k, v)| (k.to_vec(), v)).collect(),
        };
        let a = mk(&[(&[0, 1], 0.6), (&[1, 2], 0.4)]);
        let b = mk(&[(&[0, 1], 0.4), (&[1, 2], 0.6)]);
        assert!((compare_histograms(&a, &a) - 0.0).abs() < 1e-12);
        assert!((compare_histograms(&a, &b) - 0.2).abs() < 1e-12);
        let c = mk(&[(&[3], 1.0)]);
        assert!((compare_histograms(&a, &c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_label_is_an_error() {
        let labels = BTreeMap::from([(0u32, PcSet::tet12(&[0]))]);
        let circuit = Circuit {
            nodes: vec![0, 1, 0],
            start: 0,
            edges_traversed: 2,
            nodes_visited: 3,
            duplicated_edges: 0,
        };
        assert!(vl_histogram(&circuit, &labels).is_err());
    }
}
