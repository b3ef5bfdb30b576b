//! Community detection: greedy modularity maximization (Louvain) on the
//! weight-symmetrized undirected projection of the directed chord network.
//! Deterministic under a fixed seed; ties go to the smallest community id.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::network::ScoreNetwork;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CommunityPartition {
    /// Node id -> community id (dense, 0-based).
    pub assignment: BTreeMap<u32, u32>,
    pub modularity: f64,
}

impl CommunityPartition {
    /// Number of distinct communities.
    pub fn community_count(&self) -> usize {
        self.assignment
            .values()
            .collect::<std::collections::BTreeSet<_>>()
            .len()
    }
}

/// Undirected projection: for each unordered pair the weights of both
/// directions are summed; directed self-loops become undirected self-loops.
struct Projection {
    ids: Vec<u32>,
    /// adj[i] lists (j, w) for j != i, both directions present.
    adj: Vec<Vec<(usize, f64)>>,
    /// Self-loop weight per node (counted twice in the degree).
    self_w: Vec<f64>,
}

impl Projection {
    fn from_network(net: &ScoreNetwork) -> Projection {
        let ids: Vec<u32> = net.nodes.keys().copied().collect();
        let index: BTreeMap<u32, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = ids.len();
        let mut undirected: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut self_w = vec![0.0; n];
        for (&(s, t), &w) in &net.edges {
            let (a, b) = (index[&s], index[&t]);
            if a == b {
                self_w[a] += w as f64;
            } else {
                let key = (a.min(b), a.max(b));
                *undirected.entry(key).or_insert(0.0) += w as f64;
            }
        }
        let mut adj = vec![Vec::new(); n];
        for (&(a, b), &w) in &undirected {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        Projection { ids, adj, self_w }
    }

    fn degree(&self, i: usize) -> f64 {
        let link: f64 = self.adj[i].iter().map(|&(_, w)| w).sum();
        link + 2.0 * self.self_w[i]
    }

    fn total_weight_doubled(&self) -> f64 {
        (0..self.ids.len()).map(|i| self.degree(i)).sum()
    }
}

/// Louvain-style detection. `resolution` scales the null-model term; 1.0 is
/// the classic objective. The returned modularity is recomputed from the
/// final assignment on the original network, not taken from the greedy
/// bookkeeping.
pub fn detect_communities(net: &ScoreNetwork, seed: u64, resolution: f64) -> CommunityPartition {
    let proj = Projection::from_network(net);
    let n = proj.ids.len();
    if n == 0 {
        return CommunityPartition {
            assignment: BTreeMap::new(),
            modularity: 0.0,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // node -> community over the whole run, refined level by level.
    let mut membership: Vec<usize> = (0..n).collect();
    let mut level = LevelGraph::from_projection(&proj);
    loop {
        let moved = one_level(&mut level, resolution, &mut rng);
        let partition = level.communities_dense();
        let community_count = partition.iter().copied().max().map(|m| m + 1).unwrap_or(0);
        for m in membership.iter_mut() {
            *m = partition[*m];
        }
        if !moved || community_count == level.node_count() {
            break;
        }
        level = level.aggregate(&partition, community_count);
    }

    let assignment: BTreeMap<u32, u32> = proj
        .ids
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, membership[i] as u32))
        .collect();
    let q = modularity(net, &assignment, resolution);
    CommunityPartition {
        assignment,
        modularity: q,
    }
}

/// Modularity of an assignment on the symmetrized projection of `net`.
pub fn modularity(net: &ScoreNetwork, assignment: &BTreeMap<u32, u32>, resolution: f64) -> f64 {
    let proj = Projection::from_network(net);
    let m2 = proj.total_weight_doubled();
    if m2 == 0.0 {
        return 0.0;
    }
    let comm: Vec<u32> = proj.ids.iter().map(|id| assignment[id]).collect();
    let mut intra = 0.0; // sum of A_ij over ordered same-community pairs
    let mut tot: BTreeMap<u32, f64> = BTreeMap::new();
    for i in 0..proj.ids.len() {
        *tot.entry(comm[i]).or_insert(0.0) += proj.degree(i);
        intra += 2.0 * proj.self_w[i];
        for &(j, w) in &proj.adj[i] {
            if comm[i] == comm[j] {
                intra += w;
            }
        }
    }
    let mut q = intra / m2;
    for (_, t) in tot {
        q -= resolution * (t / m2) * (t / m2);
    }
    q
}

/// Working graph for one Louvain level.
struct LevelGraph {
    adj: Vec<Vec<(usize, f64)>>,
    self_w: Vec<f64>,
    degree: Vec<f64>,
    m2: f64,
    community: Vec<usize>,
    tot: Vec<f64>,
}

impl LevelGraph {
    fn from_projection(p: &Projection) -> LevelGraph {
        let n = p.ids.len();
        let degree: Vec<f64> = (0..n).map(|i| p.degree(i)).collect();
        let m2 = degree.iter().sum();
        LevelGraph {
            adj: p.adj.clone(),
            self_w: p.self_w.clone(),
            tot: degree.clone(),
            degree,
            m2,
            community: (0..n).collect(),
        }
    }

    fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Current communities renumbered densely in ascending label order.
    fn communities_dense(&self) -> Vec<usize> {
        let mut labels: Vec<usize> = self.community.clone();
        let mut present: Vec<usize> = labels.clone();
        present.sort_unstable();
        present.dedup();
        let remap: BTreeMap<usize, usize> = present
            .into_iter()
            .enumerate()
            .map(|(i, c)| (c, i))
            .collect();
        for l in labels.iter_mut() {
            *l = remap[l];
        }
        labels
    }

    fn aggregate(&self, partition: &[usize], communities: usize) -> LevelGraph {
        let mut undirected: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut self_w = vec![0.0; communities];
        for i in 0..self.node_count() {
            self_w[partition[i]] += self.self_w[i];
            for &(j, w) in &self.adj[i] {
                if j < i {
                    continue; // each undirected edge once
                }
                let (a, b) = (partition[i], partition[j]);
                if a == b {
                    self_w[a] += w;
                } else {
                    *undirected.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
                }
            }
        }
        let mut adj = vec![Vec::new(); communities];
        for (&(a, b), &w) in &undirected {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        let degree: Vec<f64> = (0..communities)
            .map(|i| {
                let link: f64 = adj[i].iter().map(|&(_, w)| w).sum();
                link + 2.0 * self_w[i]
            })
            .collect();
        let m2 = degree.iter().sum();
        LevelGraph {
            adj,
            self_w,
            tot: degree.clone(),
            degree,
            m2,
            community: (0..communities).collect(),
        }
    }
}

/// One pass of local moves until nothing improves. Returns whether any node
/// changed community.
fn one_level(g: &mut LevelGraph, resolution: f64, rng: &mut ChaCha8Rng) -> bool {
    let n = g.node_count();
    if n == 0 || g.m2 == 0.0 {
        return false;
    }
    let mut any_move = false;
    let mut order: Vec<usize> = (0..n).collect();
    const MAX_PASSES: usize = 200;
    for _ in 0..MAX_PASSES {
        let mut moved_this_pass = false;
        order.shuffle(rng);
        for &i in &order {
            let old = g.community[i];
            // Weights from i to each adjacent community.
            let mut k_in: BTreeMap<usize, f64> = BTreeMap::new();
            for &(j, w) in &g.adj[i] {
                *k_in.entry(g.community[j]).or_insert(0.0) += w;
            }
            g.tot[old] -= g.degree[i];
            // Insertion gain into c, up to terms constant in c:
            // k_in(c)/m2 - resolution * tot(c) * k_i / m2^2.
            let gain_of = |c: usize, k: f64, g: &LevelGraph| {
                k / g.m2 - resolution * g.tot[c] * g.degree[i] / (g.m2 * g.m2)
            };
            let mut best_c = old;
            let mut best_gain = gain_of(old, *k_in.get(&old).unwrap_or(&0.0), g);
            for (&c, &k) in &k_in {
                if c == old {
                    continue;
                }
                let gain = gain_of(c, k, g);
                let better =
                    gain > best_gain + 1e-12 || ((gain - best_gain).abs() <= 1e-12 && c < best_c);
                if better {
                    best_c = c;
                    best_gain = gain;
                }
            }
            g.tot[best_c] += g.degree[i];
            g.community[i] = best_c;
            if best_c != old {
                moved_this_pass = true;
                any_move = true;
            }
        }
        if !moved_this_pass {
            break;
        }
    }
    any_move
}
