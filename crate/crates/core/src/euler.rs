//! Directed route optimization: balance a chord network by duplicating the
//! fewest edges (a Chinese-postman style transportation problem solved with
//! min-cost flow), then walk the balanced multigraph with Hierholzer's
//! algorithm to get a closed circuit covering every progression.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::ScoreNetwork;
use crate::series::LabeledSeries;

/// Tallies of the composer's own walk through the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkStats {
    pub nodes_visited: usize,
    pub edges_traversed: usize,
    pub distinct_edges: usize,
    pub duplicated: usize,
}

/// A balanced multigraph: each support edge once, plus extra copies.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EulerizedGraph {
    pub nodes: BTreeSet<u32>,
    pub support: BTreeSet<(u32, u32)>,
    /// Extra traversal count per edge, beyond the required single pass.
    pub duplications: BTreeMap<(u32, u32), u64>,
}

/// A closed walk consuming every multigraph edge exactly once. Length is
/// reported in both conventions — node visits and edge traversals — since
/// they differ by one and either may be meant by "steps".
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Circuit {
    pub nodes: Vec<u32>,
    pub start: u32,
    pub edges_traversed: u64,
    pub nodes_visited: u64,
    pub duplicated_edges: u64,
}

impl EulerizedGraph {
    /// Required traversals of one edge: 1 if in support, plus duplicates.
    pub fn multiplicity(&self, edge: (u32, u32)) -> u64 {
        if self.support.contains(&edge) {
            1 + self.duplications.get(&edge).copied().unwrap_or(0)
        } else {
            0
        }
    }

    pub fn total_edges(&self) -> u64 {
        self.support.len() as u64 + self.duplicated_total()
    }

    pub fn duplicated_total(&self) -> u64 {
        self.duplications.values().sum()
    }
}

/// Walk tallies of a series: every event visits a node, every consecutive
/// pair traverses an edge, and repeats beyond an edge's first traversal
/// count as duplicated.
pub fn walk_stats(series: &LabeledSeries) -> WalkStats {
    let n = series.len();
    let edges_traversed = n.saturating_sub(1);
    let mut distinct: BTreeSet<(u32, u32)> = BTreeSet::new();
    for w in series.values.windows(2) {
        distinct.insert((w[0], w[1]));
    }
    WalkStats {
        nodes_visited: n,
        edges_traversed,
        distinct_edges: distinct.len(),
        duplicated: edges_traversed - distinct.len(),
    }
}

/// Balance the support digraph by duplicating existing edges, minimizing the
/// number of added copies. Sources are nodes with more in- than out-edges,
/// sinks the reverse; the optimal routing is a min-cost flow over the
/// support with unit cost per copied edge.
pub fn eulerize_directed(net: &ScoreNetwork) -> Result<EulerizedGraph> {
    let nodes: BTreeSet<u32> = net.nodes.keys().copied().collect();
    let support: BTreeSet<(u32, u32)> = net.edges.keys().copied().collect();
    if nodes.is_empty() {
        return Err(Error::invalid("empty network"));
    }
    if support.is_empty() {
        if nodes.len() > 1 {
            return Err(Error::NotEulerizable("multiple nodes but no edges".into()));
        }
        return Ok(EulerizedGraph {
            nodes,
            support,
            duplications: BTreeMap::new(),
        });
    }
    if !weakly_connected(&nodes, &support) {
        return Err(Error::NotEulerizable(
            "edge support is not weakly connected".into(),
        ));
    }

    // Per-node imbalance over the support (each distinct edge counted once).
    let mut balance: BTreeMap<u32, i64> = nodes.iter().map(|&v| (v, 0i64)).collect();
    for &(s, t) in &support {
        *balance.get_mut(&s).unwrap() += 1; // out
        *balance.get_mut(&t).unwrap() -= 1; // in
    }
    let sources: Vec<(u32, i64)> = balance
        .iter()
        .filter(|&(_, &b)| b < 0)
        .map(|(&v, &b)| (v, -b))
        .collect();
    let sinks: Vec<(u32, i64)> = balance
        .iter()
        .filter(|&(_, &b)| b > 0)
        .map(|(&v, &b)| (v, b))
        .collect();

    let duplications = if sources.is_empty() {
        BTreeMap::new()
    } else {
        route_duplications(&nodes, &support, &sources, &sinks)?
    };
    Ok(EulerizedGraph {
        nodes,
        support,
        duplications,
    })
}

/// Min-cost flow (successive shortest paths) from a super-source feeding
/// every in-heavy node to a super-sink draining every out-heavy node.
/// Each support edge has unlimited capacity at cost 1; the resulting flow
/// is the duplication count per edge.
fn route_duplications(
    nodes: &BTreeSet<u32>,
    support: &BTreeSet<(u32, u32)>,
    sources: &[(u32, i64)],
    sinks: &[(u32, i64)],
) -> Result<BTreeMap<(u32, u32), u64>> {
    let index: BTreeMap<u32, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = nodes.len();
    let s_node = n;
    let t_node = n + 1;
    let total_supply: i64 = sources.iter().map(|&(_, s)| s).sum();

    struct Arc {
        to: usize,
        cap: i64,
        cost: i64,
        /// Support edge this arc duplicates, if any.
        edge: Option<(u32, u32)>,
    }
    let mut arcs: Vec<Arc> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n + 2];
    let push_arc = |arcs: &mut Vec<Arc>,
                    adj: &mut Vec<Vec<usize>>,
                    from: usize,
                    to: usize,
                    cap: i64,
                    cost: i64,
                    edge: Option<(u32, u32)>| {
        adj[from].push(arcs.len());
        arcs.push(Arc {
            to,
            cap,
            cost,
            edge,
        });
        adj[to].push(arcs.len());
        arcs.push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
            edge: None,
        });
    };
    for &(u, v) in support {
        push_arc(
            &mut arcs,
            &mut adj,
            index[&u],
            index[&v],
            total_supply,
            1,
            Some((u, v)),
        );
    }
    for &(v, supply) in sources {
        push_arc(&mut arcs, &mut adj, s_node, index[&v], supply, 0, None);
    }
    for &(v, demand) in sinks {
        push_arc(&mut arcs, &mut adj, index[&v], t_node, demand, 0, None);
    }

    let mut routed = 0i64;
    while routed < total_supply {
        // Shortest augmenting path by cost (SPFA; costs are 0/1, no
        // negative cycles arise along augmenting paths).
        let mut dist = vec![i64::MAX; n + 2];
        let mut prev_arc = vec![usize::MAX; n + 2];
        let mut in_queue = vec![false; n + 2];
        dist[s_node] = 0;
        let mut queue = VecDeque::from([s_node]);
        in_queue[s_node] = true;
        while let Some(u) = queue.pop_front() {
            in_queue[u] = false;
            for &ai in &adj[u] {
                let arc = &arcs[ai];
                if arc.cap > 0 && dist[u] != i64::MAX && dist[u] + arc.cost < dist[arc.to] {
                    dist[arc.to] = dist[u] + arc.cost;
                    prev_arc[arc.to] = ai;
                    if !in_queue[arc.to] {
                        queue.push_back(arc.to);
                        in_queue[arc.to] = true;
                    }
                }
            }
        }
        if dist[t_node] == i64::MAX {
            return Err(Error::NotEulerizable(
                "no duplication path between unbalanced nodes".into(),
            ));
        }
        let mut bottleneck = total_supply - routed;
        let mut v = t_node;
        while v != s_node {
            let ai = prev_arc[v];
            bottleneck = bottleneck.min(arcs[ai].cap);
            v = arcs[ai ^ 1].to;
        }
        let mut v = t_node;
        while v != s_node {
            let ai = prev_arc[v];
            arcs[ai].cap -= bottleneck;
            arcs[ai ^ 1].cap += bottleneck;
            v = arcs[ai ^ 1].to;
        }
        routed += bottleneck;
    }

    let mut duplications: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for ai in (0..arcs.len()).step_by(2) {
        if let Some(edge) = arcs[ai].edge {
            let flow = arcs[ai ^ 1].cap;
            if flow > 0 {
                duplications.insert(edge, flow as u64);
            }
        }
    }
    Ok(duplications)
}

/// Closed walk consuming every multigraph edge exactly once, built with the
/// stack form of Hierholzer's algorithm. From each node the remaining edge
/// with the smallest target id is taken first, so output is deterministic.
pub fn euler_circuit(g: &EulerizedGraph, start: u32) -> Result<Circuit> {
    if !g.nodes.contains(&start) {
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

    // Remaining targets per node, ascending, consumed front to back.
    let mut remaining: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &(u, v) in &g.support {
        let m = g.multiplicity((u, v));
        remaining
            .entry(u)
            .or_default()
            .extend(std::iter::repeat_n(v, m as usize));
    }
    let mut cursor: BTreeMap<u32, usize> = BTreeMap::new();
    for (u, targets) in remaining.iter_mut() {
        targets.sort_unstable();
        cursor.insert(*u, 0);
    }

    let mut stack = vec![start];
    let mut out: Vec<u32> = Vec::with_capacity(total_edges as usize + 1);
    while let Some(&v) = stack.last() {
        let next = remaining.get(&v).and_then(|targets| {
            let c = cursor.get_mut(&v).unwrap();
            if *c < targets.len() {
                let t = targets[*c];
                *c += 1;
                Some(t)
            } else {
                None
            }
        });
        match next {
            Some(t) => stack.push(t),
            None => out.push(stack.pop().unwrap()),
        }
    }
    out.reverse();

    if out.len() as u64 != total_edges + 1 {
        return Err(Error::NotEulerizable(
            "graph is not connected enough for a single circuit".into(),
        ));
    }
    if out.first() != Some(&start) || out.last() != Some(&start) {
        return Err(Error::NotEulerizable(
            "walk failed to close at the start node".into(),
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

/// Full check that a circuit's consecutive pairs match the multigraph's
/// edge multiset exactly.
pub fn verify_circuit(g: &EulerizedGraph, circuit: &Circuit) -> Result<()> {
    if circuit.nodes.first() != circuit.nodes.last() {
        return Err(Error::invalid("circuit is not closed"));
    }
    let mut used: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for w in circuit.nodes.windows(2) {
        *used.entry((w[0], w[1])).or_insert(0) += 1;
    }
    for &edge in &g.support {
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

fn weakly_connected(nodes: &BTreeSet<u32>, support: &BTreeSet<(u32, u32)>) -> bool {
    let Some(&first) = nodes.iter().next() else {
        return true;
    };
    let mut undirected: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for &(u, v) in support {
        undirected.entry(u).or_default().insert(v);
        undirected.entry(v).or_default().insert(u);
    }
    let mut seen: BTreeSet<u32> = BTreeSet::new();
    let mut queue = VecDeque::from([first]);
    seen.insert(first);
    while let Some(u) = queue.pop_front() {
        if let Some(neigh) = undirected.get(&u) {
            for &v in neigh {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
    }
    seen.len() == nodes.len()
}
