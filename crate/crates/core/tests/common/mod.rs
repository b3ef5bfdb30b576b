//! Shared fixtures and independent reference implementations used by the
//! integration and acceptance suites. Everything here is deliberately naive:
//! exhaustive searches and textbook double loops that are slow but easy to
//! trust, kept free of any code path they are checking.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scorenet_core::{
    build_series, ChordEvent, ChordSequence, LabeledSeries, NodeInfo, PcSet, ScoreNetwork,
};

// ---------------------------------------------------------------------------
// Voice-leading oracle
// ---------------------------------------------------------------------------

/// Exact minimal squared voice-leading distance between two pcsets, found by
/// brute force: expand both sets to max cardinality by duplicating elements
/// in every possible way, try every voice assignment, and move each voice by
/// its shortest signed pitch-class step.
pub fn vl_min_squared(a: &PcSet, b: &PcSet) -> u64 {
    assert_eq!(a.tet(), b.tet());
    let tet = a.tet() as u64;
    let voices = a.len().max(b.len());
    let mut best = u64::MAX;
    for src in expansions(a.pcs(), voices) {
        for dst in expansions(b.pcs(), voices) {
            let mut perm = dst.clone();
            heap_permute(&mut perm, voices, &mut |assigned: &[u32]| {
                let mut total = 0u64;
                for (&x, &y) in src.iter().zip(assigned) {
                    let fwd = (y as u64 + tet - x as u64) % tet;
                    let step = fwd.min(tet - fwd);
                    total += step * step;
                }
                best = best.min(total);
            });
        }
    }
    best
}

/// All multisets of size `len` that contain every element of `pcs` at least
/// once (order of the base elements preserved; duplicates adjacent).
fn expansions(pcs: &[u32], len: usize) -> Vec<Vec<u32>> {
    let extra = len - pcs.len();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(pcs: &[u32], idx: usize, extra: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if idx == pcs.len() {
            if extra == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for copies in 0..=extra {
            for _ in 0..=copies {
                cur.push(pcs[idx]);
            }
            rec(pcs, idx + 1, extra - copies, cur, out);
            for _ in 0..=copies {
                cur.pop();
            }
        }
    }
    rec(pcs, 0, extra, &mut cur, &mut out);
    out
}

/// Heap's algorithm; calls `visit` with every permutation of `items`.
fn heap_permute(items: &mut [u32], k: usize, visit: &mut impl FnMut(&[u32])) {
    if k <= 1 {
        visit(items);
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, visit);
        if k.is_multiple_of(2) {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

// ---------------------------------------------------------------------------
// Modularity oracle
// ---------------------------------------------------------------------------

/// Textbook pairwise modularity of a node->community assignment over the
/// weight-symmetrized projection of a directed network. Self-loops keep
/// their weight once in the adjacency and twice in the degree.
pub fn naive_modularity(net: &ScoreNetwork, assignment: &BTreeMap<u32, u32>) -> f64 {
    let ids: Vec<u32> = net.nodes.keys().copied().collect();
    let n = ids.len();
    let pos: BTreeMap<u32, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj = vec![vec![0.0f64; n]; n];
    for (&(s, t), &w) in &net.edges {
        let (i, j) = (pos[&s], pos[&t]);
        if i == j {
            adj[i][i] += 2.0 * w as f64;
        } else {
            adj[i][j] += w as f64;
            adj[j][i] += w as f64;
        }
    }
    let degree: Vec<f64> = (0..n).map(|i| adj[i].iter().sum()).collect();
    let two_m: f64 = degree.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if assignment[&ids[i]] == assignment[&ids[j]] {
                q += adj[i][j] - degree[i] * degree[j] / two_m;
            }
        }
    }
    q / two_m
}

// ---------------------------------------------------------------------------
// Directed postman oracle
// ---------------------------------------------------------------------------

/// Minimal number of duplicated edges that balances a digraph so a closed
/// walk can cover every support edge, by brute force: every unbalanced
/// in-surplus node must source as many duplicated paths as its surplus, and
/// the cheapest pairing with out-surplus nodes is found by trying every
/// assignment of path endpoints over the hop-shortest-path matrix.
/// `None` means no duplication scheme exists.
pub fn cpp_min_duplications(nodes: &[u32], edges: &BTreeSet<(u32, u32)>) -> Option<u64> {
    let pos: BTreeMap<u32, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = nodes.len();
    // Hop distances over the directed support edges.
    let mut dist = vec![vec![u64::MAX; n]; n];
    for (s, row) in dist.iter_mut().enumerate() {
        row[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &(a, b) in edges.iter() {
                if pos[&a] == u && row[pos[&b]] == u64::MAX {
                    row[pos[&b]] = row[u] + 1;
                    queue.push_back(pos[&b]);
                }
            }
        }
    }
    let mut balance = vec![0i64; n];
    for &(a, b) in edges {
        balance[pos[&a]] += 1; // out
        balance[pos[&b]] -= 1; // in
    }
    let mut sources = Vec::new(); // in-surplus: paths start here
    let mut sinks = Vec::new(); // out-surplus: paths end here
    for (v, &bal) in balance.iter().enumerate() {
        for _ in 0..(-bal).max(0) {
            sources.push(v);
        }
        for _ in 0..bal.max(0) {
            sinks.push(v);
        }
    }
    assert_eq!(sources.len(), sinks.len());
    let mut used = vec![false; sinks.len()];
    let mut best: Option<u64> = None;
    assign(&sources, &sinks, &dist, 0, 0, &mut used, &mut best);
    best
}

fn assign(
    sources: &[usize],
    sinks: &[usize],
    dist: &[Vec<u64>],
    i: usize,
    cost: u64,
    used: &mut [bool],
    best: &mut Option<u64>,
) {
    if best.is_some_and(|b| cost >= b) {
        return; // remaining hops only add cost
    }
    if i == sources.len() {
        *best = Some(cost);
        return;
    }
    for j in 0..sinks.len() {
        if used[j] || dist[sources[i]][sinks[j]] == u64::MAX {
            continue;
        }
        used[j] = true;
        assign(
            sources,
            sinks,
            dist,
            i + 1,
            cost + dist[sources[i]][sinks[j]],
            used,
            best,
        );
        used[j] = false;
    }
}

/// Weak connectivity of a digraph: every node reachable from the first one
/// when edge directions are ignored.
pub fn weakly_connected(nodes: &[u32], edges: &BTreeSet<(u32, u32)>) -> bool {
    let Some(&first) = nodes.first() else {
        return false;
    };
    let mut seen = BTreeSet::from([first]);
    let mut queue = VecDeque::from([first]);
    while let Some(u) = queue.pop_front() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == u && seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
    }
    nodes.iter().all(|v| seen.contains(v))
}

// ---------------------------------------------------------------------------
// Discrete power-law sampler
// ---------------------------------------------------------------------------

/// Draw from p(x) = x^-alpha / zeta(alpha, xmin) for integer x >= xmin by
/// walking the CDF. The normalizer is summed directly with an integral tail
/// correction, independent of any library zeta code.
pub fn sample_power_law(alpha: f64, xmin: u64, count: usize, seed: u64) -> Vec<u64> {
    let z = naive_hurwitz_zeta(alpha, xmin);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let mut x = xmin;
            let mut acc = 0.0;
            loop {
                acc += (x as f64).powf(-alpha) / z;
                if u < acc || x >= 100_000_000 {
                    break x;
                }
                x += 1;
            }
        })
        .collect()
}

fn naive_hurwitz_zeta(alpha: f64, xmin: u64) -> f64 {
    let cutoff = xmin + 2_000_000;
    let mut sum = 0.0;
    for x in xmin..cutoff {
        sum += (x as f64).powf(-alpha);
    }
    // Integral bound on the remainder plus half the boundary term.
    sum + (cutoff as f64).powf(1.0 - alpha) / (alpha - 1.0) + 0.5 * (cutoff as f64).powf(-alpha)
}

// ---------------------------------------------------------------------------
// Fixture builders
// ---------------------------------------------------------------------------

/// A labeled series from raw pitch classes, one singleton pcset per event,
/// four events per bar.
pub fn series_from_pcs(values: &[i64]) -> LabeledSeries {
    let events: Vec<ChordEvent> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| ChordEvent {
            index: i,
            bar: (i / 4) as u32 + 1,
            pcset: PcSet::tet12(&[v]),
        })
        .collect();
    let seq = ChordSequence {
        events,
        title: None,
        movement: None,
    };
    build_series(&seq).expect("synthetic series")
}

/// A labeled series with the given ids taken verbatim: the dictionary is one
/// singleton pcset per id in 0..=max, counts are tallied from the ids, and
/// bars advance every four events. Unlike `series_from_pcs` this skips the
/// frequency re-encoding, so the numeric layout of the ids is preserved.
pub fn series_from_ids(values: &[u32]) -> LabeledSeries {
    let max = *values.iter().max().expect("non-empty id series");
    let dictionary: Vec<PcSet> = (0..=max)
        .map(|id| PcSet::tet12(&[(id % 12) as i64]))
        .collect();
    let mut counts = vec![0u32; dictionary.len()];
    for &v in values {
        counts[v as usize] += 1;
    }
    LabeledSeries {
        values: values.to_vec(),
        bars: (0..values.len()).map(|i| (i / 4) as u32 + 1).collect(),
        dictionary,
        counts,
    }
}

/// A seeded series with 3-6 planted regimes, each 15-30 events long, over an
/// alphabet of at most 10 symbols; each regime draws from its own two-symbol
/// pool of adjacent ids, and the ids enter the series verbatim so each regime
/// occupies its own band of the id line. The pools are visited in an order
/// that keeps consecutive regimes at least four ids apart, so every planted
/// boundary carries real distributional contrast. Returns the series and the
/// planted breakpoint indices.
pub fn planted_series(seed: u64) -> (LabeledSeries, Vec<usize>) {
    const POOL_ORDER: [u32; 5] = [0, 2, 4, 1, 3];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let regimes: usize = rng.random_range(3..=6);
    let mut values: Vec<u32> = Vec::new();
    let mut breaks = Vec::new();
    for r in 0..regimes {
        let len: usize = rng.random_range(15..=30);
        let pool_idx = POOL_ORDER[r % POOL_ORDER.len()];
        let pool = [2 * pool_idx, 2 * pool_idx + 1];
        for _ in 0..len {
            values.push(pool[rng.random_range(0..2usize)]);
        }
        if r + 1 < regimes {
            breaks.push(values.len());
        }
    }
    (series_from_ids(&values), breaks)
}

/// A directed network over `n` synthetic nodes with the given weighted edges.
pub fn net_of(n: u32, edges: &[(u32, u32, u64)]) -> ScoreNetwork {
    let mut net = ScoreNetwork::default();
    for id in 0..n {
        net.nodes.insert(
            id,
            NodeInfo {
                pcset: PcSet::tet12(&[id as i64]),
                count: 1,
            },
        );
    }
    for &(s, t, w) in edges {
        *net.edges.entry((s, t)).or_insert(0) += w;
    }
    net
}

/// Two directed 4-cliques joined by a single bridge; the planted two-block
/// structure with known best modularity 11/26.
pub fn two_clique_net() -> ScoreNetwork {
    let mut edges = Vec::new();
    for a in 0..4u32 {
        for b in (a + 1)..4 {
            edges.push((a, b, 1));
            edges.push((a + 4, b + 4, 1));
        }
    }
    edges.push((3, 4, 1));
    net_of(8, &edges)
}

const STEPS: [(&str, i64); 12] = [
    ("C", 0),
    ("C", 1),
    ("D", 0),
    ("D", 1),
    ("E", 0),
    ("F", 0),
    ("F", 1),
    ("G", 0),
    ("G", 1),
    ("A", 0),
    ("A", 1),
    ("B", 0),
];

/// A one-part MusicXML score: each entry of `chords` is one vertical chord
/// (pitch classes), laid out `per_bar` quarter-note chords per measure.
pub fn musicxml(chords: &[Vec<u32>], per_bar: usize) -> String {
    assert!(per_bar >= 1);
    let mut s = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <score-partwise version=\"3.1\">\n\
           <work><work-title>Fixture</work-title></work>\n\
           <part-list>\n\
             <score-part id=\"P1\"><part-name>Keyboard</part-name></score-part>\n\
           </part-list>\n\
           <part id=\"P1\">\n",
    );
    for (measure, group) in chords.chunks(per_bar).enumerate() {
        s.push_str(&format!("    <measure number=\"{}\">\n", measure + 1));
        if measure == 0 {
            s.push_str(&format!(
                "      <attributes><divisions>1</divisions>\
                 <time><beats>{per_bar}</beats><beat-type>4</beat-type></time></attributes>\n"
            ));
        }
        for chord in group {
            for (v, &pc) in chord.iter().enumerate() {
                let (step, alter) = STEPS[(pc % 12) as usize];
                s.push_str("      <note>");
                if v > 0 {
                    s.push_str("<chord/>");
                }
                s.push_str("<pitch>");
                s.push_str(&format!("<step>{step}</step>"));
                if alter != 0 {
                    s.push_str(&format!("<alter>{alter}</alter>"));
                }
                s.push_str("<octave>4</octave></pitch><duration>1</duration></note>\n");
            }
        }
        s.push_str("    </measure>\n");
    }
    s.push_str("  </part>\n</score-partwise>\n");
    s
}

/// Write a MusicXML fixture into a fresh temp directory and return its path.
/// The directory is intentionally leaked for the lifetime of the test run.
pub fn write_score(name: &str, chords: &[Vec<u32>], per_bar: usize) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("scorenet-fixtures-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("fixture dir");
    let path = dir.join(name);
    std::fs::write(&path, musicxml(chords, per_bar)).expect("fixture write");
    path
}
