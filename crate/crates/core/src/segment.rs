//! Change-point detection on the integer chord series: Gaussian-kernel cost
//! plus greedy binary segmentation with a penalty stopping rule.
//!
//! The cost of a window of length L is `L - (1/L) * sum_{s,t} k(y_s, y_t)`
//! with `k(a, b) = exp(-gamma (a - b)^2)`, both indices ranging over the
//! whole window (the diagonal included). A split is accepted when the cost
//! reduction exceeds the penalty.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::LabeledSeries;

/// Kernel bandwidth.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CostModel {
    pub gamma: f64,
}

/// Result of a segmentation run. `breakpoints` are exclusive segment ends,
/// the last always equal to the series length; `bar_breaks` are the bars of
/// the first event of each non-initial segment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Segmentation {
    pub breakpoints: Vec<usize>,
    pub bar_breaks: Vec<u32>,
    pub penalty: f64,
    pub segments: Vec<(usize, usize)>,
}

/// Kernel table indexed by id distance; ids act as 1-D real positions.
struct ExpTable {
    table: Vec<f64>,
}

impl ExpTable {
    fn new(gamma: f64, alphabet: usize) -> ExpTable {
        let table = (0..alphabet.max(1))
            .map(|d| (-gamma * (d * d) as f64).exp())
            .collect();
        ExpTable { table }
    }

    #[inline]
    fn k(&self, a: u32, b: u32) -> f64 {
        self.table[a.abs_diff(b) as usize]
    }
}

/// Gaussian-kernel window cost over events `a..b` (half-open).
pub fn rbf_cost(series: &LabeledSeries, a: usize, b: usize, model: &CostModel) -> Result<f64> {
    if a >= b || b > series.len() {
        return Err(Error::invalid(format!(
            "empty or out-of-range window {a}..{b} (length {})",
            series.len()
        )));
    }
    let table = ExpTable::new(model.gamma, series.alphabet_size());
    Ok(window_cost(&series.values[a..b], &table))
}

/// Cost via per-id counts: sum_{s,t} k = sum_{u,v} c_u c_v k(u,v).
fn window_cost(window: &[u32], table: &ExpTable) -> f64 {
    let len = window.len() as f64;
    let mut counts: Vec<(u32, f64)> = Vec::new();
    let mut sorted = window.to_vec();
    sorted.sort_unstable();
    for v in sorted {
        match counts.last_mut() {
            Some((u, c)) if *u == v => *c += 1.0,
            _ => counts.push((v, 1.0)),
        }
    }
    let mut pair_sum = 0.0;
    for (i, &(u, cu)) in counts.iter().enumerate() {
        pair_sum += cu * cu; // k(u,u) = 1
        for &(v, cv) in counts.iter().skip(i + 1) {
            pair_sum += 2.0 * cu * cv * table.k(u, v);
        }
    }
    len - pair_sum / len
}

/// Bandwidth heuristic: 1 / median of the nonzero squared differences over
/// all event pairs. The median is taken exactly over value pairs weighted by
/// their occurrence counts, which is identical to scanning all O(n^2) event
/// pairs. Errors when the series is constant.
pub fn choose_gamma(series: &LabeledSeries) -> Result<CostModel> {
    if series.len() < 2 {
        return Err(Error::invalid("series too short to pick a bandwidth"));
    }
    let counts = &series.counts;
    // (squared difference, number of event pairs at that difference)
    let mut diffs: std::collections::BTreeMap<u64, u128> = std::collections::BTreeMap::new();
    for u in 0..counts.len() {
        for v in (u + 1)..counts.len() {
            let d = (v - u) as u64;
            *diffs.entry(d * d).or_insert(0) += counts[u] as u128 * counts[v] as u128;
        }
    }
    let total: u128 = diffs.values().sum();
    if total == 0 {
        return Err(Error::invalid(
            "constant series: every window already has zero cost, segmentation is vacuous",
        ));
    }
    let median = weighted_median(&diffs, total);
    Ok(CostModel {
        gamma: 1.0 / median,
    })
}

/// Median of the expanded multiset {d2 with multiplicity w}: middle element,
/// or the mean of the two middle elements when the total weight is even.
fn weighted_median(diffs: &std::collections::BTreeMap<u64, u128>, total: u128) -> f64 {
    let targets: [u128; 2] = if total % 2 == 1 {
        [total / 2, total / 2]
    } else {
        [total / 2 - 1, total / 2]
    };
    let mut picked = [0f64; 2];
    let mut cum = 0u128;
    let mut ti = 0;
    for (&d2, &w) in diffs {
        cum += w;
        while ti < 2 && targets[ti] < cum {
            picked[ti] = d2 as f64;
            ti += 1;
        }
        if ti == 2 {
            break;
        }
    }
    (picked[0] + picked[1]) / 2.0
}

/// Greedy recursive splitting. For the current window the admissible split
/// with the largest cost reduction is accepted when the reduction exceeds
/// `penalty`; both halves are then revisited. Ties go to the smallest index.
pub fn binary_segmentation(
    series: &LabeledSeries,
    penalty: f64,
    model: &CostModel,
    min_size: usize,
) -> Result<Segmentation> {
    if penalty <= 0.0 {
        return Err(Error::invalid("penalty must be positive"));
    }
    if min_size < 2 {
        return Err(Error::invalid("min_size must be at least 2"));
    }
    if series.len() < 2 * min_size {
        return Err(Error::invalid(format!(
            "series of {} events cannot hold two segments of {min_size}",
            series.len()
        )));
    }
    let table = ExpTable::new(model.gamma, series.alphabet_size());
    let mut interior: Vec<usize> = Vec::new();
    let mut queue: Vec<(usize, usize)> = vec![(0, series.len())];
    while let Some((a, b)) = queue.pop() {
        if let Some((t, gain)) = best_split(&series.values, a, b, &table, min_size) {
            if gain > penalty {
                interior.push(t);
                queue.push((a, t));
                queue.push((t, b));
            }
        }
    }
    interior.sort_unstable();
    let mut breakpoints = interior.clone();
    breakpoints.push(series.len());
    let bar_breaks: Vec<u32> = interior.iter().map(|&i| series.bars[i]).collect();
    let mut segments = Vec::with_capacity(breakpoints.len());
    let mut start = 0usize;
    for &end in &breakpoints {
        segments.push((start, end));
        start = end;
    }
    Ok(Segmentation {
        breakpoints,
        bar_breaks,
        penalty,
        segments,
    })
}

/// Best admissible split of `[a, b)`: maximizes
/// `cost(a,b) - cost(a,t) - cost(t,b)` over `a+min <= t <= b-min`.
/// Returns None when the window is too short to split.
///
/// Left and right part costs are produced by incremental sweeps, O(n * K)
/// in the window length n and alphabet K.
fn best_split(
    values: &[u32],
    a: usize,
    b: usize,
    table: &ExpTable,
    min_size: usize,
) -> Option<(usize, f64)> {
    let n = b - a;
    if n < 2 * min_size {
        return None;
    }
    let alphabet = table.table.len();

    // pair_sum[t-a] for windows [a, t); grown one event at a time.
    let mut left_pair = vec![0.0f64; n + 1];
    {
        let mut counts = vec![0f64; alphabet];
        let mut s = 0.0;
        for (i, &v) in values[a..b].iter().enumerate() {
            let mut cross = 0.0;
            for (u, &cu) in counts.iter().enumerate() {
                if cu > 0.0 {
                    cross += cu * table.k(u as u32, v);
                }
            }
            s += 2.0 * cross + 1.0;
            counts[v as usize] += 1.0;
            left_pair[i + 1] = s;
        }
    }
    // pair_sum for windows [t, b), grown from the right edge.
    let mut right_pair = vec![0.0f64; n + 1];
    {
        let mut counts = vec![0f64; alphabet];
        let mut s = 0.0;
        for (i, &v) in values[a..b].iter().enumerate().rev() {
            let mut cross = 0.0;
            for (u, &cu) in counts.iter().enumerate() {
                if cu > 0.0 {
                    cross += cu * table.k(u as u32, v);
                }
            }
            s += 2.0 * cross + 1.0;
            counts[v as usize] += 1.0;
            right_pair[i] = s;
        }
    }

    let cost = |pair_sum: f64, len: usize| len as f64 - pair_sum / len as f64;
    let full = cost(left_pair[n], n);
    let mut best: Option<(usize, f64)> = None;
    for t in (a + min_size)..=(b - min_size) {
        let g = full - cost(left_pair[t - a], t - a) - cost(right_pair[t - a], b - t);
        let better = match best {
            None => true,
            Some((_, bg)) => g > bg,
        };
        if better {
            best = Some((t, g));
        }
    }
    best
}

/// Bar numbers at which new segments start (interior breakpoints only).
pub fn breakpoints_to_bars(seg: &Segmentation, series: &LabeledSeries) -> Vec<u32> {
    seg.breakpoints
        .iter()
        .filter(|&&b| b < series.len())
        .map(|&b| series.bars[b])
        .collect()
}
