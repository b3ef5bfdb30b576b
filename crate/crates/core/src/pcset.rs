//! Pitch-class sets in normal order, minimal voice-leading distance, and the
//! operators that move one set to another.
//!
//! Pitch classes are integers mod `tet` (12 by default, C = 0). A set is kept
//! in normal order: the rotation of its ascending circular ordering with the
//! smallest first-to-last span, ties broken by successively smaller intervals
//! from the first element, final tie by lowest first pitch class.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tones per octave.
pub const DEFAULT_TET: u32 = 12;

/// A normal-ordered set of pitch classes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PcSet {
    pcs: Vec<u32>,
    tet: u32,
}

/// Signed per-voice semitone steps taking one voicing to another.
/// The Euclidean norm of the steps is the voice-leading distance.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VlVector {
    pub steps: Vec<i64>,
}

/// Chord quality recognized by `PcSet::classify`, 12-TET only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChordQuality {
    MajorTriad,
    MinorTriad,
    DominantSeventh,
    MajorDyad,
    Other,
}

impl PcSet {
    /// Reduce arbitrary pitches mod `tet`, drop duplicates, normal-order.
    /// Empty input yields the empty set.
    pub fn new(pitches: &[i64], tet: u32) -> Result<PcSet> {
        if tet == 0 {
            return Err(Error::invalid("tet must be >= 1"));
        }
        let t = tet as i64;
        let mut pcs: Vec<u32> = pitches.iter().map(|&p| (p.rem_euclid(t)) as u32).collect();
        pcs.sort_unstable();
        pcs.dedup();
        Ok(PcSet {
            pcs: normal_order_of_sorted(&pcs, tet),
            tet,
        })
    }

    /// 12-TET constructor; cannot fail.
    pub fn tet12(pitches: &[i64]) -> PcSet {
        PcSet::new(pitches, DEFAULT_TET).expect("tet 12 is valid")
    }

    pub fn pcs(&self) -> &[u32] {
        &self.pcs
    }

    pub fn tet(&self) -> u32 {
        self.tet
    }

    pub fn len(&self) -> usize {
        self.pcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pcs.is_empty()
    }

    pub fn contains(&self, pc: u32) -> bool {
        self.pcs.contains(&pc)
    }

    /// Transpose by `n` semitones and re-normalize.
    pub fn transpose(&self, n: i64) -> PcSet {
        let shifted: Vec<i64> = self.pcs.iter().map(|&p| p as i64 + n).collect();
        PcSet::new(&shifted, self.tet).expect("tet unchanged")
    }

    /// Minimal Euclidean voice-leading distance to `other`.
    ///
    /// Minimum of sqrt(sum of squared per-voice steps) over all cyclic
    /// matchings and per-voice octave shifts; unequal cardinalities are
    /// handled by duplicating pitches of the smaller set over all choices.
    /// Symmetric in its arguments.
    pub fn vl_distance(&self, other: &PcSet) -> Result<f64> {
        let (d2, _) = self.best_voice_leading(other)?;
        Ok((d2 as f64).sqrt())
    }

    /// The steps realizing the minimal voice leading from `self` to `other`,
    /// aligned to the normal order of `self` (duplicated in place when `other`
    /// is larger). The vector's norm equals `vl_distance` exactly.
    pub fn vl_operator(&self, other: &PcSet) -> Result<VlVector> {
        let (_, steps) = self.best_voice_leading(other)?;
        Ok(VlVector { steps })
    }

    /// Every distinct set reachable by adding the given magnitudes, each with
    /// either sign, to some choice of distinct voices. Unspecified voices stay
    /// put. Results are normal-ordered and deduplicated.
    pub fn apply_distance_operator(&self, magnitudes: &[u32]) -> Result<BTreeSet<PcSet>> {
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        if magnitudes.len() > self.len() {
            return Err(Error::invalid(format!(
                "{} magnitudes but only {} voices",
                magnitudes.len(),
                self.len()
            )));
        }
        let mut out = BTreeSet::new();
        let positions: Vec<usize> = (0..self.len()).collect();
        for perm in k_permutations(&positions, magnitudes.len()) {
            let signs = magnitudes.len();
            for mask in 0..(1u32 << signs) {
                let mut pitches: Vec<i64> = self.pcs.iter().map(|&p| p as i64).collect();
                for (j, &pos) in perm.iter().enumerate() {
                    let m = magnitudes[j] as i64;
                    if mask & (1 << j) == 0 {
                        pitches[pos] += m;
                    } else {
                        pitches[pos] -= m;
                    }
                }
                out.insert(PcSet::new(&pitches, self.tet)?);
            }
        }
        Ok(out)
    }

    /// Move each voice by the corresponding signed step and re-normalize.
    pub fn apply_vl_steps(&self, steps: &[i64]) -> Result<PcSet> {
        if steps.len() != self.len() {
            return Err(Error::invalid(format!(
                "{} steps for {} voices",
                steps.len(),
                self.len()
            )));
        }
        let pitches: Vec<i64> = self
            .pcs
            .iter()
            .zip(steps)
            .map(|(&p, &s)| p as i64 + s)
            .collect();
        PcSet::new(&pitches, self.tet)
    }

    /// Match against major/minor triad, dominant seventh and major-third dyad
    /// templates under transposition. Returns the quality and its root.
    /// Anything else (or a non-12 temperament) is `Other`.
    pub fn classify(&self) -> (ChordQuality, Option<u32>) {
        if self.tet != DEFAULT_TET {
            return (ChordQuality::Other, None);
        }
        const TEMPLATES: [(ChordQuality, &[u32]); 4] = [
            (ChordQuality::MajorTriad, &[0, 4, 7]),
            (ChordQuality::MinorTriad, &[0, 3, 7]),
            (ChordQuality::DominantSeventh, &[0, 4, 7, 10]),
            (ChordQuality::MajorDyad, &[0, 4]),
        ];
        for &(quality, template) in &TEMPLATES {
            if template.len() != self.len() {
                continue;
            }
            for &root in &self.pcs {
                let expect: BTreeSet<u32> =
                    template.iter().map(|&i| (root + i) % DEFAULT_TET).collect();
                let have: BTreeSet<u32> = self.pcs.iter().copied().collect();
                if expect == have {
                    return (quality, Some(root));
                }
            }
        }
        (ChordQuality::Other, None)
    }

    /// Compact text form, e.g. `[0,4,7]`.
    pub fn label(&self) -> String {
        let inner: Vec<String> = self.pcs.iter().map(|p| p.to_string()).collect();
        format!("[{}]", inner.join(","))
    }

    /// Minimal voice leading as (squared distance, steps from self to other).
    /// Steps are per voice of self's voicing after any duplication.
    fn best_voice_leading(&self, other: &PcSet) -> Result<(u64, Vec<i64>)> {
        if self.tet != other.tet {
            return Err(Error::TetMismatch {
                left: self.tet,
                right: other.tet,
            });
        }
        if self.is_empty() || other.is_empty() {
            return Err(Error::EmptySet);
        }
        let tet = self.tet;
        let mut best: Option<(u64, Vec<i64>)> = None;
        let consider = |best: &mut Option<(u64, Vec<i64>)>, cand: (u64, Vec<i64>)| {
            let better = match best {
                None => true,
                Some(b) => cand.0 < b.0 || (cand.0 == b.0 && cand.1 < b.1),
            };
            if better {
                *best = Some(cand);
            }
        };
        if self.len() == other.len() {
            consider(&mut best, min_over_rotations(&self.pcs, &other.pcs, tet));
        } else if self.len() < other.len() {
            for dup in duplications(&self.pcs, other.len()) {
                consider(&mut best, min_over_rotations(&dup, &other.pcs, tet));
            }
        } else {
            for dup in duplications(&other.pcs, self.len()) {
                consider(&mut best, min_over_rotations(&self.pcs, &dup, tet));
            }
        }
        Ok(best.expect("non-empty operands always admit a voice leading"))
    }
}

impl fmt::Display for PcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl VlVector {
    pub fn norm(&self) -> f64 {
        let sq: i64 = self.steps.iter().map(|&s| s * s).sum();
        (sq as f64).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.steps.iter().all(|&s| s == 0)
    }

    /// Order-free form (sorted steps); identifies the operator regardless of
    /// which voice carries which step.
    pub fn canonical(&self) -> Vec<i64> {
        let mut c = self.steps.clone();
        c.sort_unstable();
        c
    }

    /// Unsigned step sizes, sorted.
    pub fn magnitudes(&self) -> Vec<u32> {
        let mut m: Vec<u32> = self
            .steps
            .iter()
            .map(|&s| s.unsigned_abs() as u32)
            .collect();
        m.sort_unstable();
        m
    }
}

impl fmt::Display for VlVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner: Vec<String> = self.steps.iter().map(|s| s.to_string()).collect();
        write!(f, "({})", inner.join(","))
    }
}

/// Normal order of already sorted, deduplicated pitch classes.
fn normal_order_of_sorted(pcs: &[u32], tet: u32) -> Vec<u32> {
    let n = pcs.len();
    if n <= 1 {
        return pcs.to_vec();
    }
    let mut best_rot = 0usize;
    let mut best_key: Option<Vec<u32>> = None;
    for r in 0..n {
        let first = pcs[r];
        // Key: span, then intervals from the first element in shrinking
        // position order, then the first pitch class itself.
        let mut key = Vec::with_capacity(n);
        for k in (1..n).rev() {
            key.push((pcs[(r + k) % n] + tet - first) % tet);
        }
        key.push(first);
        if best_key.as_ref().is_none_or(|b| key < *b) {
            best_key = Some(key);
            best_rot = r;
        }
    }
    (0..n).map(|k| pcs[(best_rot + k) % n]).collect()
}

/// Signed step from `a` to `b` on the pitch-class circle, at most half an
/// octave in magnitude; the upward direction wins the half-octave tie.
fn centered_step(a: u32, b: u32, tet: u32) -> i64 {
    let t = ((b + tet - a) % tet) as i64;
    if 2 * t <= tet as i64 {
        t
    } else {
        t - tet as i64
    }
}

/// Minimal squared distance and its steps over cyclic rotations of `y`
/// against `x`. Requires equal lengths. Ties resolved toward the
/// lexicographically smallest step vector.
fn min_over_rotations(x: &[u32], y: &[u32], tet: u32) -> (u64, Vec<i64>) {
    let n = x.len();
    debug_assert_eq!(n, y.len());
    let mut best: Option<(u64, Vec<i64>)> = None;
    for r in 0..n {
        let steps: Vec<i64> = (0..n)
            .map(|i| centered_step(x[i], y[(i + r) % n], tet))
            .collect();
        let d2: u64 = steps.iter().map(|&s| (s * s) as u64).sum();
        let better = match &best {
            None => true,
            Some((bd, bs)) => d2 < *bd || (d2 == *bd && steps < *bs),
        };
        if better {
            best = Some((d2, steps));
        }
    }
    best.expect("at least one rotation")
}

/// All expansions of `small` to `target` voices where each pitch appears at
/// least once and copies sit adjacent, preserving the circular order.
fn duplications(small: &[u32], target: usize) -> Vec<Vec<u32>> {
    let m = small.len();
    debug_assert!(m < target);
    let mut out = Vec::new();
    let mut counts = vec![1usize; m];
    fn rec(
        small: &[u32],
        counts: &mut Vec<usize>,
        idx: usize,
        left: usize,
        out: &mut Vec<Vec<u32>>,
    ) {
        if idx == small.len() {
            if left == 0 {
                let mut v = Vec::new();
                for (i, &c) in counts.iter().enumerate() {
                    for _ in 0..c {
                        v.push(small[i]);
                    }
                }
                out.push(v);
            }
            return;
        }
        for extra in 0..=left {
            counts[idx] = 1 + extra;
            rec(small, counts, idx + 1, left - extra, out);
        }
        counts[idx] = 1;
    }
    rec(small, &mut counts, 0, target - m, &mut out);
    out
}

/// Ordered selections of `k` distinct elements.
fn k_permutations<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    let mut used = vec![false; items.len()];
    fn rec<T: Copy>(
        items: &[T],
        k: usize,
        used: &mut Vec<bool>,
        current: &mut Vec<T>,
        out: &mut Vec<Vec<T>>,
    ) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in 0..items.len() {
            if !used[i] {
                used[i] = true;
                current.push(items[i]);
                rec(items, k, used, current, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    rec(items, k, &mut used, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pcs(v: &[i64]) -> PcSet {
        PcSet::tet12(v)
    }

    #[test]
    fn normal_order_picks_most_compact_rotation() {
        assert_eq!(pcs(&[7, 4, 0]).pcs(), &[0, 4, 7]);
        assert_eq!(pcs(&[11, 2, 7]).pcs(), &[7, 11, 2]);
        assert_eq!(pcs(&[0, 5, 7]).pcs(), &[5, 7, 0]);
        assert_eq!(pcs(&[1, 3, 7, 10]).pcs(), &[7, 10, 1, 3]);
        assert_eq!(pcs(&[0, 4, 7, 10]).pcs(), &[4, 7, 10, 0]);
    }

    #[test]
    fn normal_order_reduces_and_dedupes() {
        assert_eq!(pcs(&[60, 64, 67]).pcs(), &[0, 4, 7]);
        assert_eq!(pcs(&[-1, 11, 23]).pcs(), &[11]);
        assert_eq!(pcs(&[]).pcs(), &[] as &[u32]);
    }

    #[test]
    fn normal_order_is_idempotent() {
        let a = pcs(&[11, 2, 7]);
        let again = PcSet::new(&a.pcs().iter().map(|&p| p as i64).collect::<Vec<_>>(), 12).unwrap();
        assert_eq!(a, again);
    }

    #[test]
    fn vl_distance_identity_is_zero() {
        let a = pcs(&[0, 4, 7]);
        assert_eq!(a.vl_distance(&a).unwrap(), 0.0);
    }

    #[test]
    fn vl_distance_c_major_to_g_major() {
        let c = pcs(&[0, 4, 7]);
        let g = pcs(&[7, 11, 2]);
        let d = c.vl_distance(&g).unwrap();
        assert!((d - 5f64.sqrt()).abs() < 1e-12, "got {d}");
    }

    #[test]
    fn vl_distance_single_semitone() {
        let d = pcs(&[0, 4, 7]).vl_distance(&pcs(&[0, 3, 7])).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn vl_distance_unequal_cardinality() {
        // [0,4,7] vs [0,4]: duplicate one pitch of the dyad; best is 0,4,4
        // against 0,4,7 for distance 3.
        let d = pcs(&[0, 4, 7]).vl_distance(&pcs(&[0, 4])).unwrap();
        assert_eq!(d, 3.0);
    }

    #[test]
    fn vl_distance_rejects_mixed_temperaments() {
        let a = pcs(&[0, 4, 7]);
        let b = PcSet::new(&[0, 4, 7], 19).unwrap();
        assert!(matches!(
            a.vl_distance(&b),
            Err(Error::TetMismatch {
                left: 12,
                right: 19
            })
        ));
    }

    #[test]
    fn vl_distance_rejects_empty() {
        let a = pcs(&[0, 4, 7]);
        let e = pcs(&[]);
        assert!(matches!(a.vl_distance(&e), Err(Error::EmptySet)));
    }

    #[test]
    fn vl_operator_c_major_to_g_major() {
        let c = pcs(&[0, 4, 7]);
        let g = pcs(&[7, 11, 2]);
        let op = c.vl_operator(&g).unwrap();
        assert_eq!(op.steps, vec![-1, -2, 0]);
        assert!((op.norm() - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn vl_operator_identity_is_zero_vector() {
        let a = pcs(&[0, 4, 7]);
        let op = a.vl_operator(&a).unwrap();
        assert!(op.is_zero());
        assert_eq!(op.steps.len(), 3);
    }

    #[test]
    fn vl_operator_lowers_the_third() {
        let op = pcs(&[0, 4, 7]).vl_operator(&pcs(&[0, 3, 7])).unwrap();
        assert_eq!(op.steps, vec![0, -1, 0]);
    }

    #[test]
    fn vl_operator_steps_reach_the_target() {
        let c = pcs(&[0, 4, 7]);
        let g = pcs(&[7, 11, 2]);
        let op = c.vl_operator(&g).unwrap();
        assert_eq!(c.apply_vl_steps(&op.steps).unwrap(), g);
    }

    #[test]
    fn single_step_neighbours_of_c_major() {
        let got = pcs(&[0, 4, 7]).apply_distance_operator(&[1]).unwrap();
        let want: BTreeSet<PcSet> = [
            pcs(&[0, 3, 7]),
            pcs(&[0, 4, 6]),
            pcs(&[0, 4, 8]),
            pcs(&[5, 7, 0]),
            pcs(&[1, 4, 7]),
            pcs(&[4, 7, 11]),
        ]
        .into_iter()
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn zero_operator_is_identity() {
        let c = pcs(&[0, 4, 7]);
        let got = c.apply_distance_operator(&[0]).unwrap();
        assert_eq!(got.len(), 1);
        assert!(got.contains(&c));
    }

    #[test]
    fn two_step_neighbours_of_c_major() {
        // Frozen from a brute-force scan over position pairs and signs.
        let got = pcs(&[0, 4, 7]).apply_distance_operator(&[1, 1]).unwrap();
        let want: BTreeSet<PcSet> = [
            &[0i64, 3, 6][..],
            &[0, 5, 6],
            &[1, 3, 7],
            &[1, 4, 6],
            &[1, 4, 8],
            &[1, 5, 7],
            &[3, 7, 11],
            &[4, 6, 11],
            &[4, 8, 11],
            &[5, 7, 11],
            &[5, 8, 0],
            &[8, 0, 3],
        ]
        .into_iter()
        .map(pcs)
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn too_many_magnitudes_is_an_error() {
        assert!(pcs(&[0, 4]).apply_distance_operator(&[1, 1, 1]).is_err());
    }

    #[test]
    fn classify_triads_and_sevenths() {
        assert_eq!(
            pcs(&[7, 11, 2]).classify(),
            (ChordQuality::MajorTriad, Some(7))
        );
        assert_eq!(
            pcs(&[7, 10, 2]).classify(),
            (ChordQuality::MinorTriad, Some(7))
        );
        assert_eq!(
            pcs(&[3, 7, 10, 1]).classify(),
            (ChordQuality::DominantSeventh, Some(3))
        );
        assert_eq!(pcs(&[3, 7]).classify(), (ChordQuality::MajorDyad, Some(3)));
        assert_eq!(pcs(&[0, 1, 2]).classify(), (ChordQuality::Other, None));
    }

    #[test]
    fn labels_are_compact() {
        assert_eq!(pcs(&[7, 11, 2]).label(), "[7,11,2]");
        assert_eq!(pcs(&[]).label(), "[]");
    }
}
