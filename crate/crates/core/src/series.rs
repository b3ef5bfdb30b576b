//! Integer encoding of a chord sequence and the occurrence-threshold filter.
//!
//! Ids are assigned by descending occurrence count (ties by first
//! appearance), so id 0 is always the most frequent pcset. Filtering drops
//! every event whose pcset occurs fewer than `threshold * max_count` times
//! (boundary kept) and re-indexes the survivors by the same rule.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ChordSequence;
use crate::pcset::PcSet;

/// An integer-encoded chord series with its id dictionary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LabeledSeries {
    /// Per-event pcset id.
    pub values: Vec<u32>,
    /// Per-event bar number, parallel to `values`.
    pub bars: Vec<u32>,
    /// id -> pcset; ids are dense 0..K.
    pub dictionary: Vec<PcSet>,
    /// id -> occurrence count; sums to `values.len()`.
    pub counts: Vec<u32>,
}

impl LabeledSeries {
    /// Encode (pcset, bar) events. Errors on empty input.
    pub fn from_events<I>(events: I) -> Result<LabeledSeries>
    where
        I: IntoIterator<Item = (PcSet, u32)>,
    {
        let events: Vec<(PcSet, u32)> = events.into_iter().collect();
        if events.is_empty() {
            return Err(Error::invalid("empty chord sequence"));
        }
        let mut count: BTreeMap<&PcSet, u32> = BTreeMap::new();
        let mut first_seen: BTreeMap<&PcSet, usize> = BTreeMap::new();
        for (i, (pcset, _)) in events.iter().enumerate() {
            *count.entry(pcset).or_insert(0) += 1;
            first_seen.entry(pcset).or_insert(i);
        }
        let mut order: Vec<&PcSet> = count.keys().copied().collect();
        order.sort_by_key(|p| (std::cmp::Reverse(count[p]), first_seen[p]));
        let id_of: BTreeMap<&PcSet, u32> = order
            .iter()
            .enumerate()
            .map(|(id, &p)| (p, id as u32))
            .collect();
        let values: Vec<u32> = events.iter().map(|(p, _)| id_of[p]).collect();
        let bars: Vec<u32> = events.iter().map(|&(_, b)| b).collect();
        let counts: Vec<u32> = order.iter().map(|p| count[*p]).collect();
        let dictionary: Vec<PcSet> = order.into_iter().cloned().collect();
        Ok(LabeledSeries {
            values,
            bars,
            dictionary,
            counts,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of distinct pcsets.
    pub fn alphabet_size(&self) -> usize {
        self.dictionary.len()
    }

    /// id -> count pairs, id-ordered (id order is descending count).
    pub fn histogram(&self) -> Vec<(u32, u32)> {
        self.counts
            .iter()
            .enumerate()
            .map(|(id, &c)| (id as u32, c))
            .collect()
    }

    /// Drop events whose pcset count falls below `threshold * max_count`;
    /// survivors are re-encoded from scratch. Bars are carried over.
    pub fn filter(&self, threshold: f64) -> Result<LabeledSeries> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::invalid(format!(
                "threshold {threshold} outside [0, 1]"
            )));
        }
        let max = *self.counts.iter().max().expect("non-empty series") as f64;
        let keep: Vec<bool> = self
            .counts
            .iter()
            .map(|&c| c as f64 >= threshold * max)
            .collect();
        let survivors: Vec<(PcSet, u32)> = self
            .values
            .iter()
            .zip(&self.bars)
            .filter(|(&v, _)| keep[v as usize])
            .map(|(&v, &b)| (self.dictionary[v as usize].clone(), b))
            .collect();
        if survivors.is_empty() {
            return Err(Error::invalid("no events survive the filter"));
        }
        LabeledSeries::from_events(survivors)
    }
}

/// Encode a chordified score.
pub fn build_series(seq: &ChordSequence) -> Result<LabeledSeries> {
    LabeledSeries::from_events(seq.events.iter().map(|e| (e.pcset.clone(), e.bar)))
}
