//! Tonal region labeling: map each layer's prevalent chord to a key, spell
//! the key as a Roman numeral relative to the global key, and score the
//! result against an annotation file.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{degree_stats, LayerNetwork, ScoreNetwork};
use crate::pcset::{ChordQuality, PcSet};
use crate::segment::Segmentation;
use crate::series::LabeledSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Major,
    Minor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Key {
    pub tonic: u32,
    pub mode: Mode,
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [&str; 12] = [
            "C", "Db", "D", "Eb", "E", "F", "Gb", "G", "Ab", "A", "Bb", "B",
        ];
        let mode = match self.mode {
            Mode::Major => "major",
            Mode::Minor => "minor",
        };
        write!(f, "{} {}", NAMES[self.tonic as usize % 12], mode)
    }
}

/// Scale-degree spelling per semitone distance from the global tonic.
/// The defaults prefer #IV and #V over their flat spellings; both are
/// configurable through `with_overrides`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpellingTable {
    labels: [String; 12],
}

impl Default for SpellingTable {
    fn default() -> Self {
        let defaults = [
            "I", "bII", "II", "bIII", "III", "IV", "#IV", "V", "#V", "VI", "bVII", "VII",
        ];
        SpellingTable {
            labels: defaults.map(str::to_string),
        }
    }
}

impl SpellingTable {
    /// Apply overrides in "semitone=label" form, comma-separated,
    /// e.g. `"8=bVI,6=bV"`.
    pub fn with_overrides(spec: &str) -> Result<SpellingTable> {
        let mut table = SpellingTable::default();
        for part in spec.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (d, label) = part
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("bad spelling override {part:?}")))?;
            let d: usize = d
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad semitone in {part:?}")))?;
            if d >= 12 {
                return Err(Error::invalid(format!("semitone {d} out of range")));
            }
            table.labels[d] = label.trim().to_string();
        }
        Ok(table)
    }

    pub fn label(&self, semitones: u32) -> &str {
        &self.labels[(semitones % 12) as usize]
    }
}

/// Label emitted when a layer's prevalent chord fits no chord template.
pub const UNCLASSIFIED_LABEL: &str = "@none";

/// One row of the region table. `bar_start..bar_end` is the display range
/// (adjacent rows share their boundary bar); `vote_bars` is the disjoint
/// range of bars whose first chord falls in this row's segment, which is
/// what bar-weighted agreement votes with.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegionRow {
    pub section: usize,
    pub bar_start: u32,
    pub bar_end: u32,
    pub vote_bars: Option<(u32, u32)>,
    pub prevalent: PcSet,
    pub key: Option<Key>,
    pub label: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegionTable {
    pub global: Key,
    pub rows: Vec<RegionRow>,
}

/// Reference regions: contiguous bar ranges with labels, plus the global key
/// they are spelled against.
#[derive(Clone, Debug)]
pub struct AnnotationFile {
    pub global: Key,
    /// (start bar, end bar, label), inclusive ranges, sorted.
    pub rows: Vec<(u32, u32, String)>,
}

/// The layer's most-visited classifiable chord (major/minor triad, dominant
/// seventh or major-third dyad); ties by higher total degree, then lower id.
/// Falls back to the most-visited node of any kind, flagged unclassified.
pub fn prevalent_chord(net: &ScoreNetwork) -> (u32, bool) {
    let stats = degree_stats(net);
    let pick = |ids: &mut dyn Iterator<Item = u32>| -> Option<u32> {
        ids.min_by_key(|id| {
            (
                std::cmp::Reverse(net.nodes[id].count),
                std::cmp::Reverse(stats.per_node[id].total),
                *id,
            )
        })
    };
    let mut classifiable = net
        .nodes
        .iter()
        .filter(|(_, info)| info.pcset.classify().0 != ChordQuality::Other)
        .map(|(&id, _)| id);
    if let Some(id) = pick(&mut classifiable) {
        return (id, true);
    }
    let mut all = net.nodes.keys().copied();
    (pick(&mut all).expect("non-empty network"), false)
}

/// Key implied by a classifiable chord: triads name their own key, a
/// dominant seventh names the key a fourth above its root, a major-third
/// dyad the major key on its lower note.
pub fn chord_to_key(chord: &PcSet) -> Result<Key> {
    let (quality, root) = chord.classify();
    let root = root.ok_or_else(|| Error::invalid(format!("unclassified chord {chord}")))?;
    Ok(match quality {
        ChordQuality::MajorTriad | ChordQuality::MajorDyad => Key {
            tonic: root,
            mode: Mode::Major,
        },
        ChordQuality::MinorTriad => Key {
            tonic: root,
            mode: Mode::Minor,
        },
        ChordQuality::DominantSeventh => Key {
            tonic: (root + 5) % 12,
            mode: Mode::Major,
        },
        ChordQuality::Other => unreachable!("root present implies a quality"),
    })
}

/// Roman-numeral spelling of `local` relative to `global`; lowercase iff the
/// local mode is minor.
pub fn region_label(global: &Key, local: &Key, table: &SpellingTable) -> String {
    let d = (local.tonic + 12 - global.tonic) % 12;
    let label = table.label(d);
    match local.mode {
        Mode::Major => label.to_string(),
        Mode::Minor => label.to_lowercase(),
    }
}

/// Overall key: the prevalent chord of the full static network.
pub fn global_key(net: &ScoreNetwork) -> Result<Key> {
    let (id, classified) = prevalent_chord(net);
    if !classified {
        return Err(Error::invalid(format!(
            "prevalent chord {} fits no key template",
            net.nodes[&id].pcset
        )));
    }
    chord_to_key(&net.nodes[&id].pcset)
}

/// One row per layer. Bar ranges run from each segment's first bar to the
/// next segment's first bar (the final row ends at the last bar), so
/// boundary bars appear in both adjoining rows.
pub fn build_region_table(
    layers: &[LayerNetwork],
    seg: &Segmentation,
    series: &LabeledSeries,
    global: Key,
    table: &SpellingTable,
) -> RegionTable {
    debug_assert_eq!(layers.len(), seg.segments.len());
    // A bar belongs to the segment holding its first chord.
    let mut owned: Vec<Option<(u32, u32)>> = vec![None; seg.segments.len()];
    let mut seg_idx = 0usize;
    for (idx, &bar) in series.bars.iter().enumerate() {
        if idx > 0 && series.bars[idx - 1] == bar {
            continue;
        }
        while seg_idx < seg.segments.len() && idx >= seg.segments[seg_idx].1 {
            seg_idx += 1;
        }
        if seg_idx >= owned.len() {
            break;
        }
        owned[seg_idx] = Some(match owned[seg_idx] {
            None => (bar, bar),
            Some((lo, hi)) => (lo.min(bar), hi.max(bar)),
        });
    }

    let mut rows = Vec::with_capacity(layers.len());
    for (i, layer) in layers.iter().enumerate() {
        let (id, classified) = prevalent_chord(&layer.net);
        let pcset = layer.net.nodes[&id].pcset.clone();
        let (key, label) = if classified {
            let k = chord_to_key(&pcset).expect("classified chord maps to a key");
            let l = region_label(&global, &k, table);
            (Some(k), l)
        } else {
            (None, UNCLASSIFIED_LABEL.to_string())
        };
        let bar_start = layer.bar_range.0;
        let bar_end = if i + 1 < layers.len() {
            layers[i + 1].bar_range.0
        } else {
            series.bars.last().copied().unwrap_or(bar_start)
        };
        rows.push(RegionRow {
            section: i,
            bar_start,
            bar_end,
            vote_bars: owned[i],
            prevalent: pcset,
            key,
            label,
        });
    }
    RegionTable { global, rows }
}

impl RegionTable {
    /// Label governing a bar: the last row whose owned bars begin at or
    /// before it (a region extends until the next one claims a bar). Bars
    /// outside the table's domain get none.
    pub fn label_at(&self, bar: u32) -> Option<&str> {
        if bar > self.rows.last()?.bar_end {
            return None;
        }
        let mut current: Option<&str> = None;
        for row in &self.rows {
            match row.vote_bars {
                Some((lo, _)) if lo <= bar => current = Some(&row.label),
                Some(_) => break,
                None => continue,
            }
        }
        current
    }

    pub fn bar_domain(&self) -> Option<(u32, u32)> {
        let first = self
            .rows
            .iter()
            .find_map(|r| r.vote_bars.map(|(lo, _)| lo))
            .unwrap_or(self.rows.first()?.bar_start);
        let last = self.rows.last()?.bar_end;
        Some((first, last))
    }
}

impl AnnotationFile {
    /// Parse the CSV form: a `global_key=<tonic><mode>` header line, then
    /// `start_bar,end_bar,label` rows. A column-header line is tolerated.
    pub fn parse(text: &str) -> Result<AnnotationFile> {
        let mut global: Option<Key> = None;
        let mut rows: Vec<(u32, u32, String)> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("global_key=") {
                global = Some(parse_key(rest.trim())?);
                continue;
            }
            if ln <= 1 && line.to_lowercase().starts_with("start") {
                continue; // column header
            }
            let mut parts = line.splitn(3, ',');
            let start = parts
                .next()
                .and_then(|s| s.trim().parse::<u32>().ok())
                .ok_or_else(|| Error::parse(format!("bad start bar on line {}", ln + 1)))?;
            let end = parts
                .next()
                .and_then(|s| s.trim().parse::<u32>().ok())
                .ok_or_else(|| Error::parse(format!("bad end bar on line {}", ln + 1)))?;
            let label = parts
                .next()
                .map(|s| s.trim().trim_matches('"').to_string())
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::parse(format!("missing label on line {}", ln + 1)))?;
            if end < start {
                return Err(Error::parse(format!(
                    "range {start}-{end} reversed on line {}",
                    ln + 1
                )));
            }
            rows.push((start, end, label));
        }
        let global = global.ok_or_else(|| Error::parse("missing global_key= header line"))?;
        if rows.is_empty() {
            return Err(Error::parse("no annotation rows"));
        }
        for w in rows.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::parse("annotation rows must be sorted by start bar"));
            }
            if w[1].0 < w[0].1 {
                return Err(Error::parse(format!(
                    "annotation ranges {}-{} and {}-{} overlap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(AnnotationFile { global, rows })
    }

    pub fn label_at(&self, bar: u32) -> Option<&str> {
        self.rows
            .iter()
            .rev()
            .find(|&&(s, e, _)| s <= bar && bar <= e)
            .map(|(_, _, l)| l.as_str())
    }

    pub fn bar_domain(&self) -> (u32, u32) {
        (self.rows[0].0, self.rows[self.rows.len() - 1].1)
    }
}

/// Key token: note name with optional accidental, then a mode word
/// ("Eb major", "ebminor", "F# min", "Bbm").
pub fn parse_key(s: &str) -> Result<Key> {
    let s = s.trim();
    let mut chars = s.chars();
    let letter = chars
        .next()
        .ok_or_else(|| Error::parse("empty key token"))?
        .to_ascii_uppercase();
    let base = match letter {
        'C' => 0,
        'D' => 2,
        'E' => 4,
        'F' => 5,
        'G' => 7,
        'A' => 9,
        'B' => 11,
        _ => return Err(Error::parse(format!("bad key letter in {s:?}"))),
    };
    let rest: String = chars.collect();
    let rest = rest.trim();
    let (accidental, rest) = match rest.chars().next() {
        Some('#') => (1i32, &rest[1..]),
        Some('b') => (-1i32, &rest[1..]),
        _ => (0, rest),
    };
    let tonic = ((base + accidental).rem_euclid(12)) as u32;
    let mode_word: String = rest
        .trim_start_matches([':', '-', ' '])
        .trim()
        .to_lowercase();
    let mode = if mode_word.starts_with("maj") || mode_word == "M" {
        Mode::Major
    } else if mode_word.starts_with("min") || mode_word == "m" {
        Mode::Minor
    } else if mode_word.is_empty() {
        Mode::Major
    } else {
        return Err(Error::parse(format!("bad mode in key token {s:?}")));
    };
    Ok(Key { tonic, mode })
}

/// Bar-weighted agreement: over the intersection of both bar domains, the
/// fraction of bars whose labels match exactly (case-sensitive).
pub fn agreement(ours: &RegionTable, reference: &AnnotationFile) -> Result<f64> {
    if ours.global != reference.global {
        return Err(Error::invalid(format!(
            "global keys differ: {} vs {}",
            ours.global, reference.global
        )));
    }
    let (os, oe) = ours
        .bar_domain()
        .ok_or_else(|| Error::invalid("empty region table"))?;
    let (rs, re) = reference.bar_domain();
    let lo = os.max(rs);
    let hi = oe.min(re);
    if lo > hi {
        return Err(Error::invalid(format!(
            "bar domains {os}-{oe} and {rs}-{re} do not overlap"
        )));
    }
    let mut matches = 0usize;
    let mut total = 0usize;
    for bar in lo..=hi {
        let (Some(a), Some(b)) = (ours.label_at(bar), reference.label_at(bar)) else {
            continue;
        };
        total += 1;
        if a == b {
            matches += 1;
        }
    }
    if total == 0 {
        return Err(Error::invalid("no bars labeled on both sides"));
    }
    Ok(matches as f64 / total as f64)
}

/// Derived chord-transition annotation used by generated-circuit reports:
/// name consecutive keys relative to the global key, e.g. "V-I".
pub fn progression_name(
    global: &Key,
    from: &PcSet,
    to: &PcSet,
    table: &SpellingTable,
) -> Option<String> {
    let a = chord_to_key(from).ok()?;
    let b = chord_to_key(to).ok()?;
    Some(format!(
        "{}-{}",
        region_label(global, &a, table),
        region_label(global, &b, table)
    ))
}

/// Distinct pcsets of a network that classify as key-bearing chords.
pub fn classifiable_sets(net: &ScoreNetwork) -> BTreeSet<PcSet> {
    net.nodes
        .values()
        .filter(|info| info.pcset.classify().0 != ChordQuality::Other)
        .map(|info| info.pcset.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(tonic: u32, mode: Mode) -> Key {
        Key { tonic, mode }
    }

    #[test]
    fn spelling_covers_the_table_one_rows() {
        let t = SpellingTable::default();
        let eb = k(3, Mode::Major);
        // Dominant seventh on Eb names Ab major, the subdominant region.
        let eb7 = PcSet::tet12(&[3, 7, 10, 1]);
        let key = chord_to_key(&eb7).unwrap();
        assert_eq!(key, k(8, Mode::Major));
        assert_eq!(region_label(&eb, &key, &t), "IV");
        // C major triad -> VI; G minor triad -> iii; Eb-G dyad -> I.
        assert_eq!(
            region_label(&eb, &chord_to_key(&PcSet::tet12(&[0, 4, 7])).unwrap(), &t),
            "VI"
        );
        assert_eq!(
            region_label(&eb, &chord_to_key(&PcSet::tet12(&[7, 10, 2])).unwrap(), &t),
            "iii"
        );
        assert_eq!(
            region_label(&eb, &chord_to_key(&PcSet::tet12(&[3, 7])).unwrap(), &t),
            "I"
        );
    }

    #[test]
    fn minor_locals_are_lowercased() {
        let t = SpellingTable::default();
        let eb = k(3, Mode::Major);
        assert_eq!(region_label(&eb, &k(0, Mode::Minor), &t), "vi");
        assert_eq!(region_label(&eb, &k(3, Mode::Minor), &t), "i");
    }

    #[test]
    fn sharp_five_shows_up_for_distant_keys() {
        let t = SpellingTable::default();
        let ab = k(8, Mode::Major);
        assert_eq!(region_label(&ab, &k(4, Mode::Major), &t), "#V");
    }

    #[test]
    fn identity_region_is_always_i() {
        let t = SpellingTable::default();
        for tonic in 0..12 {
            for mode in [Mode::Major, Mode::Minor] {
                let key = k(tonic, mode);
                let expect = match mode {
                    Mode::Major => "I",
                    Mode::Minor => "i",
                };
                assert_eq!(region_label(&key, &key, &t), expect);
            }
        }
    }

    #[test]
    fn labels_are_translation_invariant() {
        let t = SpellingTable::default();
        for shift in 0..12u32 {
            let g = k((3 + shift) % 12, Mode::Major);
            let l = k(shift % 12, Mode::Minor);
            assert_eq!(region_label(&g, &l, &t), "vi", "shift {shift}");
        }
    }

    #[test]
    fn spelling_overrides_swap_tokens() {
        let t = SpellingTable::with_overrides("8=bVI,6=bV").unwrap();
        let g = k(0, Mode::Major);
        assert_eq!(region_label(&g, &k(8, Mode::Major), &t), "bVI");
        assert_eq!(region_label(&g, &k(6, Mode::Major), &t), "bV");
    }

    #[test]
    fn chord_to_key_rejects_unclassifiable_sets() {
        assert!(chord_to_key(&PcSet::tet12(&[0, 1, 2])).is_err());
    }

    #[test]
    fn key_tokens_parse_in_common_forms() {
        assert_eq!(parse_key("Eb major").unwrap(), k(3, Mode::Major));
        assert_eq!(parse_key("ebmajor").unwrap(), k(3, Mode::Major));
        assert_eq!(parse_key("F# min").unwrap(), k(6, Mode::Minor));
        assert_eq!(parse_key("A:minor").unwrap(), k(9, Mode::Minor));
        assert_eq!(parse_key("Bbm").unwrap(), k(10, Mode::Minor));
        assert_eq!(parse_key("C").unwrap(), k(0, Mode::Major));
        assert!(parse_key("H major").is_err());
    }

    #[test]
    fn annotations_parse_and_look_up() {
        let text = "global_key=Eb major\nstart_bar,end_bar,region\n1,10,I\n11,20,V\n";
        let ann = AnnotationFile::parse(text).unwrap();
        assert_eq!(ann.global, k(3, Mode::Major));
        assert_eq!(ann.label_at(1), Some("I"));
        assert_eq!(ann.label_at(10), Some("I"));
        assert_eq!(ann.label_at(11), Some("V"));
        assert_eq!(ann.label_at(21), None);
    }

    #[test]
    fn annotations_without_header_are_rejected() {
        assert!(AnnotationFile::parse("1,10,I\n").is_err());
    }

    #[test]
    fn overlapping_annotations_are_rejected() {
        let text = "global_key=C\n1,10,I\n5,20,V\n";
        assert!(AnnotationFile::parse(text).is_err());
    }
}
