//! Score ingestion: parse MusicXML (plain or .mxl-compressed, score-partwise)
//! and chordify the result into a time-ordered sequence of normal-ordered
//! pitch-class sets with bar positions.
//!
//! The timeline is in quarter-note beats from the score start, as exact
//! rationals. Measure lengths are reconciled across parts (the longest
//! content wins), so parts that pad with backup/forward stay aligned.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcset::PcSet;

/// One sounding note (or merged tied chain) in a single part/voice stream.
#[derive(Clone, Debug)]
pub struct NoteEvent {
    pub onset: Rational64,
    pub duration: Rational64,
    pub pitches: BTreeSet<i32>,
    /// True when this event opened with an unmatched tie continuation.
    pub tie_continuation: bool,
}

#[derive(Clone, Debug)]
pub struct MeasureSpan {
    pub start: Rational64,
    pub bar: u32,
}

/// Parsed score: one event stream per (part, voice), plus the measure map.
#[derive(Clone, Debug, Default)]
pub struct ScoreDocument {
    pub streams: Vec<Vec<NoteEvent>>,
    pub measures: Vec<MeasureSpan>,
    pub title: Option<String>,
    pub movement: Option<String>,
}

/// One chord of the chordified sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChordEvent {
    pub index: usize,
    pub bar: u32,
    pub pcset: PcSet,
}

/// The chordified score, in time order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChordSequence {
    pub events: Vec<ChordEvent>,
    pub title: Option<String>,
    pub movement: Option<String>,
}

impl ScoreDocument {
    /// Bar number containing a timeline position.
    pub fn bar_at(&self, t: Rational64) -> u32 {
        let mut bar = self.measures.first().map(|m| m.bar).unwrap_or(1);
        for m in &self.measures {
            if m.start <= t {
                bar = m.bar;
            } else {
                break;
            }
        }
        bar.max(1)
    }
}

/// Load a score file; `.mxl` zip containers are unpacked transparently.
pub fn load_score(path: &Path) -> Result<ScoreDocument> {
    let bytes = std::fs::read(path)?;
    load_score_bytes(&bytes)
}

/// Parse score bytes, sniffing for a zip container.
pub fn load_score_bytes(bytes: &[u8]) -> Result<ScoreDocument> {
    if bytes.starts_with(b"PK") {
        let inner = extract_mxl(bytes)?;
        parse_musicxml(&inner)
    } else {
        parse_musicxml(bytes)
    }
}

/// Pull the root score document out of an .mxl container.
fn extract_mxl(bytes: &[u8]) -> Result<Vec<u8>> {
    let reader = std::io::Cursor::new(bytes);
    let mut zip = zip::ZipArchive::new(reader)
        .map_err(|e| Error::parse(format!("malformed .mxl container: {e}")))?;

    // META-INF/container.xml names the root file; fall back to the first
    // top-level XML entry.
    let mut root_path: Option<String> = None;
    if let Ok(mut entry) = zip.by_name("META-INF/container.xml") {
        let mut text = String::new();
        entry
            .read_to_string(&mut text)
            .map_err(|e| Error::parse(format!("malformed container.xml: {e}")))?;
        if let Ok(doc) = roxmltree::Document::parse(&text) {
            root_path = doc
                .descendants()
                .find(|n| n.has_tag_name("rootfile"))
                .and_then(|n| n.attribute("full-path"))
                .map(str::to_string);
        }
    }
    if root_path.is_none() {
        root_path = (0..zip.len())
            .filter_map(|i| zip.by_index(i).ok().map(|e| e.name().to_string()))
            .find(|n| !n.starts_with("META-INF/") && n.to_lowercase().ends_with(".xml"));
    }
    let name = root_path.ok_or_else(|| Error::parse("no score entry in .mxl container"))?;
    let mut entry = zip
        .by_name(&name)
        .map_err(|e| Error::parse(format!("missing .mxl entry {name}: {e}")))?;
    let mut out = Vec::new();
    entry
        .read_to_end(&mut out)
        .map_err(|e| Error::parse(format!("corrupt .mxl entry {name}: {e}")))?;
    Ok(out)
}

/// Raw note before measures are laid out globally.
struct RawNote {
    part: usize,
    measure: usize,
    rel_onset: Rational64,
    duration: Rational64,
    midi: i32,
    voice: String,
    tie_start: bool,
    tie_stop: bool,
}

/// Parse a plain MusicXML score-partwise document.
pub fn parse_musicxml(bytes: &[u8]) -> Result<ScoreDocument> {
    let text =
        std::str::from_utf8(bytes).map_err(|_| Error::parse("malformed XML: not valid UTF-8"))?;
    let opts = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    let doc = roxmltree::Document::parse_with_options(text, opts)
        .map_err(|e| Error::parse(format!("malformed XML: {e}")))?;
    let root = doc.root_element();
    if root.tag_name().name() != "score-partwise" {
        return Err(Error::parse(format!(
            "unsupported root element <{}>; only score-partwise is handled",
            root.tag_name().name()
        )));
    }

    let title = root
        .children()
        .find(|n| n.has_tag_name("work"))
        .and_then(|w| w.children().find(|n| n.has_tag_name("work-title")))
        .and_then(|n| n.text())
        .map(|s| s.trim().to_string());
    let movement = root
        .children()
        .find(|n| n.has_tag_name("movement-title"))
        .and_then(|n| n.text())
        .map(|s| s.trim().to_string());

    let parts: Vec<_> = root.children().filter(|n| n.has_tag_name("part")).collect();
    if parts.is_empty() {
        return Err(Error::parse("no parts"));
    }

    let mut raw_notes: Vec<RawNote> = Vec::new();
    // Per measure index: longest content across parts, and the latest
    // time-signature length for empty-measure fallback.
    let mut content_len: Vec<Rational64> = Vec::new();
    let mut timesig_len: Vec<Option<Rational64>> = Vec::new();
    let mut bar_numbers: Vec<Option<u32>> = Vec::new();

    for (pi, part) in parts.iter().enumerate() {
        let mut divisions: i64 = 1;
        let mut current_timesig: Option<Rational64> = None;
        for (mi, measure) in part
            .children()
            .filter(|n| n.has_tag_name("measure"))
            .enumerate()
        {
            if content_len.len() <= mi {
                content_len.push(Rational64::from_integer(0));
                timesig_len.push(None);
                bar_numbers.push(None);
            }
            if pi == 0 {
                bar_numbers[mi] = measure.attribute("number").and_then(parse_bar_number);
            }

            let mut cursor = Rational64::from_integer(0);
            let mut max_end = Rational64::from_integer(0);
            let mut prev_onset = Rational64::from_integer(0);
            for child in measure.children().filter(|n| n.is_element()) {
                match child.tag_name().name() {
                    "attributes" => {
                        if let Some(d) = child
                            .children()
                            .find(|n| n.has_tag_name("divisions"))
                            .and_then(|n| n.text())
                            .and_then(|t| t.trim().parse::<i64>().ok())
                        {
                            if d >= 1 {
                                divisions = d;
                            }
                        }
                        if let Some(time) = child.children().find(|n| n.has_tag_name("time")) {
                            let beats = time
                                .children()
                                .find(|n| n.has_tag_name("beats"))
                                .and_then(|n| n.text())
                                .and_then(|t| t.trim().parse::<i64>().ok());
                            let beat_type = time
                                .children()
                                .find(|n| n.has_tag_name("beat-type"))
                                .and_then(|n| n.text())
                                .and_then(|t| t.trim().parse::<i64>().ok());
                            if let (Some(b), Some(bt)) = (beats, beat_type) {
                                if bt > 0 {
                                    current_timesig = Some(Rational64::new(4 * b, bt));
                                }
                            }
                        }
                    }
                    "backup" => {
                        cursor -= element_duration(&child, divisions);
                        if cursor < Rational64::from_integer(0) {
                            cursor = Rational64::from_integer(0);
                        }
                    }
                    "forward" => {
                        cursor += element_duration(&child, divisions);
                        max_end = max_end.max(cursor);
                    }
                    "note" => {
                        if child.children().any(|n| n.has_tag_name("grace")) {
                            log::debug!("skipping grace note in measure {}", mi + 1);
                            continue;
                        }
                        if child.children().any(|n| n.has_tag_name("cue")) {
                            log::debug!("skipping cue note in measure {}", mi + 1);
                            continue;
                        }
                        let beats = element_duration(&child, divisions);
                        let is_chord = child.children().any(|n| n.has_tag_name("chord"));
                        let onset = if is_chord { prev_onset } else { cursor };
                        let is_rest = child.children().any(|n| n.has_tag_name("rest"));
                        if !is_rest {
                            if let Some(midi) = note_midi(&child) {
                                let voice = child
                                    .children()
                                    .find(|n| n.has_tag_name("voice"))
                                    .and_then(|n| n.text())
                                    .map(|s| s.trim().to_string())
                                    .unwrap_or_else(|| "1".to_string());
                                let (tie_start, tie_stop) = tie_flags(&child);
                                raw_notes.push(RawNote {
                                    part: pi,
                                    measure: mi,
                                    rel_onset: onset,
                                    duration: beats,
                                    midi,
                                    voice,
                                    tie_start,
                                    tie_stop,
                                });
                            } else {
                                log::warn!("ignoring unpitched note in measure {}", mi + 1);
                            }
                        }
                        if !is_chord {
                            prev_onset = onset;
                            cursor = onset + beats;
                        }
                        max_end = max_end.max(onset + beats);
                    }
                    _ => {}
                }
            }
            content_len[mi] = content_len[mi].max(max_end);
            if timesig_len[mi].is_none() {
                timesig_len[mi] = current_timesig;
            }
        }
    }

    if raw_notes.is_empty() {
        return Err(Error::parse("no notes"));
    }

    // Global measure layout: content length, else the time signature.
    let n_measures = content_len.len();
    let mut starts = Vec::with_capacity(n_measures);
    let mut acc = Rational64::from_integer(0);
    for mi in 0..n_measures {
        starts.push(acc);
        let len = if content_len[mi] > Rational64::from_integer(0) {
            content_len[mi]
        } else {
            timesig_len[mi].unwrap_or_else(|| Rational64::from_integer(0))
        };
        acc += len;
    }
    let mut measures = Vec::with_capacity(n_measures);
    let mut next_bar = 1u32;
    for mi in 0..n_measures {
        let bar = bar_numbers[mi].unwrap_or(next_bar);
        next_bar = bar + 1;
        measures.push(MeasureSpan {
            start: starts[mi],
            bar,
        });
    }

    // Globalize onsets, then resolve ties per (part, voice, pitch) chain.
    raw_notes.sort_by(|a, b| {
        a.part
            .cmp(&b.part)
            .then_with(|| (starts[a.measure] + a.rel_onset).cmp(&(starts[b.measure] + b.rel_onset)))
            .then_with(|| a.voice.cmp(&b.voice))
            .then_with(|| a.midi.cmp(&b.midi))
    });

    use std::collections::BTreeMap;
    // stream key (part, voice) -> index into streams
    let mut stream_index: BTreeMap<(usize, String), usize> = BTreeMap::new();
    let mut streams: Vec<Vec<NoteEvent>> = Vec::new();
    // open tied notes: (part, voice, midi) -> (stream, event index, end)
    let mut open: BTreeMap<(usize, String, i32), (usize, usize, Rational64)> = BTreeMap::new();

    for note in &raw_notes {
        let onset = starts[note.measure] + note.rel_onset;
        let skey = (note.part, note.voice.clone());
        let si = *stream_index.entry(skey).or_insert_with(|| {
            streams.push(Vec::new());
            streams.len() - 1
        });
        let okey = (note.part, note.voice.clone(), note.midi);
        if note.tie_stop {
            if let Some(&(osi, oei, oend)) = open.get(&okey) {
                if oend == onset {
                    streams[osi][oei].duration += note.duration;
                    if note.tie_start {
                        open.insert(okey, (osi, oei, onset + note.duration));
                    } else {
                        open.remove(&okey);
                    }
                    continue;
                }
            }
            log::debug!("unmatched tie continuation at onset {onset}");
        }
        let mut pitches = BTreeSet::new();
        pitches.insert(note.midi);
        streams[si].push(NoteEvent {
            onset,
            duration: note.duration,
            pitches,
            tie_continuation: note.tie_stop,
        });
        if note.tie_start {
            let ei = streams[si].len() - 1;
            open.insert(okey, (si, ei, onset + note.duration));
        }
    }

    Ok(ScoreDocument {
        streams,
        measures,
        title,
        movement,
    })
}

fn parse_bar_number(s: &str) -> Option<u32> {
    let digits: String = s.chars().filter(|c| c.is_ascii_digit()).collect();
    digits.parse().ok()
}

fn element_duration(node: &roxmltree::Node, divisions: i64) -> Rational64 {
    let d = node
        .children()
        .find(|n| n.has_tag_name("duration"))
        .and_then(|n| n.text())
        .and_then(|t| t.trim().parse::<i64>().ok())
        .unwrap_or(0);
    Rational64::new(d.max(0), divisions.max(1))
}

/// MIDI number from <pitch>: step + alter + octave; C4 = 60.
fn note_midi(note: &roxmltree::Node) -> Option<i32> {
    let pitch = note.children().find(|n| n.has_tag_name("pitch"))?;
    let step = pitch
        .children()
        .find(|n| n.has_tag_name("step"))
        .and_then(|n| n.text())
        .map(str::trim)?;
    let semis = match step {
        "C" => 0,
        "D" => 2,
        "E" => 4,
        "F" => 5,
        "G" => 7,
        "A" => 9,
        "B" => 11,
        _ => return None,
    };
    let alter = pitch
        .children()
        .find(|n| n.has_tag_name("alter"))
        .and_then(|n| n.text())
        .and_then(|t| t.trim().parse::<f64>().ok())
        .unwrap_or(0.0)
        .round() as i32;
    let octave = pitch
        .children()
        .find(|n| n.has_tag_name("octave"))
        .and_then(|n| n.text())
        .and_then(|t| t.trim().parse::<i32>().ok())?;
    Some(12 * (octave + 1) + semis + alter)
}

fn tie_flags(note: &roxmltree::Node) -> (bool, bool) {
    let mut start = false;
    let mut stop = false;
    for tie in note.children().filter(|n| n.has_tag_name("tie")) {
        match tie.attribute("type") {
            Some("start") => start = true,
            Some("stop") => stop = true,
            _ => {}
        }
    }
    (start, stop)
}

/// Slice the global timeline at every onset/offset boundary and reduce each
/// slice's sounding pitches to a pitch-class set. Rest slices are dropped.
/// With `keep_repeats` off (the default), consecutive identical pcsets merge
/// into one event carrying the bar of the first slice.
pub fn chordify(doc: &ScoreDocument, keep_repeats: bool) -> Result<ChordSequence> {
    let mut notes: Vec<(Rational64, Rational64, i32)> = Vec::new();
    for stream in &doc.streams {
        for ev in stream {
            if ev.duration <= Rational64::from_integer(0) {
                continue;
            }
            for &p in &ev.pitches {
                notes.push((ev.onset, ev.onset + ev.duration, p));
            }
        }
    }
    if notes.is_empty() {
        return Err(Error::invalid("all-rest score: nothing to chordify"));
    }

    let mut boundaries: BTreeSet<Rational64> = BTreeSet::new();
    for &(on, off, _) in &notes {
        boundaries.insert(on);
        boundaries.insert(off);
    }
    let bounds: Vec<Rational64> = boundaries.into_iter().collect();

    // Sweep: notes sorted by onset; keep an active set across slices.
    notes.sort_unstable();
    let mut active: Vec<(Rational64, i32)> = Vec::new(); // (end, midi)
    let mut next = 0usize;
    let mut raw: Vec<(PcSet, u32)> = Vec::new();
    for w in bounds.windows(2) {
        let t = w[0];
        while next < notes.len() && notes[next].0 <= t {
            let (_, off, midi) = notes[next];
            if off > t {
                active.push((off, midi));
            }
            next += 1;
        }
        active.retain(|&(end, _)| end > t);
        if active.is_empty() {
            continue;
        }
        let pitches: Vec<i64> = active.iter().map(|&(_, m)| m as i64).collect();
        let pcset = PcSet::tet12(&pitches);
        raw.push((pcset, doc.bar_at(t)));
    }

    if raw.is_empty() {
        return Err(Error::invalid("all-rest score: nothing to chordify"));
    }

    let mut events: Vec<ChordEvent> = Vec::new();
    for (pcset, bar) in raw {
        if !keep_repeats {
            if let Some(last) = events.last() {
                if last.pcset == pcset {
                    continue;
                }
            }
        }
        events.push(ChordEvent {
            index: events.len(),
            bar,
            pcset,
        });
    }
    Ok(ChordSequence {
        events,
        title: doc.title.clone(),
        movement: doc.movement.clone(),
    })
}
