//! Corpus ingestion, frame sampling, chord-level collapsing, and splits.
//!
//! Annotation files are plain text, one file per song named `<song_id>.lab`,
//! one segment per line: `<start_seconds> <end_seconds> <label>`. An optional
//! `metadata.tsv` sidecar in the same directory maps song ids to title and
//! artist (`id<TAB>title<TAB>artist`), which the duplicate filter uses.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::Rng;

use crate::chord::{parse_and_reduce, ClassId};
use crate::error::{Error, Result};
use crate::FRAME_RATE_HZ;

/// Sidecar file name for song metadata.
pub const METADATA_FILE: &str = "metadata.tsv";

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// One annotated segment: `[start_s, end_s)` carrying a raw label string.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start_s: f64,
    pub end_s: f64,
    pub label: String,
}

/// A song's interval annotations plus identifying metadata.
#[derive(Debug, Clone)]
pub struct AnnotationTrack {
    pub song_id: u32,
    pub title: String,
    pub artist: String,
    /// Non-overlapping, sorted by start, each with `start_s < end_s`.
    pub segments: Vec<Segment>,
}

/// A class-id sequence sampled at 10 fps.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub classes: Vec<ClassId>,
}

impl FrameSequence {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// A chord-level sequence: consecutive duplicates merged away.
#[derive(Debug, Clone, PartialEq)]
pub struct ChordSequence {
    pub classes: Vec<ClassId>,
}

/// Train/test corpus split.
#[derive(Debug, Clone)]
pub struct CorpusSplit {
    pub train: Vec<AnnotationTrack>,
    pub test: Vec<AnnotationTrack>,
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

fn parse_lab_line(file: &Path, lineno: usize, line: &str) -> Result<Segment> {
    let mut parts = line.split_whitespace();
    let mut next_field = |what: &str| {
        parts.next().ok_or_else(|| Error::DataFormat {
            file: file.to_path_buf(),
            line: lineno,
            reason: format!("missing {what}"),
        })
    };
    let start_text = next_field("start time")?;
    let end_text = next_field("end time")?;
    let label = next_field("label")?.to_string();

    let parse_time = |text: &str, what: &str| -> Result<f64> {
        text.parse::<f64>().map_err(|_| Error::DataFormat {
            file: file.to_path_buf(),
            line: lineno,
            reason: format!("bad {what} {text:?}"),
        })
    };
    let start_s = parse_time(start_text, "start time")?;
    let end_s = parse_time(end_text, "end time")?;
    if !start_s.is_finite() || !end_s.is_finite() || start_s >= end_s {
        return Err(Error::DataFormat {
            file: file.to_path_buf(),
            line: lineno,
            reason: format!("interval start {start_s} must precede end {end_s}"),
        });
    }
    // Labels must parse up front so corpus problems surface at load time.
    parse_and_reduce(&label).map_err(|e| Error::DataFormat {
        file: file.to_path_buf(),
        line: lineno,
        reason: e.to_string(),
    })?;
    Ok(Segment { start_s, end_s, label })
}

/// Load one `.lab` annotation file. The song id comes from the file stem.
pub fn load_track(path: &Path) -> Result<AnnotationTrack> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    let song_id: u32 = stem.parse().map_err(|_| Error::DataFormat {
        file: path.to_path_buf(),
        line: 0,
        reason: format!("file stem {stem:?} is not a numeric song id"),
    })?;

    let contents = std::fs::read_to_string(path)?;
    let mut segments = Vec::new();
    for (i, line) in contents.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        segments.push(parse_lab_line(path, i + 1, line)?);
    }
    for pair in segments.windows(2) {
        if pair[1].start_s < pair[0].end_s {
            return Err(Error::DataFormat {
                file: path.to_path_buf(),
                line: 0,
                reason: format!(
                    "segments overlap or are unsorted near t={}",
                    pair[1].start_s
                ),
            });
        }
    }

    Ok(AnnotationTrack {
        song_id,
        title: String::new(),
        artist: String::new(),
        segments,
    })
}

fn load_metadata(path: &Path) -> Result<HashMap<u32, (String, String)>> {
    let contents = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (i, line) in contents.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(Error::DataFormat {
                file: path.to_path_buf(),
                line: i + 1,
                reason: "expected id<TAB>title<TAB>artist".to_string(),
            });
        }
        let id: u32 = fields[0].trim().parse().map_err(|_| Error::DataFormat {
            file: path.to_path_buf(),
            line: i + 1,
            reason: format!("bad song id {:?}", fields[0]),
        })?;
        map.insert(id, (fields[1].to_string(), fields[2].to_string()));
    }
    Ok(map)
}

/// Load every `<id>.lab` file in `dir`, attaching metadata from
/// `metadata.tsv` when present. Tracks come back sorted by song id.
pub fn load_corpus(dir: &Path) -> Result<Vec<AnnotationTrack>> {
    let metadata = {
        let meta_path = dir.join(METADATA_FILE);
        if meta_path.is_file() {
            load_metadata(&meta_path)?
        } else {
            HashMap::new()
        }
    };

    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("lab"))
        .collect();
    paths.sort();

    let mut tracks = Vec::with_capacity(paths.len());
    for path in paths {
        let mut track = load_track(&path)?;
        if let Some((title, artist)) = metadata.get(&track.song_id) {
            track.title = title.clone();
            track.artist = artist.clone();
        }
        tracks.push(track);
    }
    tracks.sort_by_key(|t| t.song_id);
    Ok(tracks)
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

/// Song ids below this bound go to the training side.
pub const TRAIN_ID_BOUND: u32 = 1000;

fn normalize_name(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Split tracks into train (id < 1000) and test (id >= 1000), removing
/// duplicate songs first. Duplicates are detected by case-folded,
/// whitespace-normalized (title, artist) equality and resolved by keeping
/// the lowest song id; tracks without metadata are never merged.
pub fn split_corpus(tracks: &[AnnotationTrack]) -> CorpusSplit {
    let mut sorted: Vec<&AnnotationTrack> = tracks.iter().collect();
    sorted.sort_by_key(|t| t.song_id);

    let mut seen: HashMap<(String, String), u32> = HashMap::new();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for track in sorted {
        if !track.title.is_empty() || !track.artist.is_empty() {
            let key = (normalize_name(&track.title), normalize_name(&track.artist));
            if seen.contains_key(&key) {
                continue;
            }
            seen.insert(key, track.song_id);
        }
        if track.song_id < TRAIN_ID_BOUND {
            train.push(track.clone());
        } else {
            test.push(track.clone());
        }
    }
    CorpusSplit { train, test }
}

/// Deterministic 64-bit mix (splitmix64), used to assign validation songs.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// True when a training song belongs to the held-out validation slice
/// (roughly 10%, fixed by hashing the song id, stable across runs).
pub fn is_validation_song(song_id: u32) -> bool {
    mix64(u64::from(song_id)).is_multiple_of(10)
}

/// Partition training tracks into (fit, validation) by [`is_validation_song`].
/// If hashing leaves either side empty, the last track swaps over so both
/// sides are populated whenever two or more tracks exist.
pub fn validation_split(tracks: &[AnnotationTrack]) -> (Vec<AnnotationTrack>, Vec<AnnotationTrack>) {
    let mut fit = Vec::new();
    let mut val = Vec::new();
    for t in tracks {
        if is_validation_song(t.song_id) {
            val.push(t.clone());
        } else {
            fit.push(t.clone());
        }
    }
    if val.is_empty() && fit.len() >= 2 {
        val.push(fit.pop().unwrap());
    }
    if fit.is_empty() && val.len() >= 2 {
        fit.push(val.pop().unwrap());
    }
    (fit, val)
}

// ---------------------------------------------------------------------------
// Frame sampling and collapsing
// ---------------------------------------------------------------------------

/// Sample a track at 10 fps. Frame `k` takes the reduced label of the
/// segment containing the frame center `(k + 0.5) / 10` seconds; centers in
/// unannotated gaps (including lead-in before the first segment) map to
/// no-chord; the sequence ends at the last segment's end.
pub fn sample_frames(track: &AnnotationTrack) -> Result<FrameSequence> {
    let Some(last) = track.segments.last() else {
        return Ok(FrameSequence { classes: Vec::new() });
    };
    let last_end = last.end_s;
    // Frames whose center falls strictly before last_end; the epsilon keeps
    // a center that lands exactly on the boundary out of the sequence.
    let frame_count = ((last_end * FRAME_RATE_HZ - 0.5) - 1e-9).ceil().max(0.0) as usize;

    let reduced: Vec<ClassId> = track
        .segments
        .iter()
        .map(|seg| parse_and_reduce(&seg.label).map(ClassId::from_symbol))
        .collect::<Result<_>>()?;

    let mut classes = Vec::with_capacity(frame_count);
    let mut seg_idx = 0;
    for k in 0..frame_count {
        let center = (k as f64 + 0.5) / FRAME_RATE_HZ;
        while seg_idx < track.segments.len() && track.segments[seg_idx].end_s <= center {
            seg_idx += 1;
        }
        let class = match track.segments.get(seg_idx) {
            Some(seg) if seg.start_s <= center => reduced[seg_idx],
            _ => ClassId::NO_CHORD,
        };
        classes.push(class);
    }
    Ok(FrameSequence { classes })
}

/// Reduce a track to labeled spans in class-id space, merging adjacent
/// segments whose labels reduce to the same class. Gaps stay gaps.
pub fn reduce_track(track: &AnnotationTrack) -> Result<Vec<(f64, f64, ClassId)>> {
    let mut spans: Vec<(f64, f64, ClassId)> = Vec::new();
    for seg in &track.segments {
        let class = ClassId::from_symbol(parse_and_reduce(&seg.label)?);
        match spans.last_mut() {
            Some((_, end, last)) if *last == class && (*end - seg.start_s).abs() < 1e-9 => {
                *end = seg.end_s;
            }
            _ => spans.push((seg.start_s, seg.end_s, class)),
        }
    }
    Ok(spans)
}

/// Rebuild interval annotations from a frame sequence at 10 fps, merging
/// consecutive identical frames into segments with canonical label text.
pub fn frames_to_track(song_id: u32, frames: &[ClassId]) -> AnnotationTrack {
    let mut segments: Vec<Segment> = Vec::new();
    let mut run_start = 0usize;
    for i in 1..=frames.len() {
        if i == frames.len() || frames[i] != frames[run_start] {
            segments.push(Segment {
                start_s: run_start as f64 / FRAME_RATE_HZ,
                end_s: i as f64 / FRAME_RATE_HZ,
                label: frames[run_start].to_symbol().to_string(),
            });
            run_start = i;
        }
    }
    AnnotationTrack {
        song_id,
        title: String::new(),
        artist: String::new(),
        segments,
    }
}

/// Write a track back to annotation text (one `start end label` line per
/// segment).
pub fn save_track(path: &Path, track: &AnnotationTrack) -> Result<()> {
    use std::io::Write as _;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for seg in &track.segments {
        writeln!(out, "{} {} {}", seg.start_s, seg.end_s, seg.label)?;
    }
    Ok(())
}

/// Run-length collapse a frame sequence to chord level.
pub fn collapse(frames: &FrameSequence) -> ChordSequence {
    let mut classes: Vec<ClassId> = Vec::new();
    for &c in &frames.classes {
        if classes.last() != Some(&c) {
            classes.push(c);
        }
    }
    ChordSequence { classes }
}

// ---------------------------------------------------------------------------
// Augmentation
// ---------------------------------------------------------------------------

/// Transpose every symbol of `classes` by a single shift drawn uniformly
/// from 0..=11. One draw per call, i.e. per presentation.
pub fn augment_shift<R: Rng>(classes: &[ClassId], rng: &mut R) -> Vec<ClassId> {
    let shift = rng.gen_range(0..12);
    transpose_all(classes, shift)
}

/// Transpose every symbol by a fixed shift.
pub fn transpose_all(classes: &[ClassId], shift: i32) -> Vec<ClassId> {
    classes.iter().map(|c| c.transpose(shift)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::io::Write;

    fn track_from(segments: &[(f64, f64, &str)]) -> AnnotationTrack {
        AnnotationTrack {
            song_id: 1,
            title: String::new(),
            artist: String::new(),
            segments: segments
                .iter()
                .map(|&(s, e, l)| Segment {
                    start_s: s,
                    end_s: e,
                    label: l.to_string(),
                })
                .collect(),
        }
    }

    #[test]
    fn single_segment_samples_ten_frames() {
        let track = track_from(&[(0.0, 1.0, "C:maj")]);
        let frames = sample_frames(&track).unwrap();
        assert_eq!(frames.len(), 10);
        assert!(frames.classes.iter().all(|&c| c == ClassId::new(0).unwrap()));
    }

    #[test]
    fn center_sampling_assigns_boundary_frames() {
        let track = track_from(&[(0.0, 0.35, "C:maj"), (0.35, 0.7, "G:7")]);
        let frames = sample_frames(&track).unwrap();
        let c = ClassId::new(0).unwrap();
        let g = ClassId::new(7).unwrap();
        assert_eq!(frames.classes, vec![c, c, c, g, g, g, g]);
    }

    #[test]
    fn gaps_sample_as_no_chord() {
        let track = track_from(&[(0.0, 0.3, "C:maj"), (0.5, 0.8, "N")]);
        let frames = sample_frames(&track).unwrap();
        let c = ClassId::new(0).unwrap();
        let n = ClassId::NO_CHORD;
        assert_eq!(frames.classes, vec![c, c, c, n, n, n, n, n]);
    }

    #[test]
    fn lead_in_before_first_segment_is_no_chord() {
        let track = track_from(&[(0.2, 0.5, "A:min")]);
        let frames = sample_frames(&track).unwrap();
        assert_eq!(frames.classes[0], ClassId::NO_CHORD);
        assert_eq!(frames.classes[1], ClassId::NO_CHORD);
        assert_eq!(frames.classes[2], ClassId::from_symbol(crate::ChordSymbol::minor(9)));
    }

    #[test]
    fn collapse_merges_runs() {
        let ids = |v: &[u8]| v.iter().map(|&i| ClassId::new(i).unwrap()).collect::<Vec<_>>();
        let frames = FrameSequence { classes: ids(&[0, 0, 0, 7, 7, 0]) };
        assert_eq!(collapse(&frames).classes, ids(&[0, 7, 0]));

        let single = FrameSequence { classes: ids(&[0]) };
        assert_eq!(collapse(&single).classes, ids(&[0]));

        let long = FrameSequence { classes: vec![ClassId::new(5).unwrap(); 100] };
        assert_eq!(collapse(&long).classes.len(), 1);
    }

    #[test]
    fn sample_then_collapse_matches_segment_labels_when_gap_free() {
        let track = track_from(&[
            (0.0, 1.0, "C:maj"),
            (1.0, 2.2, "G:maj"),
            (2.2, 2.9, "G:7"), // reduces to the same class as G:maj
            (2.9, 4.0, "A:min"),
        ]);
        let collapsed = collapse(&sample_frames(&track).unwrap());
        let expected: Vec<ClassId> = ["C:maj", "G:maj", "A:min"]
            .iter()
            .map(|l| ClassId::from_symbol(parse_and_reduce(l).unwrap()))
            .collect();
        assert_eq!(collapsed.classes, expected);
    }

    #[test]
    fn augment_preserves_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let seq: Vec<ClassId> = [0u8, 0, 7, 24, 14, 14]
            .iter()
            .map(|&i| ClassId::new(i).unwrap())
            .collect();
        for _ in 0..50 {
            let shifted = augment_shift(&seq, &mut rng);
            assert_eq!(shifted.len(), seq.len());
            // no-chord position fixed
            assert_eq!(shifted[3], ClassId::NO_CHORD);
            // change positions preserved
            for k in 1..seq.len() {
                assert_eq!(seq[k] == seq[k - 1], shifted[k] == shifted[k - 1]);
            }
        }
    }

    #[test]
    fn shift_zero_is_identity_and_examples_hold() {
        let c = ClassId::from_symbol(crate::ChordSymbol::major(0));
        let g = ClassId::from_symbol(crate::ChordSymbol::major(7));
        assert_eq!(transpose_all(&[c, g], 0), vec![c, g]);
        let d = ClassId::from_symbol(crate::ChordSymbol::major(2));
        let a = ClassId::from_symbol(crate::ChordSymbol::major(9));
        assert_eq!(transpose_all(&[c, g], 2), vec![d, a]);
    }

    #[test]
    fn split_respects_id_bound_and_dedup() {
        let mk = |id: u32, title: &str, artist: &str| AnnotationTrack {
            song_id: id,
            title: title.to_string(),
            artist: artist.to_string(),
            segments: vec![],
        };
        let tracks = vec![
            mk(3, "Song A", "Artist X"),
            mk(1200, "Song B", "Artist Y"),
            mk(10, "song  c", "Artist Z"),
            mk(1100, "Song C", "artist z"), // duplicate of id 10 after normalization
        ];
        let split = split_corpus(&tracks);
        let train_ids: Vec<u32> = split.train.iter().map(|t| t.song_id).collect();
        let test_ids: Vec<u32> = split.test.iter().map(|t| t.song_id).collect();
        assert_eq!(train_ids, vec![3, 10]);
        assert_eq!(test_ids, vec![1200]);
    }

    #[test]
    fn load_corpus_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut f = std::fs::File::create(dir.path().join("42.lab")).unwrap();
        writeln!(f, "0.0 1.0 C:maj").unwrap();
        writeln!(f, "1.0 2.0 N").unwrap();
        drop(f);
        std::fs::write(dir.path().join(METADATA_FILE), "42\tMy Song\tMe\n").unwrap();

        let tracks = load_corpus(dir.path()).unwrap();
        assert_eq!(tracks.len(), 1);
        assert_eq!(tracks[0].song_id, 42);
        assert_eq!(tracks[0].title, "My Song");
        assert_eq!(tracks[0].segments.len(), 2);
    }

    #[test]
    fn empty_directory_loads_empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_corpus(dir.path()).unwrap().is_empty());
    }

    #[test]
    fn reversed_interval_is_an_error_with_location() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("7.lab"), "1.0 0.5 C:maj\n").unwrap();
        let err = load_corpus(dir.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("7.lab") && msg.contains(":1:"), "got: {msg}");
    }

    #[test]
    fn bad_label_reports_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("8.lab"), "0.0 1.0 C:maj\n1.0 2.0 Q:maj\n").unwrap();
        let err = load_corpus(dir.path()).unwrap_err();
        assert!(err.to_string().contains(":2:"), "got: {err}");
    }

    #[test]
    fn validation_split_is_deterministic_and_nonempty() {
        let tracks: Vec<AnnotationTrack> = (0..40)
            .map(|id| AnnotationTrack {
                song_id: id,
                title: String::new(),
                artist: String::new(),
                segments: vec![],
            })
            .collect();
        let (fit_a, val_a) = validation_split(&tracks);
        let (fit_b, val_b) = validation_split(&tracks);
        assert_eq!(
            fit_a.iter().map(|t| t.song_id).collect::<Vec<_>>(),
            fit_b.iter().map(|t| t.song_id).collect::<Vec<_>>()
        );
        assert!(!val_a.is_empty() && !fit_a.is_empty());
        assert_eq!(val_a.len(), val_b.len());
        // roughly a tenth
        assert!(val_a.len() <= tracks.len() / 4);
    }
}
