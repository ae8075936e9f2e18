//! Chord labels and the 25-class major/minor vocabulary.
//!
//! Labels are written `ROOT:quality` (for example `C:maj`, `F#:min7`) with
//! the bare token `N` reserved for "no chord". A parsed label keeps its full
//! interval structure; [`reduce_to_majmin`] collapses it onto the 25-class
//! space used everywhere else: 12 major chords, 12 minor chords, and the
//! no-chord symbol.

use std::fmt;

use crate::error::{Error, Result};

/// Number of chord classes: 12 major + 12 minor + no-chord.
pub const NUM_CLASSES: usize = 25;

// ---------------------------------------------------------------------------
// Pitch classes and chord symbols
// ---------------------------------------------------------------------------

/// A semitone pitch class, 0..=11 with 0 = C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PitchClass(u8);

impl PitchClass {
    pub fn new(value: u8) -> Result<Self> {
        if value < 12 {
            Ok(PitchClass(value))
        } else {
            Err(Error::contract(format!("pitch class {value} out of range 0..=11")))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Shift by `semitones` (any sign), wrapping modulo 12.
    pub fn shifted(self, semitones: i32) -> Self {
        PitchClass((i32::from(self.0) + semitones).rem_euclid(12) as u8)
    }

    /// Canonical note name, sharps only: C, C#, D, ..., B.
    pub fn name(self) -> &'static str {
        const NAMES: [&str; 12] = [
            "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
        ];
        NAMES[self.0 as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChordQuality {
    Major,
    Minor,
}

/// One of the 25 chord classes: a rooted major/minor chord or "no chord".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChordSymbol {
    NoChord,
    Chord {
        root: PitchClass,
        quality: ChordQuality,
    },
}

impl ChordSymbol {
    pub fn major(root: u8) -> Self {
        ChordSymbol::Chord {
            root: PitchClass::new(root).expect("root in 0..=11"),
            quality: ChordQuality::Major,
        }
    }

    pub fn minor(root: u8) -> Self {
        ChordSymbol::Chord {
            root: PitchClass::new(root).expect("root in 0..=11"),
            quality: ChordQuality::Minor,
        }
    }

    /// Shift the root by `semitones`; no-chord is key-invariant.
    pub fn transpose(self, semitones: i32) -> Self {
        match self {
            ChordSymbol::NoChord => ChordSymbol::NoChord,
            ChordSymbol::Chord { root, quality } => ChordSymbol::Chord {
                root: root.shifted(semitones),
                quality,
            },
        }
    }
}

impl fmt::Display for ChordSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChordSymbol::NoChord => write!(f, "N"),
            ChordSymbol::Chord { root, quality } => {
                let q = match quality {
                    ChordQuality::Major => "maj",
                    ChordQuality::Minor => "min",
                };
                write!(f, "{}:{}", root.name(), q)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Class ids
// ---------------------------------------------------------------------------

/// Dense index for the 25 classes: 0..=11 major roots C..B, 12..=23 minor
/// roots C..B, 24 no-chord.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassId(u8);

impl ClassId {
    pub const NO_CHORD: ClassId = ClassId(24);

    pub fn new(id: u8) -> Result<Self> {
        if (id as usize) < NUM_CLASSES {
            Ok(ClassId(id))
        } else {
            Err(Error::contract(format!("class id {id} out of range 0..=24")))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// All 25 class ids in index order.
    pub fn all() -> impl Iterator<Item = ClassId> {
        (0..NUM_CLASSES as u8).map(ClassId)
    }

    pub fn to_symbol(self) -> ChordSymbol {
        match self.0 {
            0..=11 => ChordSymbol::major(self.0),
            12..=23 => ChordSymbol::minor(self.0 - 12),
            _ => ChordSymbol::NoChord,
        }
    }

    pub fn from_symbol(symbol: ChordSymbol) -> Self {
        match symbol {
            ChordSymbol::NoChord => ClassId(24),
            ChordSymbol::Chord { root, quality } => match quality {
                ChordQuality::Major => ClassId(root.value()),
                ChordQuality::Minor => ClassId(root.value() + 12),
            },
        }
    }

    /// Transpose in class-id space; no-chord is unchanged.
    pub fn transpose(self, semitones: i32) -> Self {
        ClassId::from_symbol(self.to_symbol().transpose(semitones))
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_symbol())
    }
}

// ---------------------------------------------------------------------------
// Raw labels and parsing
// ---------------------------------------------------------------------------

/// A parsed chord label before vocabulary reduction: root plus the interval
/// structure named by its quality shorthand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawChordLabel {
    pub root: PitchClass,
    pub quality_name: String,
    /// Semitone offsets above the root, sorted ascending, root itself excluded.
    pub intervals: Vec<u8>,
}

/// Quality shorthand table. Intervals are semitone offsets above the root;
/// extensions beyond the octave keep their literal size (9th = 14).
///
/// | shorthand | intervals        | | shorthand | intervals            |
/// |-----------|------------------|-|-----------|----------------------|
/// | `maj`     | 4 7              | | `min6`    | 3 7 9                |
/// | `min`     | 3 7              | | `maj6`    | 4 7 9                |
/// | `7`       | 4 7 10           | | `9`       | 4 7 10 14            |
/// | `min7`    | 3 7 10           | | `maj9`    | 4 7 11 14            |
/// | `maj7`    | 4 7 11           | | `min9`    | 3 7 10 14            |
/// | `dim`     | 3 6              | | `11`      | 4 7 10 14 17         |
/// | `aug`     | 4 8              | | `min11`   | 3 7 10 14 17         |
/// | `sus2`    | 2 7              | | `13`      | 4 7 10 14 17 21      |
/// | `sus4`    | 5 7              | | `min13`   | 3 7 10 14 17 21      |
/// | `hdim7`   | 3 6 10           | | `maj13`   | 4 7 11 14 21         |
/// | `dim7`    | 3 6 9            | | `minmaj7` | 3 7 11               |
/// | `5`       | 7                | |           |                      |
pub const QUALITY_TABLE: &[(&str, &[u8])] = &[
    ("maj", &[4, 7]),
    ("min", &[3, 7]),
    ("7", &[4, 7, 10]),
    ("min7", &[3, 7, 10]),
    ("maj7", &[4, 7, 11]),
    ("dim", &[3, 6]),
    ("aug", &[4, 8]),
    ("sus2", &[2, 7]),
    ("sus4", &[5, 7]),
    ("hdim7", &[3, 6, 10]),
    ("dim7", &[3, 6, 9]),
    ("min6", &[3, 7, 9]),
    ("maj6", &[4, 7, 9]),
    ("9", &[4, 7, 10, 14]),
    ("maj9", &[4, 7, 11, 14]),
    ("min9", &[3, 7, 10, 14]),
    ("5", &[7]),
    ("minmaj7", &[3, 7, 11]),
    ("11", &[4, 7, 10, 14, 17]),
    ("min11", &[3, 7, 10, 14, 17]),
    ("13", &[4, 7, 10, 14, 17, 21]),
    ("min13", &[3, 7, 10, 14, 17, 21]),
    ("maj13", &[4, 7, 11, 14, 21]),
];

fn quality_intervals(name: &str) -> Option<&'static [u8]> {
    QUALITY_TABLE
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, ivs)| *ivs)
}

/// Outcome of [`parse_label`]: either the full parsed chord or the reserved
/// no-chord token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedLabel {
    NoChord,
    Chord(RawChordLabel),
}

/// Parse a note name with any number of `#`/`b` accidentals into a pitch
/// class. Enharmonic spellings normalize to the same class (Db == C#).
pub fn parse_root(text: &str) -> Result<PitchClass> {
    let mut chars = text.chars();
    let letter = chars.next().ok_or_else(|| Error::LabelParse {
        label: text.to_string(),
        reason: "empty root name".to_string(),
    })?;
    let base: i32 = match letter {
        'C' => 0,
        'D' => 2,
        'E' => 4,
        'F' => 5,
        'G' => 7,
        'A' => 9,
        'B' => 11,
        _ => {
            return Err(Error::LabelParse {
                label: text.to_string(),
                reason: format!("unknown root note {letter:?}"),
            })
        }
    };
    let mut shift = 0;
    for c in chars {
        match c {
            '#' => shift += 1,
            'b' => shift -= 1,
            _ => {
                return Err(Error::LabelParse {
                    label: text.to_string(),
                    reason: format!("unexpected character {c:?} in root name"),
                })
            }
        }
    }
    Ok(PitchClass((base + shift).rem_euclid(12) as u8))
}

/// Parse a `ROOT:quality` label or the bare no-chord token `N`.
///
/// A bare root without quality (`C`) is read as major. Unknown roots and
/// unknown quality shorthands are hard errors so that corpus coverage gaps
/// surface during ingestion instead of being silently mapped.
pub fn parse_label(text: &str) -> Result<ParsedLabel> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::LabelParse {
            label: text.to_string(),
            reason: "empty label".to_string(),
        });
    }
    if text == "N" {
        return Ok(ParsedLabel::NoChord);
    }

    let (root_text, quality_name) = match text.split_once(':') {
        Some((r, q)) => (r, q),
        None => (text, "maj"),
    };
    let root = parse_root(root_text)?;
    let intervals = quality_intervals(quality_name).ok_or_else(|| Error::LabelParse {
        label: text.to_string(),
        reason: format!("unknown quality shorthand {quality_name:?}"),
    })?;

    Ok(ParsedLabel::Chord(RawChordLabel {
        root,
        quality_name: quality_name.to_string(),
        intervals: intervals.to_vec(),
    }))
}

/// Reduce a parsed label to the major/minor vocabulary: a chord whose
/// smallest interval above the root (within the octave) is a minor third
/// becomes minor, everything else (major third, suspended, power chord)
/// becomes major. No-chord passes through.
pub fn reduce_to_majmin(label: &ParsedLabel) -> ChordSymbol {
    match label {
        ParsedLabel::NoChord => ChordSymbol::NoChord,
        ParsedLabel::Chord(raw) => {
            let first_interval = raw
                .intervals
                .iter()
                .copied()
                .filter(|&iv| iv > 0 && iv < 12)
                .min();
            let quality = match first_interval {
                Some(3) => ChordQuality::Minor,
                _ => ChordQuality::Major,
            };
            ChordSymbol::Chord {
                root: raw.root,
                quality,
            }
        }
    }
}

/// Parse and reduce in one step.
pub fn parse_and_reduce(text: &str) -> Result<ChordSymbol> {
    Ok(reduce_to_majmin(&parse_label(text)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_chord_token_parses() {
        assert_eq!(parse_label("N").unwrap(), ParsedLabel::NoChord);
    }

    #[test]
    fn min7_intervals() {
        let parsed = parse_label("C:min7").unwrap();
        match parsed {
            ParsedLabel::Chord(raw) => {
                assert_eq!(raw.root.value(), 0);
                assert_eq!(raw.intervals, vec![3, 7, 10]);
            }
            _ => panic!("expected chord"),
        }
    }

    #[test]
    fn dominant_seventh_intervals() {
        let parsed = parse_label("G:7").unwrap();
        match parsed {
            ParsedLabel::Chord(raw) => {
                assert_eq!(raw.root.value(), 7);
                assert_eq!(raw.intervals, vec![4, 7, 10]);
            }
            _ => panic!("expected chord"),
        }
    }

    #[test]
    fn unknown_quality_is_an_error_naming_the_token() {
        let err = parse_label("C:weird").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("weird"), "error should name the token: {msg}");
    }

    #[test]
    fn unknown_root_is_an_error() {
        assert!(parse_label("H:maj").is_err());
        assert!(parse_label("Cx:maj").is_err());
    }

    #[test]
    fn enharmonic_roots_normalize() {
        assert_eq!(parse_root("Db").unwrap(), parse_root("C#").unwrap());
        assert_eq!(parse_root("Cb").unwrap().value(), 11);
        assert_eq!(parse_root("B#").unwrap().value(), 0);
    }

    #[test]
    fn bare_root_reads_as_major() {
        assert_eq!(parse_and_reduce("C").unwrap(), ChordSymbol::major(0));
    }

    #[test]
    fn reduction_follows_minor_third_rule() {
        assert_eq!(parse_and_reduce("C:min7").unwrap(), ChordSymbol::minor(0));
        assert_eq!(parse_and_reduce("G:7").unwrap(), ChordSymbol::major(7));
        // dim starts with a minor third
        assert_eq!(parse_and_reduce("D:dim").unwrap(), ChordSymbol::minor(2));
        // sus chords have no third at all
        assert_eq!(parse_and_reduce("A:sus4").unwrap(), ChordSymbol::major(9));
        assert_eq!(parse_and_reduce("A:sus2").unwrap(), ChordSymbol::major(9));
        // power chord
        assert_eq!(parse_and_reduce("E:5").unwrap(), ChordSymbol::major(4));
        assert_eq!(parse_and_reduce("N").unwrap(), ChordSymbol::NoChord);
    }

    #[test]
    fn reduction_is_total_over_the_quality_table() {
        for (name, _) in QUALITY_TABLE {
            let label = format!("C:{name}");
            let symbol = parse_and_reduce(&label).unwrap();
            assert!(
                matches!(symbol, ChordSymbol::Chord { .. }),
                "{label} should reduce to a chord"
            );
        }
    }

    #[test]
    fn transpose_examples() {
        assert_eq!(ChordSymbol::major(7).transpose(5), ChordSymbol::major(0));
        assert_eq!(ChordSymbol::NoChord.transpose(3), ChordSymbol::NoChord);
        assert_eq!(ChordSymbol::minor(9).transpose(12), ChordSymbol::minor(9));
        assert_eq!(ChordSymbol::major(0).transpose(-1), ChordSymbol::major(11));
    }

    #[test]
    fn class_id_roundtrip_is_a_bijection() {
        for id in ClassId::all() {
            assert_eq!(ClassId::from_symbol(id.to_symbol()), id);
        }
        // and distinct symbols map to distinct ids
        let ids: std::collections::HashSet<_> =
            ClassId::all().map(|id| ClassId::from_symbol(id.to_symbol()).index()).collect();
        assert_eq!(ids.len(), NUM_CLASSES);
    }

    #[test]
    fn transpose_roundtrips_for_all_symbols_and_shifts() {
        for id in ClassId::all() {
            let s = id.to_symbol();
            for k in 0..=12 {
                assert_eq!(s.transpose(k).transpose(12 - k), s, "symbol {s}, shift {k}");
            }
        }
    }

    #[test]
    fn display_is_parseable() {
        for id in ClassId::all() {
            let text = id.to_symbol().to_string();
            assert_eq!(parse_and_reduce(&text).unwrap(), id.to_symbol());
        }
    }
}
