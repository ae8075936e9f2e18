//! Cross-module invariants checked over randomized inputs.

use proptest::prelude::*;

use chordseq_core::chord::ClassId;
use chordseq_core::dataset::{split_corpus, transpose_all, AnnotationTrack};
use chordseq_core::eval::{wcsr, ClassSpan};
use chordseq_core::markov::MarkovModel;
use chordseq_core::temporal::TemporalModel;

fn class_id() -> impl Strategy<Value = ClassId> {
    (0u8..25).prop_map(|id| ClassId::new(id).unwrap())
}

proptest! {
    #[test]
    fn transpose_roundtrips(class in class_id(), shift in 0i32..=12) {
        let back = class.transpose(shift).transpose(12 - shift);
        prop_assert_eq!(back, class);
    }

    #[test]
    fn transpose_all_preserves_change_structure(
        seq in proptest::collection::vec(class_id(), 1..60),
        shift in 0i32..12,
    ) {
        let shifted = transpose_all(&seq, shift);
        prop_assert_eq!(shifted.len(), seq.len());
        for k in 1..seq.len() {
            prop_assert_eq!(seq[k] == seq[k - 1], shifted[k] == shifted[k - 1]);
        }
        for k in 0..seq.len() {
            prop_assert_eq!(seq[k] == ClassId::NO_CHORD, shifted[k] == ClassId::NO_CHORD);
        }
    }

    #[test]
    fn split_sides_are_disjoint_by_title_artist(
        songs in proptest::collection::vec(
            (0u32..2000, 0usize..12, 0usize..4),
            1..60,
        )
    ) {
        // small name pools force collisions
        let titles = ["Alpha", "beta", "GAMMA ray", "delta  blues",
                      "Epsilon", "zeta", "eta song", "THETA", "iota",
                      "kappa", "lambda", "mu"];
        let artists = ["One", "two", "Three", "FOUR"];
        let tracks: Vec<AnnotationTrack> = songs
            .iter()
            .map(|&(id, t, a)| AnnotationTrack {
                song_id: id,
                title: titles[t].to_string(),
                artist: artists[a].to_string(),
                segments: vec![],
            })
            .collect();

        let split = split_corpus(&tracks);
        let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        let mut seen = std::collections::HashSet::new();
        for track in split.train.iter().chain(split.test.iter()) {
            let key = (norm(&track.title), norm(&track.artist));
            prop_assert!(seen.insert(key), "duplicate survived the split");
        }
        for track in &split.train {
            prop_assert!(track.song_id < 1000);
        }
        for track in &split.test {
            prop_assert!(track.song_id >= 1000);
        }
    }

    #[test]
    fn smoothed_markov_rows_are_distributions(
        corpus in proptest::collection::vec(
            proptest::collection::vec(class_id(), 1..30),
            1..8,
        ),
        alpha in 0.01f64..10.0,
    ) {
        let model = MarkovModel::fit(&corpus, alpha).unwrap();
        prop_assert!((model.initial().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for id in ClassId::all() {
            let row = model.transition_row(id);
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(row.iter().all(|&p| p > 0.0));
        }
        // stepping produces normalized distributions in probability space
        let (dist, _) = model.step(&model.start_state(), ClassId::NO_CHORD);
        let mass: f64 = dist.iter().map(|lp| lp.exp()).sum();
        prop_assert!((mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn wcsr_subdivision_invariance(
        cuts in proptest::collection::vec(0.1f64..0.9, 1..6),
    ) {
        let reference: Vec<ClassSpan> = vec![
            (0.0, 4.0, ClassId::new(0).unwrap()),
            (4.0, 9.0, ClassId::new(13).unwrap()),
        ];
        let predicted: Vec<ClassSpan> = vec![
            (0.0, 5.5, ClassId::new(0).unwrap()),
            (5.5, 9.0, ClassId::new(13).unwrap()),
        ];
        let base = wcsr(&[(1, reference.clone())], &[(1, predicted.clone())]).unwrap();

        // split the prediction at arbitrary interior points
        let mut split_pred = predicted.clone();
        for &frac in &cuts {
            let mut next = Vec::new();
            for (s, e, c) in split_pred {
                let mid = s + (e - s) * frac;
                if mid > s && mid < e {
                    next.push((s, mid, c));
                    next.push((mid, e, c));
                } else {
                    next.push((s, e, c));
                }
            }
            split_pred = next;
        }
        let split = wcsr(&[(1, reference)], &[(1, split_pred)]).unwrap();
        prop_assert!((base.recall() - split.recall()).abs() < 1e-9);
    }
}
