use std::io::Write;

use lamp::data::{fold_assignments, k_fold, load_corpus, parse_corpus, preprocess, split, PreprocessConfig, DEFAULT_RARE_TOKEN};
use lamp::{Corpus, LampError};
use proptest::prelude::*;

fn arb_text() -> impl Strategy<Value = String> {
    let word = prop::sample::select(vec!["a", "b", "c", "d", "e", "f"]);
    prop::collection::vec(prop::collection::vec(word, 1..12), 1..8)
        .prop_map(|lines| lines.iter().map(|l| l.join(" ")).collect::<Vec<_>>().join("\n"))
}

fn words(c: &Corpus, seq: &[usize]) -> Vec<String> {
    seq.iter().map(|&id| c.vocab().token(id).unwrap().to_string()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn preprocessing_invariants(text in arb_text(), min_count in 0u64..6) {
        let (raw, _) = parse_corpus(&text, None).unwrap();
        let cfg = PreprocessConfig { rare_min_count: min_count, ..Default::default() };
        let Ok((out, report)) = preprocess(&raw, &cfg) else { return Ok(()) };
        let counts = raw.token_counts();
        for seq in out.sequences() {
            prop_assert!(seq.len() > 1);
            prop_assert!(seq.windows(2).all(|w| w[0] != w[1]));
        }
        // frequent tokens keep their spelling, rare ones disappear
        for (id, token) in raw.vocab().tokens().iter().enumerate() {
            let kept = out.vocab().tokens().contains(token);
            prop_assert_eq!(kept, counts[id] >= min_count, "{}", token);
        }
        prop_assert_eq!(report.output_sequences + report.dropped_sequences, raw.len());
        prop_assert_eq!(preprocess(&raw, &cfg).unwrap().0, out);
    }

    #[test]
    fn rare_replacement_follows_loaded_counts(text in arb_text()) {
        let (raw, _) = parse_corpus(&text, None).unwrap();
        let cfg = PreprocessConfig { collapse_repeats: false, rare_min_count: 3, ..Default::default() };
        let Ok((out, _)) = preprocess(&raw, &cfg) else { return Ok(()) };
        let kept: Vec<&Vec<usize>> = raw.sequences().iter().filter(|s| s.len() > 1).collect();
        prop_assert_eq!(kept.len(), out.len());
        for (src, dst) in kept.into_iter().zip(out.sequences()) {
            let want: Vec<String> = src
                .iter()
                .map(|&id| if raw.token_counts()[id] < 3 { DEFAULT_RARE_TOKEN.to_string() } else { raw.vocab().token(id).unwrap().to_string() })
                .collect();
            prop_assert_eq!(words(&out, dst), want);
        }
    }

    #[test]
    fn split_partitions_sequences(lines in 2usize..40, seed in any::<u64>(), fraction in 0.05f64..0.95) {
        let text: String = (0..lines).map(|i| format!("x{i} a b a\n")).collect();
        let corpus = Corpus::from_text(&text).unwrap();
        let (train, test) = split(&corpus, fraction, seed, DEFAULT_RARE_TOKEN).unwrap();
        prop_assert_eq!(train.len() + test.len(), lines);
        prop_assert!(!train.is_empty() && !test.is_empty());
        prop_assert_eq!(train.vocab(), test.vocab());
        let again = split(&corpus, fraction, seed, DEFAULT_RARE_TOKEN).unwrap();
        prop_assert_eq!(again, (train.clone(), test.clone()));
        // test-only ids x{i} become the rare token
        let rare = train.vocab().rare_id().unwrap();
        for seq in test.sequences() {
            prop_assert_eq!(seq[0], rare);
        }
    }
}

#[test]
fn every_sequence_is_tested_exactly_once() {
    let mut all: Vec<usize> = fold_assignments(23, 5, 7).concat();
    all.sort_unstable();
    assert_eq!(all, (0..23).collect::<Vec<_>>());

    let text: String = (0..23).map(|i| format!("a b a{}\n", " b".repeat(i))).collect();
    let corpus = Corpus::from_text(&text).unwrap();
    let folds = k_fold(&corpus, 5, 7, DEFAULT_RARE_TOKEN).unwrap();
    let mut lengths: Vec<usize> = folds.iter().flat_map(|(_, test)| test.sequences().iter().map(Vec::len)).collect();
    lengths.sort_unstable();
    assert_eq!(lengths, (3..26).collect::<Vec<_>>());
    for (train, test) in &folds {
        assert_eq!(train.len() + test.len(), 23);
    }
    assert!(k_fold(&corpus, 1, 0, DEFAULT_RARE_TOKEN).is_err());
    assert!(k_fold(&corpus, 24, 0, DEFAULT_RARE_TOKEN).is_err());
}

#[test]
fn loads_files_and_reports_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.txt");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "a b a\n\nc a\nb c b").unwrap();
    drop(f);
    let (corpus, report) = load_corpus(&path, Some(2)).unwrap();
    assert_eq!(corpus.len(), 2);
    assert!(report.truncated);
    assert_eq!(report.skipped_blank_lines, 1);
    assert_eq!(words(&corpus, &corpus.sequences()[1]), ["c", "a"]);
    let missing = load_corpus(&dir.path().join("nope.txt"), None);
    assert!(matches!(missing, Err(LampError::Io { .. })));
}
