use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{LampError, Result};
use crate::model::{Corpus, Vocabulary};

fn shuffled(len: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

/// Train/test pair from sequence indices. The train vocabulary holds the
/// tokens used by the training sequences (original order); test-only
/// tokens map to the rare token, which is added when needed.
fn materialize(corpus: &Corpus, train: &[usize], test: &[usize], rare_label: &str) -> Result<(Corpus, Corpus)> {
    let old = corpus.vocab();
    let mut used = vec![false; old.len()];
    for &s in train {
        for &id in &corpus.sequences()[s] {
            used[id] = true;
        }
    }
    let test_needs_rare = test.iter().flat_map(|&s| &corpus.sequences()[s]).any(|&id| !used[id]);
    let mut vocab = Vocabulary::new();
    for (id, token) in old.tokens().iter().enumerate() {
        if used[id] {
            vocab.intern(token);
        }
    }
    match old.rare_token() {
        Some(label) => {
            vocab.set_rare_token(label);
        }
        None if test_needs_rare => {
            vocab.set_rare_token(rare_label);
        }
        None => {}
    }
    let pick = |idx: &[usize]| -> Vec<Vec<usize>> { idx.iter().map(|&s| corpus.sequences()[s].clone()).collect() };
    let train = Corpus::new(old.clone(), pick(train))?.reencode(&vocab)?;
    let test = Corpus::new(old.clone(), pick(test))?.reencode(&vocab)?;
    Ok((train, test))
}

/// Whole-sequence split: a seeded shuffle, then the first
/// `round(fraction * len)` sequences (at least one, leaving at least one)
/// go to training.
pub fn split(corpus: &Corpus, fraction: f64, seed: u64, rare_label: &str) -> Result<(Corpus, Corpus)> {
    if corpus.len() < 2 {
        return Err(LampError::EmptyCorpus("splitting needs at least 2 sequences".into()));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(LampError::InvalidConfig(format!("split fraction must be in (0, 1) (got {fraction})")));
    }
    let order = shuffled(corpus.len(), seed);
    let cut = ((fraction * corpus.len() as f64).round() as usize).clamp(1, corpus.len() - 1);
    materialize(corpus, &order[..cut], &order[cut..], rare_label)
}

/// Sequence indices of each fold: a seeded shuffle cut into `folds`
/// contiguous, nearly equal parts.
pub fn fold_assignments(len: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let order = shuffled(len, seed);
    (0..folds)
        .map(|f| order[f * len / folds..(f + 1) * len / folds].to_vec())
        .collect()
}

/// `(train, test)` per fold; fold `f` tests on its own sequences.
pub fn k_fold(corpus: &Corpus, folds: usize, seed: u64, rare_label: &str) -> Result<Vec<(Corpus, Corpus)>> {
    if folds < 2 || folds > corpus.len() {
        return Err(LampError::InvalidConfig(format!(
            "need 2 <= folds <= sequences ({} folds, {} sequences)",
            folds,
            corpus.len()
        )));
    }
    let parts = fold_assignments(corpus.len(), folds, seed);
    (0..folds)
        .map(|f| {
            let train: Vec<usize> = parts.iter().enumerate().filter(|&(g, _)| g != f).flat_map(|(_, p)| p.clone()).collect();
            materialize(corpus, &train, &parts[f], rare_label)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ten() -> Corpus {
        let text: String = (0..10).map(|i| format!("s{i} a b\n")).collect();
        Corpus::from_text(&text).unwrap()
    }

    #[test]
    fn ninety_ten() {
        let (train, test) = split(&ten(), 0.9, 3, "<RARE>").unwrap();
        assert_eq!((train.len(), test.len()), (9, 1));
        assert_eq!(split(&ten(), 0.9, 3, "<RARE>").unwrap(), (train.clone(), test.clone()));
        // the test sequence's first token never occurs in training
        assert_eq!(test.sequences()[0][0], train.vocab().rare_id().unwrap());
        assert_eq!(train.vocab(), test.vocab());
    }

    #[test]
    fn needs_two_sequences() {
        assert!(split(&Corpus::from_text("a b\n").unwrap(), 0.5, 0, "<RARE>").is_err());
    }

    #[test]
    fn folds_partition() {
        let parts = fold_assignments(23, 10, 5);
        let mut all: Vec<usize> = parts.concat();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert!(parts.iter().all(|p| p.len() == 2 || p.len() == 3));
        let folds = k_fold(&ten(), 10, 1, "<RARE>").unwrap();
        assert!(folds.iter().all(|(tr, te)| tr.len() == 9 && te.len() == 1));
    }

    #[test]
    fn no_rare_token_without_need() {
        let c = Corpus::from_text("a b\nb a\na a b\n").unwrap();
        let (train, _) = split(&c, 0.5, 0, "<RARE>").unwrap();
        assert_eq!(train.vocab().rare_token(), None);
    }
}
