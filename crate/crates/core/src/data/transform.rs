use crate::error::Result;
use crate::model::{Corpus, Vocabulary};

/// Replaces every run of equal adjacent ids by a single id. Token counts of
/// the input are carried over unchanged.
pub fn collapse_repeats(corpus: &Corpus) -> Corpus {
    let sequences = corpus
        .sequences()
        .iter()
        .map(|seq| {
            let mut out = seq.clone();
            out.dedup();
            out
        })
        .collect();
    Corpus::with_counts(corpus.vocab().clone(), sequences, corpus.token_counts().to_vec())
        .expect("collapsing keeps ids and nonempty sequences")
}

/// Maps tokens whose recorded count is below `min_count` to `rare_label`.
///
/// Counts come from [`Corpus::token_counts`], i.e. from the corpus as it was
/// loaded, before any collapsing. The vocabulary is rebuilt with the kept
/// tokens in their original order followed by the rare token (only when
/// something was replaced or the input already had one).
pub fn apply_rare_threshold(corpus: &Corpus, min_count: u64, rare_label: &str) -> Result<Corpus> {
    let old = corpus.vocab();
    let counts = corpus.token_counts();
    let is_rare = |id: usize| counts[id] < min_count || old.rare_id() == Some(id);
    if min_count == 0 || (0..old.len()).all(|id| !is_rare(id)) {
        return Ok(corpus.clone());
    }
    let mut vocab = Vocabulary::new();
    let mut map = vec![usize::MAX; old.len()];
    for (id, token) in old.tokens().iter().enumerate() {
        if !is_rare(id) && token != rare_label {
            map[id] = vocab.intern(token);
        }
    }
    let rare = vocab.set_rare_token(rare_label);
    let mut new_counts = vec![0u64; vocab.len()];
    for id in 0..old.len() {
        if map[id] == usize::MAX {
            map[id] = rare;
        }
        new_counts[map[id]] += counts[id];
    }
    let sequences = corpus
        .sequences()
        .iter()
        .map(|seq| seq.iter().map(|&id| map[id]).collect())
        .collect();
    Corpus::with_counts(vocab, sequences, new_counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tokens(c: &Corpus) -> Vec<Vec<&str>> {
        c.sequences()
            .iter()
            .map(|s| s.iter().map(|&id| c.vocab().token(id).unwrap()).collect())
            .collect()
    }

    #[test]
    fn collapse_examples() {
        let c = Corpus::from_text("a a b b b a\nc d\nz z z z\n").unwrap();
        let out = collapse_repeats(&c);
        assert_eq!(tokens(&out), vec![vec!["a", "b", "a"], vec!["c", "d"], vec!["z"]]);
        assert_eq!(out.token_counts(), c.token_counts());
        assert_eq!(collapse_repeats(&out), out);
    }

    #[test]
    fn rare_threshold_example() {
        let c = Corpus::from_text("a b a c\n").unwrap();
        let out = apply_rare_threshold(&c, 2, "<RARE>").unwrap();
        assert_eq!(tokens(&out), vec![vec!["a", "<RARE>", "a", "<RARE>"]]);
        assert_eq!(out.vocab().tokens(), &["a", "<RARE>"]);
        assert_eq!(out.vocab().rare_token(), Some("<RARE>"));
        assert_eq!(out.token_counts(), &[2, 2]);
    }

    #[test]
    fn zero_threshold_is_identity() {
        let c = Corpus::from_text("a b a c\n").unwrap();
        assert_eq!(apply_rare_threshold(&c, 0, "<RARE>").unwrap(), c);
    }

    #[test]
    fn counts_survive_collapsing() {
        // "a" occurs three times in the original, once after collapsing
        let c = collapse_repeats(&Corpus::from_text("a a a b\n").unwrap());
        let out = apply_rare_threshold(&c, 2, "<R>").unwrap();
        assert_eq!(tokens(&out), vec![vec!["a", "<R>"]]);
    }
}
