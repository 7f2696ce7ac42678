use crate::error::{LampError, Result};
use crate::model::Vocabulary;

/// Integer-encoded sequences over a shared vocabulary.
///
/// `token_counts` holds per-token occurrence counts of the corpus as it was
/// first built. Transformations that change sequences but should keep the
/// original statistics (repeat collapsing) carry these counts forward.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    vocab: Vocabulary,
    sequences: Vec<Vec<usize>>,
    token_counts: Vec<u64>,
}

impl Corpus {
    /// Validates ids and drops nothing: empty sequences are an error.
    pub fn new(vocab: Vocabulary, sequences: Vec<Vec<usize>>) -> Result<Self> {
        let n = vocab.len();
        let mut token_counts = vec![0u64; n];
        for (s, seq) in sequences.iter().enumerate() {
            if seq.is_empty() {
                return Err(LampError::EmptyCorpus(format!("sequence {s} is empty")));
            }
            for &id in seq {
                if id >= n {
                    return Err(LampError::InvalidState { id, n });
                }
                token_counts[id] += 1;
            }
        }
        Ok(Self { vocab, sequences, token_counts })
    }

    pub(crate) fn with_counts(
        vocab: Vocabulary,
        sequences: Vec<Vec<usize>>,
        token_counts: Vec<u64>,
    ) -> Result<Self> {
        let mut corpus = Self::new(vocab, sequences)?;
        if token_counts.len() != corpus.vocab.len() {
            return Err(LampError::InvalidVocabulary("count vector length mismatch".into()));
        }
        corpus.token_counts = token_counts;
        Ok(corpus)
    }

    /// Corpus over an anonymous numbered vocabulary of size `n`.
    pub fn from_ids(n: usize, sequences: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(Vocabulary::numbered(n), sequences)
    }

    /// Tokenizes whitespace-separated lines; blank lines are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut vocab = Vocabulary::new();
        let sequences: Vec<Vec<usize>> = text
            .lines()
            .map(|line| line.split_ascii_whitespace().map(|t| vocab.intern(t)).collect::<Vec<_>>())
            .filter(|s| !s.is_empty())
            .collect();
        Self::new(vocab, sequences)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn sequences(&self) -> &[Vec<usize>] {
        &self.sequences
    }

    pub fn token_counts(&self) -> &[u64] {
        &self.token_counts
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// Number of scored positions: every element after the first of each sequence.
    pub fn total_transitions(&self) -> usize {
        self.sequences.iter().map(|s| s.len() - 1).sum()
    }

    pub fn total_tokens(&self) -> usize {
        self.sequences.iter().map(Vec::len).sum()
    }

    /// Re-encodes this corpus against `target`. Tokens missing from `target`
    /// map to its rare token when it has one, and are an error otherwise.
    pub fn reencode(&self, target: &Vocabulary) -> Result<Corpus> {
        let rare = target.rare_id();
        let mut map = Vec::with_capacity(self.vocab.len());
        for (id, token) in self.vocab.tokens().iter().enumerate() {
            let mapped = target.id(token).or(rare);
            if mapped.is_none() && self.token_counts[id] > 0 {
                return Err(LampError::VocabMismatch(format!(
                    "token {token:?} is not in the model vocabulary"
                )));
            }
            map.push(mapped.unwrap_or(usize::MAX));
        }
        let sequences = self
            .sequences
            .iter()
            .map(|s| s.iter().map(|&id| map[id]).collect())
            .collect();
        Corpus::new(target.clone(), sequences)
    }
}
