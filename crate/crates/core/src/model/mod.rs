//! Domain types and exact LAMP semantics.
//!
//! A LAMP over `n` states is a pair `(w, P)`: given the history
//! `x_0, ..., x_{t-1}`, the next state is `y` with probability
//! `sum_i w_i P(x_{max(0, t-i)}, y)`. References before the start of a
//! sequence clamp to its first element.

mod corpus;
mod eval;
pub mod expressivity;
mod history;
mod matrix;
mod sample;
mod serial;
mod vocab;

pub use corpus::Corpus;
pub use eval::{
    log_likelihood, log_likelihood_with, perplexity, perplexity_with, transition_distribution,
    EvalOptions, LogLikelihood, DEFAULT_FLOOR,
};
pub use history::{HistoryDistribution, WEIGHT_SUM_TOL};
pub use matrix::{SparseStochasticMatrix, ROW_SUM_TOL};
pub use sample::{generate, LampWalker};
pub(crate) use sample::{lag_sampler, History, RowSampler};
pub use serial::{CorpusJson, ModelJson};
pub(crate) use serial::{matrix_from_triples, matrix_triples, read_json, vocab_from_json, write_json};
pub use vocab::Vocabulary;

use crate::error::{LampError, Result};

/// Source state for `lag` when predicting position `t` of `seq`
/// (`x_{max(0, t - lag)}`).
#[inline]
pub(crate) fn clamped(seq: &[usize], t: usize, lag: usize) -> usize {
    seq[t.saturating_sub(lag)]
}

/// A linear additive Markov process `lamp_k(w, P)` with its vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct LampModel {
    w: HistoryDistribution,
    p: SparseStochasticMatrix,
    vocab: Vocabulary,
}

impl LampModel {
    pub fn new(w: HistoryDistribution, p: SparseStochasticMatrix, vocab: Vocabulary) -> Result<Self> {
        if p.n() != vocab.len() {
            return Err(LampError::InvalidMatrix(format!(
                "matrix has {} states but vocabulary has {}",
                p.n(),
                vocab.len()
            )));
        }
        Ok(Self { w, p, vocab })
    }

    /// Model over an anonymous numbered vocabulary.
    pub fn anonymous(w: HistoryDistribution, p: SparseStochasticMatrix) -> Self {
        let vocab = Vocabulary::numbered(p.n());
        Self { w, p, vocab }
    }

    pub fn w(&self) -> &HistoryDistribution {
        &self.w
    }

    pub fn p(&self) -> &SparseStochasticMatrix {
        &self.p
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn k(&self) -> usize {
        self.w.k()
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    pub fn with_w(&self, w: HistoryDistribution) -> Self {
        Self { w, ..self.clone() }
    }

    pub fn with_p(&self, p: SparseStochasticMatrix) -> Result<Self> {
        Self::new(self.w.clone(), p, self.vocab.clone())
    }

    pub(crate) fn into_parts(self) -> (HistoryDistribution, SparseStochasticMatrix, Vocabulary) {
        (self.w, self.p, self.vocab)
    }

    /// Number of free parameters, nnz(P) + k.
    pub fn parameter_count(&self) -> usize {
        self.p.support_size() + self.k()
    }
}
