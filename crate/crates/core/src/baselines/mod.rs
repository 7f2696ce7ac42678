//! N-gram reference models scored under the LAMP protocol.
//!
//! Contexts near a sequence start are truncated to the available history,
//! never padded, so every model scores exactly the same positions. For
//! Kneser–Ney the start of a sequence acts as one extra left neighbour when
//! counting continuations.

mod serial;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LampError, Result};
use crate::model::{Corpus, LogLikelihood, Vocabulary};

pub use serial::NgramJson;

/// Default Kneser–Ney discount.
pub const DEFAULT_DISCOUNT: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Smoothing {
    None,
    KneserNey { discount: f64 },
}

type CountTable = BTreeMap<Vec<usize>, BTreeMap<usize, u64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel {
    order: usize,
    smoothing: Smoothing,
    vocab: Vocabulary,
    /// Counts of `(available context, next)`; contexts have length
    /// `min(order, t)`.
    counts: CountTable,
    /// `continuation[m][h][y]`: distinct left neighbours (including the
    /// sequence start) of `h y` with `|h| = m`. Only built for Kneser–Ney.
    continuation: Vec<CountTable>,
}

/// Context available when predicting position `t` of `seq`.
fn context(seq: &[usize], t: usize, order: usize) -> &[usize] {
    &seq[t.saturating_sub(order)..t]
}

fn count_contexts(corpus: &Corpus, order: usize) -> CountTable {
    let partial: Vec<CountTable> = corpus
        .sequences()
        .par_iter()
        .map(|seq| {
            let mut table = CountTable::new();
            for t in 1..seq.len() {
                *table.entry(context(seq, t, order).to_vec()).or_default().entry(seq[t]).or_insert(0) += 1;
            }
            table
        })
        .collect();
    let mut counts = CountTable::new();
    for table in partial {
        for (h, nexts) in table {
            let entry = counts.entry(h).or_default();
            for (y, c) in nexts {
                *entry.entry(y).or_insert(0) += c;
            }
        }
    }
    counts
}

/// Continuation counts for context lengths `0..order`, derived from the raw
/// counts. A raw context `h` of length `L` contributes, for each `m < L`, the
/// suffix `h[L-m..]` with left neighbour `h[L-m-1]`; if `L < order` the
/// context started its sequence and also contributes `h` itself with the
/// start as left neighbour.
fn continuation_counts(counts: &CountTable, order: usize) -> Vec<CountTable> {
    let mut sets: Vec<BTreeMap<Vec<usize>, BTreeMap<usize, BTreeSet<Option<usize>>>>> =
        vec![BTreeMap::new(); order];
    for (h, nexts) in counts {
        let len = h.len();
        for &y in nexts.keys() {
            for m in 0..len {
                let suffix = h[len - m..].to_vec();
                sets[m].entry(suffix).or_default().entry(y).or_default().insert(Some(h[len - m - 1]));
            }
            if len < order {
                sets[len].entry(h.clone()).or_default().entry(y).or_default().insert(None);
            }
        }
    }
    sets.into_iter()
        .map(|level| {
            level
                .into_iter()
                .map(|(h, ys)| (h, ys.into_iter().map(|(y, s)| (y, s.len() as u64)).collect()))
                .collect()
        })
        .collect()
}

/// Maximum-likelihood `order`-gram model.
pub fn fit_naive_ngram(corpus: &Corpus, order: usize) -> Result<NgramModel> {
    if order == 0 {
        return Err(LampError::InvalidConfig("order must be >= 1".into()));
    }
    Ok(NgramModel {
        order,
        smoothing: Smoothing::None,
        vocab: corpus.vocab().clone(),
        counts: count_contexts(corpus, order),
        continuation: Vec::new(),
    })
}

/// Interpolated Kneser–Ney with a single absolute discount.
pub fn fit_kneser_ney(corpus: &Corpus, order: usize, discount: f64) -> Result<NgramModel> {
    if !(discount > 0.0 && discount < 1.0) {
        return Err(LampError::InvalidConfig(format!("discount must be in (0, 1) (got {discount})")));
    }
    let mut model = fit_naive_ngram(corpus, order)?;
    model.smoothing = Smoothing::KneserNey { discount };
    model.continuation = continuation_counts(&model.counts, order);
    Ok(model)
}

impl NgramModel {
    pub(crate) fn from_counts(order: usize, smoothing: Smoothing, vocab: Vocabulary, counts: CountTable) -> Result<Self> {
        if order == 0 {
            return Err(LampError::InvalidConfig("order must be >= 1".into()));
        }
        let n = vocab.len();
        for (h, nexts) in &counts {
            if h.len() > order || h.is_empty() {
                return Err(LampError::InvalidConfig(format!("context length {} for order {order}", h.len())));
            }
            if let Some(&id) = h.iter().chain(nexts.keys()).find(|&&id| id >= n) {
                return Err(LampError::InvalidState { id, n });
            }
            if nexts.values().any(|&c| c == 0) {
                return Err(LampError::InvalidConfig("counts must be positive".into()));
            }
        }
        let continuation = match smoothing {
            Smoothing::None => Vec::new(),
            Smoothing::KneserNey { .. } => continuation_counts(&counts, order),
        };
        Ok(Self { order, smoothing, vocab, counts, continuation })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn n(&self) -> usize {
        self.vocab.len()
    }

    /// Raw `(context, next) -> count` table.
    pub fn counts(&self) -> &BTreeMap<Vec<usize>, BTreeMap<usize, u64>> {
        &self.counts
    }

    /// `P(y | context)`, where `context` is the available history (only
    /// its last `order` states are used).
    pub fn probability(&self, context: &[usize], y: usize) -> f64 {
        let h = &context[context.len().saturating_sub(self.order)..];
        match self.smoothing {
            Smoothing::None => match self.counts.get(h) {
                Some(nexts) => {
                    let total: u64 = nexts.values().sum();
                    nexts.get(&y).map_or(0.0, |&c| c as f64 / total as f64)
                }
                None => 0.0,
            },
            Smoothing::KneserNey { discount } => self.kneser_ney(h, y, true, discount),
        }
    }

    /// `P(. | context)` over the whole vocabulary.
    pub fn distribution(&self, context: &[usize]) -> Vec<f64> {
        (0..self.n()).map(|y| self.probability(context, y)).collect()
    }

    fn kneser_ney(&self, h: &[usize], y: usize, top: bool, d: f64) -> f64 {
        let table = if top { &self.counts } else { &self.continuation[h.len()] };
        let nexts = table.get(h);
        if h.is_empty() {
            let uniform = 1.0 / self.n() as f64;
            return match nexts {
                Some(nexts) => discounted(nexts, y, d, uniform),
                None => uniform,
            };
        }
        let lower = self.kneser_ney(&h[1..], y, false, d);
        match nexts {
            Some(nexts) => discounted(nexts, y, d, lower),
            None => lower,
        }
    }

    /// For a Kneser–Ney context: `(mass removed by discounting, mass handed
    /// to the lower order)`. The two agree for every observed context.
    pub fn discount_balance(&self, context: &[usize]) -> Option<(f64, f64)> {
        let Smoothing::KneserNey { discount } = self.smoothing else {
            return None;
        };
        let nexts = self.counts.get(context)?;
        let total: u64 = nexts.values().sum();
        let removed: f64 = nexts.values().map(|&c| (c as f64).min(discount)).sum::<f64>() / total as f64;
        let backoff = discount * nexts.len() as f64 / total as f64;
        Some((removed, backoff))
    }
}

/// `(max(c(y) - D, 0) + D T lower) / total` for one context.
fn discounted(nexts: &BTreeMap<usize, u64>, y: usize, d: f64, lower: f64) -> f64 {
    let total: u64 = nexts.values().sum();
    let c = nexts.get(&y).copied().unwrap_or(0) as f64;
    ((c - d).max(0.0) + d * nexts.len() as f64 * lower) / total as f64
}

/// Log-likelihood over the same positions as the LAMP evaluator.
pub fn ngram_log_likelihood(model: &NgramModel, corpus: &Corpus) -> Result<LogLikelihood> {
    if model.vocab() != corpus.vocab() {
        return Err(LampError::VocabMismatch("model and corpus vocabularies differ".into()));
    }
    let parts: Vec<(f64, usize)> = corpus
        .sequences()
        .par_iter()
        .map(|seq| {
            let mut ll = 0.0;
            let mut impossible = 0;
            for t in 1..seq.len() {
                let p = model.probability(&seq[..t], seq[t]);
                if p > 0.0 {
                    ll += p.ln();
                } else {
                    impossible += 1;
                }
            }
            (ll, impossible)
        })
        .collect();
    Ok(LogLikelihood::from_parts(parts, corpus.total_transitions()))
}

/// Perplexity `2^(-L_2 / T)`; `+inf` when a transition is impossible.
pub fn ngram_perplexity(model: &NgramModel, corpus: &Corpus) -> Result<f64> {
    ngram_log_likelihood(model, corpus)?.perplexity()
}
