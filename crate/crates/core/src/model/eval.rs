use rayon::prelude::*;
use serde::Serialize;

use super::{clamped, Corpus, LampModel};
use crate::error::{LampError, Result};

/// Probability floor used by smoothed evaluation.
pub const DEFAULT_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvalOptions {
    /// When set, each predictive distribution is floored at this value and
    /// renormalized before scoring, so no transition is impossible.
    pub floor: Option<f64>,
}

impl EvalOptions {
    pub fn floored() -> Self {
        Self { floor: Some(DEFAULT_FLOOR) }
    }
}

/// Natural-log likelihood of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogLikelihood {
    /// Total log-likelihood; `-inf` when any scored transition is impossible.
    pub total: f64,
    /// Sum over the possible transitions only.
    pub finite_total: f64,
    pub per_sequence: Vec<f64>,
    pub scored: usize,
    pub impossible: usize,
}

impl LogLikelihood {
    /// Assembles per-sequence `(finite log-likelihood, impossible count)`.
    pub(crate) fn from_parts(parts: Vec<(f64, usize)>, scored: usize) -> Self {
        let mut finite_total = 0.0;
        let mut impossible = 0;
        let mut per_sequence = Vec::with_capacity(parts.len());
        for (ll, imp) in parts {
            finite_total += ll;
            impossible += imp;
            per_sequence.push(if imp > 0 { f64::NEG_INFINITY } else { ll });
        }
        Self {
            total: if impossible > 0 { f64::NEG_INFINITY } else { finite_total },
            finite_total,
            per_sequence,
            scored,
            impossible,
        }
    }

    /// `2^(-L_2 / T)` with `L_2` the base-2 log-likelihood; `+inf` when any
    /// transition is impossible.
    pub fn perplexity(&self) -> Result<f64> {
        if self.scored == 0 {
            return Err(LampError::EmptyCorpus("no scored transitions".into()));
        }
        if self.impossible > 0 {
            return Ok(f64::INFINITY);
        }
        let log2 = self.total / std::f64::consts::LN_2;
        Ok((-log2 / self.scored as f64).exp2())
    }
}

/// Next-state distribution given a nonempty history, as a dense vector.
pub fn transition_distribution(model: &LampModel, history: &[usize]) -> Result<Vec<f64>> {
    if history.is_empty() {
        return Err(LampError::EmptyHistory);
    }
    let n = model.n();
    if let Some(&id) = history.iter().find(|&&id| id >= n) {
        return Err(LampError::InvalidState { id, n });
    }
    let t = history.len();
    let mut out = vec![0.0; n];
    for (i, &wi) in model.w().weights().iter().enumerate() {
        let src = clamped(history, t, i + 1);
        let row = model.p().row(src);
        if row.is_empty() {
            return Err(LampError::EmptyRow { row: src });
        }
        if wi == 0.0 {
            continue;
        }
        for &(y, p) in row {
            out[y] += wi * p;
        }
    }
    Ok(out)
}

/// Probability the model assigns to `seq[t]` given `seq[..t]`.
#[inline]
pub(crate) fn position_probability(model: &LampModel, seq: &[usize], t: usize) -> f64 {
    let y = seq[t];
    model
        .w()
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, &wi)| wi != 0.0)
        .map(|(i, &wi)| wi * model.p().get(clamped(seq, t, i + 1), y))
        .sum()
}

fn floored_probability(model: &LampModel, seq: &[usize], t: usize, floor: f64) -> f64 {
    let mut mix: Vec<(usize, f64)> = Vec::new();
    for (i, &wi) in model.w().weights().iter().enumerate() {
        if wi == 0.0 {
            continue;
        }
        mix.extend(model.p().row(clamped(seq, t, i + 1)).iter().map(|&(y, p)| (y, wi * p)));
    }
    mix.sort_by_key(|&(y, _)| y);
    let mut support = 0usize;
    let mut mass = 0.0;
    let mut target = 0.0;
    let mut idx = 0;
    while idx < mix.len() {
        let y = mix[idx].0;
        let mut p = 0.0;
        while idx < mix.len() && mix[idx].0 == y {
            p += mix[idx].1;
            idx += 1;
        }
        support += 1;
        let q = p.max(floor);
        mass += q;
        if y == seq[t] {
            target = q;
        }
    }
    if target == 0.0 {
        target = floor;
    }
    mass += floor * (model.n() - support) as f64;
    target / mass
}

fn check_vocab(model: &LampModel, corpus: &Corpus) -> Result<()> {
    if model.vocab() != corpus.vocab() {
        return Err(LampError::VocabMismatch(format!(
            "model has {} tokens, corpus has {} (or token order differs)",
            model.vocab().len(),
            corpus.vocab().len()
        )));
    }
    Ok(())
}

pub fn log_likelihood(model: &LampModel, corpus: &Corpus) -> Result<LogLikelihood> {
    log_likelihood_with(model, corpus, EvalOptions::default())
}

/// Log-likelihood scoring positions `1..len` of every sequence. History
/// never crosses sequence boundaries.
pub fn log_likelihood_with(
    model: &LampModel,
    corpus: &Corpus,
    opts: EvalOptions,
) -> Result<LogLikelihood> {
    check_vocab(model, corpus)?;
    let parts: Vec<(f64, usize)> = corpus
        .sequences()
        .par_iter()
        .map(|seq| {
            let mut ll = 0.0;
            let mut impossible = 0;
            for t in 1..seq.len() {
                let p = match opts.floor {
                    Some(floor) => floored_probability(model, seq, t, floor),
                    None => position_probability(model, seq, t),
                };
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

pub fn perplexity(model: &LampModel, corpus: &Corpus) -> Result<f64> {
    log_likelihood(model, corpus)?.perplexity()
}

pub fn perplexity_with(model: &LampModel, corpus: &Corpus, opts: EvalOptions) -> Result<f64> {
    log_likelihood_with(model, corpus, opts)?.perplexity()
}
