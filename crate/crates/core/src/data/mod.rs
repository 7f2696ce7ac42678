//! Corpus ingestion and preprocessing.
//!
//! The pipeline is: load, collapse repeats, replace rare tokens (by their
//! counts in the loaded corpus), collapse again to merge adjacent rare
//! tokens, and drop sequences left with nothing to score.

mod split;
mod transform;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LampError, Result};
use crate::model::{Corpus, Vocabulary};

pub use split::{fold_assignments, k_fold, split};
pub use transform::{apply_rare_threshold, collapse_repeats};

pub const DEFAULT_RARE_TOKEN: &str = "<RARE>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub collapse_repeats: bool,
    pub rare_min_count: u64,
    pub rare_token_label: String,
    pub split_fraction: f64,
    pub split_seed: u64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            collapse_repeats: true,
            rare_min_count: 10,
            rare_token_label: DEFAULT_RARE_TOKEN.into(),
            split_fraction: 0.9,
            split_seed: 0,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(LampError::InvalidConfig(format!(
                "split_fraction must be in (0, 1) (got {})",
                self.split_fraction
            )));
        }
        if self.rare_token_label.split_whitespace().count() != 1 {
            return Err(LampError::InvalidConfig("rare token label must be one whitespace-free word".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub sequences: usize,
    pub skipped_blank_lines: usize,
    /// Whether `limit` stopped reading before the end of the file.
    pub truncated: bool,
}

/// Reads one sequence per line of whitespace-separated tokens. The
/// vocabulary follows first appearance; blank lines are skipped and counted.
pub fn load_corpus(path: &Path, limit: Option<usize>) -> Result<(Corpus, LoadReport)> {
    let text = std::fs::read_to_string(path).map_err(|source| LampError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_corpus(&text, limit)
}

/// [`load_corpus`] on in-memory text.
pub fn parse_corpus(text: &str, limit: Option<usize>) -> Result<(Corpus, LoadReport)> {
    let mut vocab = Vocabulary::new();
    let mut sequences = Vec::new();
    let mut report = LoadReport::default();
    for line in text.lines() {
        if line.split_whitespace().next().is_none() {
            report.skipped_blank_lines += 1;
            continue;
        }
        if limit.is_some_and(|l| sequences.len() >= l) {
            report.truncated = true;
            break;
        }
        sequences.push(line.split_whitespace().map(|t| vocab.intern(t)).collect());
    }
    if sequences.is_empty() {
        return Err(LampError::EmptyCorpus("no nonempty lines".into()));
    }
    report.sequences = sequences.len();
    Ok((Corpus::new(vocab, sequences)?, report))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PreprocessReport {
    pub input_sequences: usize,
    pub input_tokens: usize,
    /// Tokens removed by the two collapsing passes.
    pub collapsed_tokens: usize,
    /// Vocabulary entries replaced by the rare token.
    pub rare_types: usize,
    /// Sequences of length 1 dropped at the end.
    pub dropped_sequences: usize,
    pub output_sequences: usize,
    pub output_vocab: usize,
}

/// Runs collapse, rare replacement, a second collapse and the length-1
/// filter, as configured.
pub fn preprocess(corpus: &Corpus, cfg: &PreprocessConfig) -> Result<(Corpus, PreprocessReport)> {
    cfg.validate()?;
    let mut report = PreprocessReport {
        input_sequences: corpus.len(),
        input_tokens: corpus.total_tokens(),
        ..Default::default()
    };
    let collapse = |c: &Corpus| if cfg.collapse_repeats { collapse_repeats(c) } else { c.clone() };
    let first = collapse(corpus);
    let replaced = apply_rare_threshold(&first, cfg.rare_min_count, &cfg.rare_token_label)?;
    if cfg.rare_min_count > 0 {
        let rare_id = corpus.vocab().rare_id();
        report.rare_types = (0..corpus.vocab().len())
            .filter(|&id| corpus.token_counts()[id] < cfg.rare_min_count && Some(id) != rare_id)
            .count();
    }
    let second = collapse(&replaced);
    report.collapsed_tokens = corpus.total_tokens() - second.total_tokens();

    let (kept, dropped): (Vec<_>, Vec<_>) = second.sequences().iter().cloned().partition(|s| s.len() > 1);
    report.dropped_sequences = dropped.len();
    if kept.is_empty() {
        return Err(LampError::EmptyCorpus("every sequence has length 1 after preprocessing".into()));
    }
    let out = Corpus::with_counts(second.vocab().clone(), kept, second.token_counts().to_vec())?;
    report.output_sequences = out.len();
    report.output_vocab = out.vocab().len();
    Ok((out, report))
}
