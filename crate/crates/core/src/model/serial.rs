use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Corpus, HistoryDistribution, LampModel, SparseStochasticMatrix, Vocabulary};
use crate::error::{LampError, Result};

/// On-disk model document. Probabilities are written with shortest
/// round-trip formatting, so values survive a save/load cycle exactly.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelJson {
    pub k: usize,
    pub w: Vec<f64>,
    pub n: usize,
    pub vocab: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rare_token: Option<String>,
    /// `[row, col, prob]` triples in row-major order.
    pub matrix: Vec<(usize, usize, f64)>,
}

pub(crate) fn matrix_triples(p: &SparseStochasticMatrix) -> Vec<(usize, usize, f64)> {
    p.rows()
        .iter()
        .enumerate()
        .flat_map(|(x, row)| row.iter().map(move |&(y, q)| (x, y, q)))
        .collect()
}

pub(crate) fn matrix_from_triples(
    n: usize,
    triples: &[(usize, usize, f64)],
) -> Result<SparseStochasticMatrix> {
    let mut rows = vec![Vec::new(); n];
    for &(x, y, q) in triples {
        if x >= n {
            return Err(LampError::InvalidMatrix(format!("row {x} out of range")));
        }
        rows[x].push((y, q));
    }
    SparseStochasticMatrix::from_rows(n, rows)
}

pub(crate) fn vocab_from_json(tokens: &[String], rare: Option<&str>, n: usize) -> Result<Vocabulary> {
    if tokens.len() != n {
        return Err(LampError::InvalidVocabulary(format!(
            "{} tokens for n = {n}",
            tokens.len()
        )));
    }
    Vocabulary::from_tokens(tokens.iter().cloned())?.with_rare_token(rare)
}

impl From<&LampModel> for ModelJson {
    fn from(model: &LampModel) -> Self {
        Self {
            k: model.k(),
            w: model.w().weights().to_vec(),
            n: model.n(),
            vocab: model.vocab().tokens().to_vec(),
            rare_token: model.vocab().rare_token().map(str::to_string),
            matrix: matrix_triples(model.p()),
        }
    }
}

impl TryFrom<ModelJson> for LampModel {
    type Error = LampError;

    fn try_from(doc: ModelJson) -> Result<Self> {
        if doc.w.len() != doc.k {
            return Err(LampError::InvalidWeights(format!(
                "k = {} but {} weights given",
                doc.k,
                doc.w.len()
            )));
        }
        let w = HistoryDistribution::new(doc.w)?;
        let p = matrix_from_triples(doc.n, &doc.matrix)?;
        let vocab = vocab_from_json(&doc.vocab, doc.rare_token.as_deref(), doc.n)?;
        LampModel::new(w, p, vocab)
    }
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| LampError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| LampError::Io {
        path: path.display().to_string(),
        source,
    })
}

impl LampModel {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelJson::from(self))?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str::<ModelJson>(text)?.try_into()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, &ModelJson::from(self))
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json::<ModelJson>(path)?.try_into()
    }
}

/// Tokenized corpus cache: vocabulary plus integer sequences.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CorpusJson {
    pub vocab: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rare_token: Option<String>,
    pub sequences: Vec<Vec<usize>>,
    #[serde(default)]
    pub token_counts: Option<Vec<u64>>,
}

impl From<&Corpus> for CorpusJson {
    fn from(c: &Corpus) -> Self {
        Self {
            vocab: c.vocab().tokens().to_vec(),
            rare_token: c.vocab().rare_token().map(str::to_string),
            sequences: c.sequences().to_vec(),
            token_counts: Some(c.token_counts().to_vec()),
        }
    }
}

impl TryFrom<CorpusJson> for Corpus {
    type Error = LampError;

    fn try_from(doc: CorpusJson) -> Result<Self> {
        let vocab = vocab_from_json(&doc.vocab, doc.rare_token.as_deref(), doc.vocab.len())?;
        match doc.token_counts {
            Some(counts) => Corpus::with_counts(vocab, doc.sequences, counts),
            None => Corpus::new(vocab, doc.sequences),
        }
    }
}

impl Corpus {
    pub fn save_json(&self, path: &Path) -> Result<()> {
        write_json(path, &CorpusJson::from(self))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        read_json::<CorpusJson>(path)?.try_into()
    }
}
