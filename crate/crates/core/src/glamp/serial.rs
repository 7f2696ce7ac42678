use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GlampModel;
use crate::error::{LampError, Result};
use crate::model::{matrix_from_triples, matrix_triples, read_json, vocab_from_json, write_json, HistoryDistribution};

/// On-disk GLAMP document: the model layout with one triple list per matrix
/// and a 1-based lag map.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GlampJson {
    pub k: usize,
    pub w: Vec<f64>,
    pub n: usize,
    pub vocab: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rare_token: Option<String>,
    pub matrices: Vec<Vec<(usize, usize, f64)>>,
    pub lag_map: Vec<usize>,
}

impl From<&GlampModel> for GlampJson {
    fn from(model: &GlampModel) -> Self {
        Self {
            k: model.k(),
            w: model.w().weights().to_vec(),
            n: model.n(),
            vocab: model.vocab().tokens().to_vec(),
            rare_token: model.vocab().rare_token().map(str::to_string),
            matrices: model.matrices().iter().map(matrix_triples).collect(),
            lag_map: model.lag_map().iter().map(|m| m + 1).collect(),
        }
    }
}

impl TryFrom<GlampJson> for GlampModel {
    type Error = LampError;

    fn try_from(doc: GlampJson) -> Result<Self> {
        if doc.w.len() != doc.k {
            return Err(LampError::InvalidWeights(format!("k = {} but {} weights given", doc.k, doc.w.len())));
        }
        if doc.lag_map.contains(&0) {
            return Err(LampError::InvalidConfig("lag_map entries are 1-based".into()));
        }
        let w = HistoryDistribution::new(doc.w)?;
        let matrices = doc
            .matrices
            .iter()
            .map(|t| matrix_from_triples(doc.n, t))
            .collect::<Result<Vec<_>>>()?;
        let vocab = vocab_from_json(&doc.vocab, doc.rare_token.as_deref(), doc.n)?;
        GlampModel::new(w, matrices, doc.lag_map.iter().map(|m| m - 1).collect(), vocab)
    }
}

impl GlampModel {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&GlampJson::from(self))?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str::<GlampJson>(text)?.try_into()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, &GlampJson::from(self))
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json::<GlampJson>(path)?.try_into()
    }
}
