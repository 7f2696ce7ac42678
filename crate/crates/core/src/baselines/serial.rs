use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CountTable, NgramModel, Smoothing};
use crate::error::{LampError, Result};
use crate::model::{read_json, vocab_from_json, write_json};

/// On-disk n-gram document. `discount` is `null` for the unsmoothed model.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NgramJson {
    pub order: usize,
    pub discount: Option<f64>,
    pub vocab: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rare_token: Option<String>,
    /// `[context, next, count]` triples.
    pub counts: Vec<(Vec<usize>, usize, u64)>,
}

impl From<&NgramModel> for NgramJson {
    fn from(model: &NgramModel) -> Self {
        Self {
            order: model.order,
            discount: match model.smoothing {
                Smoothing::None => None,
                Smoothing::KneserNey { discount } => Some(discount),
            },
            vocab: model.vocab.tokens().to_vec(),
            rare_token: model.vocab.rare_token().map(str::to_string),
            counts: model
                .counts
                .iter()
                .flat_map(|(h, nexts)| nexts.iter().map(move |(&y, &c)| (h.clone(), y, c)))
                .collect(),
        }
    }
}

impl TryFrom<NgramJson> for NgramModel {
    type Error = LampError;

    fn try_from(doc: NgramJson) -> Result<Self> {
        let smoothing = match doc.discount {
            None => Smoothing::None,
            Some(d) if d > 0.0 && d < 1.0 => Smoothing::KneserNey { discount: d },
            Some(d) => return Err(LampError::InvalidConfig(format!("discount must be in (0, 1) (got {d})"))),
        };
        let vocab = vocab_from_json(&doc.vocab, doc.rare_token.as_deref(), doc.vocab.len())?;
        let mut counts = CountTable::new();
        for (h, y, c) in doc.counts {
            if counts.entry(h).or_default().insert(y, c).is_some() {
                return Err(LampError::InvalidConfig("duplicate (context, next) entry".into()));
            }
        }
        NgramModel::from_counts(doc.order, smoothing, vocab, counts)
    }
}

impl NgramModel {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&NgramJson::from(self))?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str::<NgramJson>(text)?.try_into()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, &NgramJson::from(self))
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json::<NgramJson>(path)?.try_into()
    }
}
