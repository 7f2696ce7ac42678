use std::collections::HashMap;

use crate::error::{LampError, Result};

/// Dense mapping between token strings and state ids `0..n`.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    rare_token: Option<String>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens && self.rare_token == other.rare_token
    }
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary from an ordered token list. Duplicates are rejected.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Self::new();
        for token in tokens {
            let token = token.into();
            if vocab.index.contains_key(&token) {
                return Err(LampError::InvalidVocabulary(format!(
                    "duplicate token {token:?}"
                )));
            }
            vocab.push(token);
        }
        Ok(vocab)
    }

    /// Anonymous vocabulary `"0", "1", ...` for synthetic models.
    pub fn numbered(n: usize) -> Self {
        let mut vocab = Self::new();
        for i in 0..n {
            vocab.push(i.to_string());
        }
        vocab
    }

    fn push(&mut self, token: String) -> usize {
        let id = self.tokens.len();
        self.index.insert(token.clone(), id);
        self.tokens.push(token);
        id
    }

    /// Returns the id of `token`, inserting it if unseen.
    pub fn intern(&mut self, token: &str) -> usize {
        match self.index.get(token) {
            Some(&id) => id,
            None => self.push(token.to_string()),
        }
    }

    /// Marks `label` as the rare token, adding it to the vocabulary if needed.
    pub fn set_rare_token(&mut self, label: &str) -> usize {
        let id = self.intern(label);
        self.rare_token = Some(label.to_string());
        id
    }

    pub fn with_rare_token(mut self, label: Option<&str>) -> Result<Self> {
        if let Some(label) = label {
            if !self.index.contains_key(label) {
                return Err(LampError::InvalidVocabulary(format!(
                    "rare token {label:?} is not in the vocabulary"
                )));
            }
            self.rare_token = Some(label.to_string());
        }
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn rare_token(&self) -> Option<&str> {
        self.rare_token.as_deref()
    }

    pub fn rare_id(&self) -> Option<usize> {
        self.rare_token.as_deref().and_then(|t| self.id(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_dense_and_inverse() {
        let mut v = Vocabulary::new();
        assert_eq!(v.intern("a"), 0);
        assert_eq!(v.intern("b"), 1);
        assert_eq!(v.intern("a"), 0);
        for (i, t) in v.tokens().iter().enumerate() {
            assert_eq!(v.id(t), Some(i));
        }
    }

    #[test]
    fn duplicate_tokens_rejected() {
        assert!(Vocabulary::from_tokens(["x", "y", "x"]).is_err());
    }

    #[test]
    fn rare_token_must_exist() {
        let v = Vocabulary::from_tokens(["x"]).unwrap();
        assert!(v.clone().with_rare_token(Some("<RARE>")).is_err());
        let mut v = v;
        let id = v.set_rare_token("<RARE>");
        assert_eq!(v.rare_id(), Some(id));
    }
}
