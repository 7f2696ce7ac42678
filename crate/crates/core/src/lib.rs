//! Linear additive Markov processes (LAMP).
//!
//! A LAMP predicts the next state by drawing a lag `i` from a history
//! distribution `w` and stepping once through a stochastic matrix `P` from
//! the state `i` positions back. This crate provides exact evaluation and
//! sampling ([`model`]), maximum-likelihood training ([`learn`]),
//! equilibrium and mixing-time tooling ([`analysis`]), the per-lag
//! generalization ([`glamp`]), n-gram baselines ([`baselines`]) and corpus
//! preprocessing ([`data`]).

pub mod analysis;
pub mod baselines;
pub mod data;
pub mod error;
pub mod glamp;
pub mod learn;
pub mod model;

pub use error::{ErrorClass, LampError, Result};
pub use model::{
    generate, log_likelihood, perplexity, transition_distribution, Corpus, HistoryDistribution,
    LampModel, SparseStochasticMatrix, Vocabulary,
};
