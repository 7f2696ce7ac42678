//! Generalized LAMP: a separate transition matrix per lag.
//!
//! `glamp(w, P^(1..l), f)` moves to `y` with probability
//! `sum_i w_i P^(f(i))(x_{max(0, t-i)}, y)`. The matrix is chosen by the lag
//! `i` even when the source index clamps to the first state. With one
//! matrix this is exactly a LAMP.

mod lift;
mod serial;

use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{LampError, Result};
use crate::model::{
    clamped, lag_sampler, Corpus, History, HistoryDistribution, LampModel, LogLikelihood, RowSampler,
    SparseStochasticMatrix, Vocabulary,
};

pub use lift::{lift_to_kth_order, LiftedChain, LIFT_GUARD};
pub use serial::GlampJson;

#[derive(Debug, Clone, PartialEq)]
pub struct GlampModel {
    w: HistoryDistribution,
    matrices: Vec<SparseStochasticMatrix>,
    /// Zero-based matrix index per lag (`lag_map[i - 1] = f(i) - 1`).
    lag_map: Vec<usize>,
    vocab: Vocabulary,
}

impl GlampModel {
    /// `lag_map` holds zero-based matrix indices, one per lag.
    pub fn new(
        w: HistoryDistribution,
        matrices: Vec<SparseStochasticMatrix>,
        lag_map: Vec<usize>,
        vocab: Vocabulary,
    ) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(LampError::InvalidMatrix("at least one matrix is required".into()));
        };
        let n = first.n();
        if let Some(m) = matrices.iter().find(|m| m.n() != n) {
            return Err(LampError::InvalidMatrix(format!("matrix sizes differ ({} vs {n})", m.n())));
        }
        if lag_map.len() != w.k() {
            return Err(LampError::InvalidConfig(format!(
                "lag map has {} entries for k = {}",
                lag_map.len(),
                w.k()
            )));
        }
        if let Some(&m) = lag_map.iter().find(|&&m| m >= matrices.len()) {
            return Err(LampError::InvalidConfig(format!(
                "lag map refers to matrix {} of {}",
                m + 1,
                matrices.len()
            )));
        }
        if vocab.len() != n {
            return Err(LampError::InvalidVocabulary(format!("{} tokens for n = {n}", vocab.len())));
        }
        Ok(Self { w, matrices, lag_map, vocab })
    }

    pub fn anonymous(w: HistoryDistribution, matrices: Vec<SparseStochasticMatrix>, lag_map: Vec<usize>) -> Result<Self> {
        let n = matrices.first().map_or(0, SparseStochasticMatrix::n);
        Self::new(w, matrices, lag_map, Vocabulary::numbered(n))
    }

    /// The one-matrix GLAMP equivalent to `model`.
    pub fn from_lamp(model: &LampModel) -> Self {
        Self {
            w: model.w().clone(),
            matrices: vec![model.p().clone()],
            lag_map: vec![0; model.k()],
            vocab: model.vocab().clone(),
        }
    }

    pub fn w(&self) -> &HistoryDistribution {
        &self.w
    }

    pub fn matrices(&self) -> &[SparseStochasticMatrix] {
        &self.matrices
    }

    pub fn lag_map(&self) -> &[usize] {
        &self.lag_map
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn k(&self) -> usize {
        self.w.k()
    }

    pub fn n(&self) -> usize {
        self.matrices[0].n()
    }

    /// Matrix used for `lag` (1-based).
    pub fn matrix_for_lag(&self, lag: usize) -> &SparseStochasticMatrix {
        &self.matrices[self.lag_map[lag - 1]]
    }

    fn probability(&self, seq: &[usize], t: usize) -> f64 {
        let y = seq[t];
        self.w
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, &wi)| wi != 0.0)
            .map(|(i, &wi)| wi * self.matrix_for_lag(i + 1).get(clamped(seq, t, i + 1), y))
            .sum()
    }
}

/// Next-state distribution after `history`.
pub fn glamp_transition_distribution(model: &GlampModel, history: &[usize]) -> Result<Vec<f64>> {
    if history.is_empty() {
        return Err(LampError::EmptyHistory);
    }
    let n = model.n();
    if let Some(&id) = history.iter().find(|&&id| id >= n) {
        return Err(LampError::InvalidState { id, n });
    }
    let t = history.len();
    let mut out = vec![0.0; n];
    for (i, &wi) in model.w.weights().iter().enumerate() {
        let src = clamped(history, t, i + 1);
        let row = model.matrix_for_lag(i + 1).row(src);
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

/// Log-likelihood under the same scoring protocol as a LAMP.
pub fn glamp_log_likelihood(model: &GlampModel, corpus: &Corpus) -> Result<LogLikelihood> {
    if model.vocab() != corpus.vocab() {
        return Err(LampError::VocabMismatch("model and corpus vocabularies differ".into()));
    }
    let per_sequence: Vec<(f64, usize)> = corpus
        .sequences()
        .par_iter()
        .map(|seq| {
            let mut total = 0.0;
            let mut impossible = 0;
            for t in 1..seq.len() {
                let p = model.probability(seq, t);
                if p > 0.0 {
                    total += p.ln();
                } else {
                    impossible += 1;
                }
            }
            (total, impossible)
        })
        .collect();
    Ok(LogLikelihood::from_parts(per_sequence, corpus.total_transitions()))
}

/// Samples a trajectory of `length` states starting at `start`. Draws are
/// made in the same order as [`crate::model::generate`], so a one-matrix
/// GLAMP reproduces the LAMP trajectory for the same seed.
pub fn glamp_generate(model: &GlampModel, start: usize, length: usize, seed: u64) -> Result<Vec<usize>> {
    if start >= model.n() {
        return Err(LampError::InvalidState { id: start, n: model.n() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lags = lag_sampler(&model.w);
    let samplers: Vec<RowSampler> = model.matrices.iter().map(RowSampler::new).collect();
    let mut history = History::new(start, model.k());
    let mut out = Vec::with_capacity(length);
    if length == 0 {
        return Ok(out);
    }
    out.push(start);
    for _ in 1..length {
        let lag = lags.sample(&mut rng) + 1;
        let src = history.at_lag(lag);
        let next = samplers[model.lag_map[lag - 1]].sample(src, &mut rng)?;
        history.push(next);
        out.push(next);
    }
    Ok(out)
}

/// `sum_i w_i P^(f(i))`, whose ergodicity decides whether the GLAMP has an
/// equilibrium.
pub fn mixture_matrix(model: &GlampModel) -> SparseStochasticMatrix {
    let mut coefficient = vec![0.0; model.matrices.len()];
    for (&m, &wi) in model.lag_map.iter().zip(model.w.weights()) {
        coefficient[m] += wi;
    }
    let used: Vec<usize> = (0..coefficient.len()).filter(|&m| coefficient[m] > 0.0).collect();
    if let [only] = used[..] {
        return model.matrices[only].clone();
    }
    let n = model.n();
    let rows = (0..n)
        .map(|x| {
            let mut dense = vec![0.0; n];
            for &m in &used {
                for &(y, p) in model.matrices[m].row(x) {
                    dense[y] += coefficient[m] * p;
                }
            }
            dense.into_iter().enumerate().filter(|&(_, v)| v > 0.0).collect()
        })
        .collect();
    SparseStochasticMatrix::from_weighted_rows(n, rows).expect("convex combination of stochastic rows")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate, log_likelihood, transition_distribution};

    fn two_matrix_example() -> GlampModel {
        let p1 = SparseStochasticMatrix::from_dense(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let p2 = SparseStochasticMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        GlampModel::anonymous(HistoryDistribution::new(vec![0.5, 0.5]).unwrap(), vec![p1, p2], vec![0, 1]).unwrap()
    }

    #[test]
    fn hand_evaluated_distribution() {
        let d = glamp_transition_distribution(&two_matrix_example(), &[0, 1]).unwrap();
        assert_eq!(d, vec![0.25, 0.75]);
    }

    #[test]
    fn clamped_lag_keeps_its_matrix() {
        // history [1]: both lags read state 1, lag 2 still uses P2
        let d = glamp_transition_distribution(&two_matrix_example(), &[1]).unwrap();
        assert_eq!(d, vec![0.5 * 0.5 + 0.5 * 1.0, 0.5 * 0.5]);
    }

    #[test]
    fn hand_evaluated_mixture() {
        let m = mixture_matrix(&two_matrix_example());
        assert_eq!(m.to_dense(), vec![vec![0.25, 0.75], vec![0.75, 0.25]]);
    }

    #[test]
    fn concentrated_weight_selects_matrix() {
        let base = two_matrix_example();
        let g = GlampModel::anonymous(
            HistoryDistribution::new(vec![1.0, 0.0]).unwrap(),
            base.matrices().to_vec(),
            vec![1, 0],
        )
        .unwrap();
        assert_eq!(&mixture_matrix(&g), &base.matrices()[1]);
    }

    #[test]
    fn single_matrix_reduces_to_lamp() {
        let p = SparseStochasticMatrix::cycle_with_self_loop(4, 0.3).unwrap();
        let lamp = LampModel::anonymous(HistoryDistribution::new(vec![0.2, 0.5, 0.3]).unwrap(), p);
        let g = GlampModel::from_lamp(&lamp);
        assert_eq!(&mixture_matrix(&g), lamp.p());
        for history in [vec![0], vec![0, 0], vec![3, 0, 1, 2], vec![1, 1, 2]] {
            assert_eq!(
                glamp_transition_distribution(&g, &history).unwrap(),
                transition_distribution(&lamp, &history).unwrap()
            );
        }
        let seq = generate(&lamp, 0, 300, 5).unwrap();
        assert_eq!(glamp_generate(&g, 0, 300, 5).unwrap(), seq);
        let c = Corpus::from_ids(4, vec![seq]).unwrap();
        assert_eq!(glamp_log_likelihood(&g, &c).unwrap(), log_likelihood(&lamp, &c).unwrap());
    }

    #[test]
    fn rejects_bad_lag_maps() {
        let p = SparseStochasticMatrix::uniform(2);
        let w = HistoryDistribution::new(vec![0.5, 0.5]).unwrap();
        assert!(GlampModel::anonymous(w.clone(), vec![p.clone()], vec![0]).is_err());
        assert!(GlampModel::anonymous(w.clone(), vec![p.clone()], vec![0, 1]).is_err());
        assert!(GlampModel::anonymous(w, vec![p, SparseStochasticMatrix::uniform(3)], vec![0, 1]).is_err());
    }
}
