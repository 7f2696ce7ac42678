use std::collections::BTreeMap;

use crate::error::{LampError, Result};
use crate::model::{clamped, Corpus, SparseStochasticMatrix};

/// Initial matrix for training, plus the rows that came out empty.
#[derive(Debug, Clone)]
pub struct EmpiricalMatrix {
    pub matrix: SparseStochasticMatrix,
    /// States never observed with an outgoing transition.
    pub empty_rows: Vec<usize>,
}

/// Empirical transition matrix with support widened to every pair
/// `(x_{j-i}, x_j)`, `i <= k`, seen in the corpus (clamped, per sequence).
///
/// Pairs observed at lag 1 start at their maximum-likelihood ratio, pairs
/// seen only at larger lags at `support_epsilon`; each row is then
/// renormalized.
pub fn empirical_transition_matrix(
    corpus: &Corpus,
    k: usize,
    support_epsilon: f64,
) -> Result<EmpiricalMatrix> {
    if corpus.total_transitions() == 0 {
        return Err(LampError::EmptyCorpus("no transitions to count".into()));
    }
    let n = corpus.vocab().len();
    let mut lag1: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    let mut wide: Vec<BTreeMap<usize, ()>> = vec![BTreeMap::new(); n];
    for seq in corpus.sequences() {
        for t in 1..seq.len() {
            let y = seq[t];
            *lag1[seq[t - 1]].entry(y).or_insert(0.0) += 1.0;
            for lag in 2..=k {
                wide[clamped(seq, t, lag)].insert(y, ());
            }
        }
    }
    let rows: Vec<Vec<(usize, f64)>> = lag1
        .into_iter()
        .zip(wide)
        .map(|(counts, extra)| {
            let total: f64 = counts.values().sum();
            let mut row: BTreeMap<usize, f64> =
                counts.into_iter().map(|(y, c)| (y, c / total)).collect();
            for y in extra.into_keys() {
                row.entry(y).or_insert(support_epsilon);
            }
            row.into_iter().collect()
        })
        .collect();
    let matrix = SparseStochasticMatrix::from_weighted_rows(n, rows)?;
    let empty_rows = matrix.empty_rows();
    Ok(EmpiricalMatrix { matrix, empty_rows })
}
