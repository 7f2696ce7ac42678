use rayon::prelude::*;

use crate::error::{LampError, Result};
use crate::model::{clamped, Corpus, LampModel};

/// Positions per parallel chunk. Fixed so that reductions are bit-stable
/// regardless of the worker count.
pub(crate) const CHUNK: usize = 4096;

/// Every scored position of a corpus with its clamped lag sources.
#[derive(Debug, Clone)]
pub(crate) struct Positions {
    pub k: usize,
    pub targets: Vec<usize>,
    /// `sources[j * k + i]` is the state `i + 1` lags before position `j`.
    pub sources: Vec<usize>,
    /// `(sequence, offset)` of each position, for error reporting.
    pub origin: Vec<(usize, usize)>,
}

impl Positions {
    pub fn new(corpus: &Corpus, k: usize) -> Self {
        let total = corpus.total_transitions();
        let mut targets = Vec::with_capacity(total);
        let mut sources = Vec::with_capacity(total * k);
        let mut origin = Vec::with_capacity(total);
        for (s, seq) in corpus.sequences().iter().enumerate() {
            for t in 1..seq.len() {
                targets.push(seq[t]);
                sources.extend((1..=k).map(|lag| clamped(seq, t, lag)));
                origin.push((s, t));
            }
        }
        Self { k, targets, sources, origin }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn sources(&self, j: usize) -> &[usize] {
        &self.sources[j * self.k..(j + 1) * self.k]
    }

    pub fn zero_probability(&self, j: usize) -> LampError {
        let (sequence, position) = self.origin[j];
        LampError::ZeroProbability { sequence, position }
    }
}

fn check_model(model: &LampModel, corpus: &Corpus) -> Result<()> {
    if model.vocab() != corpus.vocab() {
        return Err(LampError::VocabMismatch("model and corpus vocabularies differ".into()));
    }
    Ok(())
}

/// Denominators `sum_i w_i P(src_i, y)` for every position.
pub(crate) fn denominators(model: &LampModel, pos: &Positions) -> Vec<f64> {
    let w = model.w().weights();
    (0..pos.len())
        .into_par_iter()
        .with_min_len(CHUNK)
        .map(|j| {
            let y = pos.targets[j];
            pos.sources(j)
                .iter()
                .zip(w)
                .map(|(&src, &wi)| wi * model.p().get(src, y))
                .sum()
        })
        .collect()
}

/// Sums fixed-size chunks in parallel, then adds chunk totals in order.
pub(crate) fn ordered_vector_sum<F>(len: usize, dim: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let chunks: Vec<Vec<f64>> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; dim];
            for j in c * CHUNK..((c + 1) * CHUNK).min(len) {
                f(j, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; dim];
    for chunk in chunks {
        for (t, v) in total.iter_mut().zip(chunk) {
            *t += v;
        }
    }
    total
}

/// Analytic gradient of the log-likelihood with respect to `w`
/// (`dL/dw_i = sum_j P(x_{j-i}, x_j) / sum_i' w_i' P(x_{j-i'}, x_j)`).
pub fn grad_w(model: &LampModel, corpus: &Corpus) -> Result<Vec<f64>> {
    check_model(model, corpus)?;
    let pos = Positions::new(corpus, model.k());
    let den = denominators(model, &pos);
    if let Some(j) = den.iter().position(|&d| d <= 0.0) {
        return Err(pos.zero_probability(j));
    }
    Ok(ordered_vector_sum(pos.len(), model.k(), |j, acc| {
        let y = pos.targets[j];
        for (a, &src) in acc.iter_mut().zip(pos.sources(j)) {
            *a += model.p().get(src, y) / den[j];
        }
    }))
}

/// Gradient with respect to the support entries of `P`, aligned with
/// `model.p().rows()`.
pub fn grad_p(model: &LampModel, corpus: &Corpus) -> Result<Vec<Vec<f64>>> {
    check_model(model, corpus)?;
    let pos = Positions::new(corpus, model.k());
    let den = denominators(model, &pos);
    if let Some(j) = den.iter().position(|&d| d <= 0.0) {
        return Err(pos.zero_probability(j));
    }
    let p = model.p();
    let offsets: Vec<usize> = p
        .rows()
        .iter()
        .scan(0, |acc, row| {
            let start = *acc;
            *acc += row.len();
            Some(start)
        })
        .collect();
    let flat = ordered_vector_sum(pos.len(), p.support_size(), |j, acc| {
        let y = pos.targets[j];
        for (&src, &wi) in pos.sources(j).iter().zip(model.w().weights()) {
            if let Some(m) = p.support_index(src, y) {
                acc[offsets[src] + m] += wi / den[j];
            }
        }
    });
    Ok(p.rows()
        .iter()
        .enumerate()
        .map(|(x, row)| flat[offsets[x]..offsets[x] + row.len()].to_vec())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{HistoryDistribution, SparseStochasticMatrix};

    fn worked_model() -> LampModel {
        let p = SparseStochasticMatrix::from_dense(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        LampModel::anonymous(HistoryDistribution::new(vec![0.6, 0.4]).unwrap(), p)
    }

    #[test]
    fn worked_gradient_w() {
        let c = Corpus::from_ids(2, vec![vec![0, 1, 1]]).unwrap();
        let g = grad_w(&worked_model(), &c).unwrap();
        assert!((g[0] - (1.0 + 0.8 / 0.52)).abs() < 1e-12);
        assert!((g[1] - (1.0 + 0.1 / 0.52)).abs() < 1e-12);
        assert!((g[0] - 2.538462).abs() < 1e-6 && (g[1] - 1.192308).abs() < 1e-6);
    }

    #[test]
    fn worked_gradient_p() {
        let c = Corpus::from_ids(2, vec![vec![0, 1, 1]]).unwrap();
        let g = grad_p(&worked_model(), &c).unwrap();
        assert!((g[0][1] - (10.0 + 0.4 / 0.52)).abs() < 1e-12);
        assert!((g[0][1] - 10.769231).abs() < 1e-6);
        assert!((g[1][1] - 0.6 / 0.52).abs() < 1e-12);
        assert_eq!(g[0][0], 0.0);
        assert_eq!(g[1][0], 0.0);
    }

    #[test]
    fn single_lag_gradient_counts_transitions() {
        let c = Corpus::from_ids(2, vec![vec![0, 1, 1, 0], vec![1, 0]]).unwrap();
        let m = worked_model().with_w(HistoryDistribution::first_order(1));
        assert_eq!(grad_w(&m, &c).unwrap(), vec![4.0]);
        // count(x -> y) / P(x, y)
        let g = grad_p(&m, &c).unwrap();
        assert!((g[0][1] - 1.0 / 0.1).abs() < 1e-12);
        assert!((g[1][0] - 2.0 / 0.2).abs() < 1e-12);
        assert!((g[1][1] - 1.0 / 0.8).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_names_the_position() {
        let p = SparseStochasticMatrix::cycle_with_self_loop(3, 0.0).unwrap();
        let m = LampModel::anonymous(HistoryDistribution::first_order(1), p);
        let c = Corpus::from_ids(3, vec![vec![0, 1, 2], vec![0, 1, 1]]).unwrap();
        match grad_w(&m, &c) {
            Err(LampError::ZeroProbability { sequence: 1, position: 2 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
