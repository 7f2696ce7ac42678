use std::collections::VecDeque;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{HistoryDistribution, LampModel, SparseStochasticMatrix};
use crate::error::{LampError, Result};

/// Cumulative row tables for repeated sampling from a sparse matrix.
#[derive(Debug, Clone)]
pub(crate) struct RowSampler {
    cumulative: Vec<Vec<f64>>,
    columns: Vec<Vec<usize>>,
}

impl RowSampler {
    pub(crate) fn new(p: &SparseStochasticMatrix) -> Self {
        let mut cumulative = Vec::with_capacity(p.n());
        let mut columns = Vec::with_capacity(p.n());
        for row in p.rows() {
            let mut acc = 0.0;
            cumulative.push(
                row.iter()
                    .map(|&(_, q)| {
                        acc += q;
                        acc
                    })
                    .collect(),
            );
            columns.push(row.iter().map(|&(c, _)| c).collect());
        }
        Self { cumulative, columns }
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> Result<usize> {
        let cum = &self.cumulative[x];
        let Some(&total) = cum.last() else {
            return Err(LampError::EmptyRow { row: x });
        };
        let u = rng.gen::<f64>() * total;
        let idx = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
        Ok(self.columns[x][idx])
    }
}

pub(crate) fn lag_sampler(w: &HistoryDistribution) -> WeightedIndex<f64> {
    WeightedIndex::new(w.weights()).expect("history distribution has positive mass")
}

/// Last `k` states of a trajectory plus its first state (for clamping).
#[derive(Debug, Clone)]
pub(crate) struct History {
    first: usize,
    recent: VecDeque<usize>,
    k: usize,
}

impl History {
    pub(crate) fn new(start: usize, k: usize) -> Self {
        let mut recent = VecDeque::with_capacity(k + 1);
        recent.push_back(start);
        Self { first: start, recent, k }
    }

    /// State `lag` steps back from the next position, clamped to the first.
    #[inline]
    pub(crate) fn at_lag(&self, lag: usize) -> usize {
        let len = self.recent.len();
        if lag <= len {
            self.recent[len - lag]
        } else {
            self.first
        }
    }

    pub(crate) fn push(&mut self, x: usize) {
        self.recent.push_back(x);
        if self.recent.len() > self.k {
            self.recent.pop_front();
        }
    }

    pub(crate) fn last(&self) -> usize {
        *self.recent.back().expect("history is never empty")
    }
}

/// Incremental sampler for one LAMP trajectory.
///
/// Each step draws a lag `i ~ w`, then moves from the (clamped) state `i`
/// steps back using `P`. Only the last `k` states are retained.
#[derive(Debug, Clone)]
pub struct LampWalker<'a> {
    model: &'a LampModel,
    lags: WeightedIndex<f64>,
    rows: RowSampler,
    history: History,
}

impl<'a> LampWalker<'a> {
    pub fn new(model: &'a LampModel, start: usize) -> Result<Self> {
        if start >= model.n() {
            return Err(LampError::InvalidState { id: start, n: model.n() });
        }
        Ok(Self {
            model,
            lags: lag_sampler(model.w()),
            rows: RowSampler::new(model.p()),
            history: History::new(start, model.k()),
        })
    }

    /// Restarts at `start` without rebuilding the sampling tables.
    pub fn reset(&mut self, start: usize) {
        self.history = History::new(start, self.model.k());
    }

    pub fn current(&self) -> usize {
        self.history.last()
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize> {
        let lag = self.lags.sample(rng) + 1;
        let src = self.history.at_lag(lag);
        let next = self.rows.sample(src, rng)?;
        self.history.push(next);
        Ok(next)
    }
}

/// Samples a trajectory of `length` states beginning with `start`.
pub fn generate(model: &LampModel, start: usize, length: usize, seed: u64) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walker = LampWalker::new(model, start)?;
    let mut out = Vec::with_capacity(length);
    if length == 0 {
        return Ok(out);
    }
    out.push(start);
    for _ in 1..length {
        out.push(walker.step(&mut rng)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle_lamp(n: usize, eps: f64) -> LampModel {
        LampModel::anonymous(
            HistoryDistribution::new(vec![0.5, 0.5]).unwrap(),
            SparseStochasticMatrix::cycle_with_self_loop(n, eps).unwrap(),
        )
    }

    #[test]
    fn length_one_is_start() {
        assert_eq!(generate(&cycle_lamp(4, 0.1), 2, 1, 0).unwrap(), vec![2]);
    }

    #[test]
    fn deterministic_given_seed() {
        let m = cycle_lamp(5, 0.2);
        assert_eq!(generate(&m, 0, 500, 9).unwrap(), generate(&m, 0, 500, 9).unwrap());
        assert_ne!(generate(&m, 0, 500, 9).unwrap(), generate(&m, 0, 500, 10).unwrap());
    }

    #[test]
    fn history_clamps_to_first_state() {
        let mut h = History::new(3, 4);
        assert_eq!(h.at_lag(1), 3);
        assert_eq!(h.at_lag(4), 3);
        h.push(5);
        assert_eq!(h.at_lag(1), 5);
        assert_eq!(h.at_lag(2), 3);
        assert_eq!(h.at_lag(3), 3);
        for x in [6, 7, 8] {
            h.push(x);
        }
        assert_eq!((1..=4).map(|l| h.at_lag(l)).collect::<Vec<_>>(), vec![8, 7, 6, 5]);
        assert_eq!(h.at_lag(4), 5);
    }

    #[test]
    fn triples_never_appear_without_self_loop() {
        let seq = generate(&cycle_lamp(6, 0.0), 0, 100_000, 1).unwrap();
        assert!(seq.windows(3).all(|w| !(w[0] == w[1] && w[1] == w[2])));
        assert!(seq.windows(2).any(|w| w[0] == w[1]));
    }

    #[test]
    fn empty_row_stops_generation() {
        let p = SparseStochasticMatrix::from_rows(2, vec![vec![(1, 1.0)], vec![]]).unwrap();
        let m = LampModel::anonymous(HistoryDistribution::first_order(1), p);
        assert!(matches!(generate(&m, 0, 3, 0), Err(LampError::EmptyRow { row: 1 })));
    }
}
