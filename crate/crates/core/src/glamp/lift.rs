use std::collections::{HashMap, VecDeque};

use super::GlampModel;
use crate::error::{LampError, Result};
use crate::model::SparseStochasticMatrix;

/// Largest tuple space `n^k` the lift will consider.
pub const LIFT_GUARD: usize = 100_000;

/// A GLAMP written as a first-order chain over `k`-tuples of states
/// (oldest first), restricted to tuples reachable from the start tuples.
#[derive(Debug, Clone)]
pub struct LiftedChain {
    n: usize,
    tuples: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    q: SparseStochasticMatrix,
}

impl LiftedChain {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn q(&self) -> &SparseStochasticMatrix {
        &self.q
    }

    pub fn index_of(&self, tuple: &[usize]) -> Option<usize> {
        self.index.get(tuple).copied()
    }

    /// Transition probability between two tuples (0 if either is absent).
    pub fn probability(&self, from: &[usize], to: &[usize]) -> f64 {
        match (self.index_of(from), self.index_of(to)) {
            (Some(a), Some(b)) => self.q.get(a, b),
            _ => 0.0,
        }
    }

    /// Projects a distribution over tuples onto the most recent state.
    pub fn marginal_last(&self, dist: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (tuple, &p) in self.tuples.iter().zip(dist) {
            out[*tuple.last().expect("k >= 1")] += p;
        }
        out
    }
}

/// Lifts `model` to a `k`-th order chain. Tuple `(x_1, ..., x_k)` moves to
/// `(x_2, ..., x_k, y)` with probability `sum_i w_i P^(f(i))(x_{k+1-i}, y)`:
/// lag `i` reads the state `i` places from the end and uses matrix `f(i)`.
/// States are discovered breadth-first from `(x, ..., x)` for each start `x`.
pub fn lift_to_kth_order(model: &GlampModel, start_states: &[usize]) -> Result<LiftedChain> {
    let (n, k) = (model.n(), model.k());
    match n.checked_pow(k as u32) {
        Some(size) if size <= LIFT_GUARD => {}
        _ => {
            return Err(LampError::GuardExceeded(format!(
                "tuple space {n}^{k} exceeds {LIFT_GUARD}"
            )))
        }
    }
    if start_states.is_empty() {
        return Err(LampError::InvalidConfig("at least one start state is required".into()));
    }
    if let Some(&id) = start_states.iter().find(|&&x| x >= n) {
        return Err(LampError::InvalidState { id, n });
    }

    let mut tuples: Vec<Vec<usize>> = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &x in start_states {
        let t = vec![x; k];
        if !index.contains_key(&t) {
            index.insert(t.clone(), tuples.len());
            tuples.push(t.clone());
            queue.push_back(t);
        }
    }

    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    while let Some(tuple) = queue.pop_front() {
        let mut next = vec![0.0; n];
        for (i, &wi) in model.w().weights().iter().enumerate() {
            let lag = i + 1;
            let src = tuple[k - lag];
            let row = model.matrix_for_lag(lag).row(src);
            if row.is_empty() {
                return Err(LampError::EmptyRow { row: src });
            }
            for &(y, p) in row {
                next[y] += wi * p;
            }
        }
        let mut row = Vec::new();
        for (y, &p) in next.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let mut succ = tuple[1..].to_vec();
            succ.push(y);
            let id = match index.get(&succ) {
                Some(&id) => id,
                None => {
                    let id = tuples.len();
                    index.insert(succ.clone(), id);
                    tuples.push(succ.clone());
                    queue.push_back(succ);
                    id
                }
            };
            row.push((id, p));
        }
        row.sort_by_key(|&(id, _)| id);
        rows.push(row);
    }
    let q = SparseStochasticMatrix::from_weighted_rows(tuples.len(), rows)?;
    Ok(LiftedChain { n, tuples, index, q })
}
