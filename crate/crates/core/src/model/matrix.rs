use crate::error::{LampError, Result};

/// Row sums must be within this of 1.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Row-stochastic matrix over `n` states with sparse rows.
///
/// Rows are stored as `(column, probability)` pairs sorted by column. A row
/// may be empty (a state with no observed outgoing transition); such rows are
/// legal to store but rejected by operations that need to move out of them.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseStochasticMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseStochasticMatrix {
    /// Validates and builds a matrix. Entries with probability exactly 0 are
    /// kept in the support (the support is part of the model).
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if rows.len() != n {
            return Err(LampError::InvalidMatrix(format!(
                "{} rows for {n} states",
                rows.len()
            )));
        }
        let mut sorted = Vec::with_capacity(n);
        for (r, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            let mut sum = 0.0;
            for (idx, &(c, p)) in row.iter().enumerate() {
                if c >= n {
                    return Err(LampError::InvalidMatrix(format!(
                        "row {r}: column {c} out of range"
                    )));
                }
                if idx > 0 && row[idx - 1].0 == c {
                    return Err(LampError::InvalidMatrix(format!(
                        "row {r}: duplicate column {c}"
                    )));
                }
                if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                    return Err(LampError::InvalidMatrix(format!(
                        "row {r}: probability {p} outside [0, 1]"
                    )));
                }
                sum += p;
            }
            if !row.is_empty() && (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(LampError::InvalidMatrix(format!(
                    "row {r} sums to {sum}"
                )));
            }
            sorted.push(row);
        }
        Ok(Self { n, rows: sorted })
    }

    /// Dense constructor; zero entries are dropped from the support.
    pub fn from_dense(dense: &[Vec<f64>]) -> Result<Self> {
        let n = dense.len();
        let rows = dense
            .iter()
            .map(|row| {
                if row.len() != n {
                    return Err(LampError::InvalidMatrix("dense matrix not square".into()));
                }
                Ok(row
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p != 0.0)
                    .map(|(c, &p)| (c, p))
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(n, rows)
    }

    /// Builds a matrix from nonnegative row weights, normalizing each row.
    pub fn from_weighted_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .map(|row| {
                let total: f64 = row.iter().map(|&(_, v)| v).sum();
                if row.is_empty() || total <= 0.0 {
                    Vec::new()
                } else {
                    row.into_iter().map(|(c, v)| (c, v / total)).collect()
                }
            })
            .collect();
        Self::from_rows(n, rows)
    }

    /// Uniform matrix with every entry `1/n`.
    pub fn uniform(n: usize) -> Self {
        let p = 1.0 / n as f64;
        Self {
            n,
            rows: (0..n).map(|_| (0..n).map(|c| (c, p)).collect()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, x: usize) -> &[(usize, f64)] {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    /// Entry `P(x, y)`, zero off the support.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        let row = &self.rows[x];
        match row.binary_search_by_key(&y, |&(c, _)| c) {
            Ok(i) => row[i].1,
            Err(_) => 0.0,
        }
    }

    /// Position of `y` within row `x`'s support.
    pub fn support_index(&self, x: usize, y: usize) -> Option<usize> {
        self.rows[x].binary_search_by_key(&y, |&(c, _)| c).ok()
    }

    /// Number of stored entries, nnz(P).
    pub fn support_size(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Number of entries with strictly positive probability.
    pub fn positive_count(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.iter().filter(|&&(_, p)| p > 0.0).count())
            .sum()
    }

    pub fn empty_rows(&self) -> Vec<usize> {
        (0..self.n).filter(|&x| self.rows[x].is_empty()).collect()
    }

    /// Fails on the first empty row.
    pub fn require_full_support(&self) -> Result<()> {
        match self.rows.iter().position(Vec::is_empty) {
            Some(row) => Err(LampError::EmptyRow { row }),
            None => Ok(()),
        }
    }

    /// Replaces the values of row `x`, keeping its support columns.
    pub(crate) fn set_row_values(&mut self, x: usize, values: &[f64]) {
        let row = &mut self.rows[x];
        debug_assert_eq!(row.len(), values.len());
        for (entry, &v) in row.iter_mut().zip(values) {
            entry.1 = v;
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, p) in row {
                dense[x][y] = p;
            }
        }
        dense
    }

    /// Row vector times matrix: `v P`.
    pub fn left_multiply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (x, row) in self.rows.iter().enumerate() {
            let vx = v[x];
            if vx == 0.0 {
                continue;
            }
            for &(y, p) in row {
                out[y] += vx * p;
            }
        }
        out
    }

    /// Cycle matrix used to separate LAMP from first-order chains: state 0 has
    /// a self-loop of mass `eps` and otherwise every state moves to its
    /// successor modulo `n`.
    pub fn cycle_with_self_loop(n: usize, eps: f64) -> Result<Self> {
        if n < 2 {
            return Err(LampError::InvalidMatrix("cycle needs n >= 2".into()));
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let next = (i + 1) % n;
            if i == 0 && eps > 0.0 {
                rows.push(vec![(0, eps), (next, 1.0 - eps)]);
            } else {
                rows.push(vec![(next, 1.0)]);
            }
        }
        Self::from_rows(n, rows)
    }
}
