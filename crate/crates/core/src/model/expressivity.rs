//! Comparisons between LAMPs and higher-order Markov chains.

use super::{transition_distribution, LampModel};
use crate::error::{LampError, Result};

/// Largest `n^k` context table we are willing to enumerate.
pub const TABLE_GUARD: usize = 100_000;

/// The k-th order transition table realizing a LAMP: for every context
/// `(x_{t-k}, ..., x_{t-1})` the LAMP's next-state distribution.
pub fn kth_order_table(model: &LampModel) -> Result<Vec<(Vec<usize>, Vec<f64>)>> {
    let (n, k) = (model.n(), model.k());
    let size = (n as f64).powi(k as i32);
    if size > TABLE_GUARD as f64 {
        return Err(LampError::GuardExceeded(format!("n^k = {size} contexts")));
    }
    let mut context = vec![0usize; k];
    let mut out = Vec::with_capacity(size as usize);
    loop {
        out.push((context.clone(), transition_distribution(model, &context)?));
        // odometer over contexts, last position fastest
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            context[pos] += 1;
            if context[pos] < n {
                break;
            }
            context[pos] = 0;
        }
    }
}

/// A two-state second-order chain given by the probability of moving to
/// state `x` (id 0) from each context `(x_{t-2}, x_{t-1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderBinaryChain {
    /// from `<x, x>`
    pub alpha: f64,
    /// from `<x, y>`
    pub beta: f64,
    /// from `<y, x>`
    pub gamma: f64,
    /// from `<y, y>`
    pub delta: f64,
}

impl SecondOrderBinaryChain {
    /// Probability of moving to `x` after `(older, newer)`.
    pub fn to_x(&self, older: usize, newer: usize) -> f64 {
        match (older, newer) {
            (0, 0) => self.alpha,
            (0, 1) => self.beta,
            (1, 0) => self.gamma,
            _ => self.delta,
        }
    }
}

/// Best approximation of a binary second-order chain found by grid search
/// over `lamp_2` parameters `(w_1, P(x,x), P(y,x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lamp2GridFit {
    pub w1: f64,
    pub p_xx: f64,
    pub p_yx: f64,
    /// Minimum over the grid of the largest absolute conditional error.
    pub max_abs_error: f64,
    pub evaluated: usize,
}

/// Conditional probability of moving to `x` under `lamp_2((w1, 1-w1), P)`
/// with `P(x,x) = p_xx` and `P(y,x) = p_yx`.
pub fn lamp2_to_x(w1: f64, p_xx: f64, p_yx: f64, older: usize, newer: usize) -> f64 {
    let row = |s: usize| if s == 0 { p_xx } else { p_yx };
    w1 * row(newer) + (1.0 - w1) * row(older)
}

pub fn lamp2_grid_fit(chain: &SecondOrderBinaryChain, steps: usize) -> Lamp2GridFit {
    let mut best = Lamp2GridFit {
        w1: 0.0,
        p_xx: 0.0,
        p_yx: 0.0,
        max_abs_error: f64::INFINITY,
        evaluated: 0,
    };
    let grid = |i: usize| i as f64 / steps as f64;
    for a in 0..=steps {
        let w1 = grid(a);
        for b in 0..=steps {
            let p_xx = grid(b);
            for c in 0..=steps {
                let p_yx = grid(c);
                let mut err: f64 = 0.0;
                for (older, newer) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let e = (lamp2_to_x(w1, p_xx, p_yx, older, newer) - chain.to_x(older, newer)).abs();
                    err = err.max(e);
                }
                best.evaluated += 1;
                if err < best.max_abs_error {
                    best = Lamp2GridFit { w1, p_xx, p_yx, max_abs_error: err, evaluated: best.evaluated };
                }
            }
        }
    }
    best
}
