use crate::error::{LampError, Result};

/// Weights must sum to 1 within this.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Distribution `w` over lags `1..=k`; `weights()[i]` is the weight of lag `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryDistribution {
    weights: Vec<f64>,
    mean: f64,
    variance: f64,
}

impl HistoryDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(LampError::InvalidWeights("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(LampError::InvalidWeights(format!("weight {w} is not >= 0")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(LampError::InvalidWeights(format!("weights sum to {sum}")));
        }
        let (mean, variance) = moments(&weights);
        Ok(Self { weights, mean, variance })
    }

    /// Normalizes nonnegative raw weights.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        let sum: f64 = raw.iter().sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(LampError::InvalidWeights(format!("raw weights sum to {sum}")));
        }
        Self::new(raw.iter().map(|w| w / sum).collect())
    }

    /// All mass on lag 1; the process is then a first-order chain.
    pub fn first_order(k: usize) -> Self {
        let mut weights = vec![0.0; k.max(1)];
        weights[0] = 1.0;
        Self::new(weights).expect("point mass is a distribution")
    }

    /// `w_i` proportional to `base^i`, `i = 1..=k`.
    pub fn geometric(k: usize, base: f64) -> Result<Self> {
        if k == 0 || !(base > 0.0 && base.is_finite()) {
            return Err(LampError::InvalidWeights(format!(
                "geometric initializer needs k >= 1 and base > 0 (got k={k}, base={base})"
            )));
        }
        let raw: Vec<f64> = (1..=k).map(|i| base.powi(i as i32)).collect();
        Self::normalized(&raw)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of lag `lag` (1-based).
    pub fn weight(&self, lag: usize) -> f64 {
        self.weights[lag - 1]
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    /// `E[w] = sum_i i w_i`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `Var[w] = sum_i i^2 w_i - E[w]^2`.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn is_first_order(&self) -> bool {
        self.weights[0] == 1.0
    }
}

fn moments(weights: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut second = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        let lag = (i + 1) as f64;
        mean += lag * w;
        second += lag * lag * w;
    }
    (mean, (second - mean * mean).max(0.0))
}
