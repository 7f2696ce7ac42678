use std::fmt::Write as _;

use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LampError, Result};
use crate::model::{lag_sampler, HistoryDistribution};

/// A realization `e_1, ..., e_{t_max}` of the exponent process: the power
/// of `P` governing the state distribution at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentTrace {
    pub t_max: usize,
    /// `exponents[t - 1] = e_t`.
    pub exponents: Vec<u64>,
    pub seed: u64,
}

impl ExponentTrace {
    pub fn at(&self, t: usize) -> u64 {
        self.exponents[t - 1]
    }

    pub fn last(&self) -> u64 {
        *self.exponents.last().expect("traces are nonempty")
    }

    /// `(t, e_t)` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,e_t\n");
        for (i, e) in self.exponents.iter().enumerate() {
            writeln!(out, "{},{e}", i + 1).unwrap();
        }
        out
    }

    /// Whether `floor(t / k) <= e_t <= t` at every `t`.
    pub fn within_bounds(&self, k: usize) -> bool {
        self.exponents
            .iter()
            .enumerate()
            .all(|(i, &e)| (((i + 1) / k) as u64) <= e && e <= (i + 1) as u64)
    }
}

/// Simulates `e_t = e_{t - W_t} + 1` with `W_t ~ w` i.i.d., `e_t = 0` for
/// `t <= 0` and `e_1 = 1`. One lag is drawn per `t >= 2`, in order, so a
/// longer horizon with the same seed extends the trace unchanged.
pub fn simulate_exponent_process(w: &HistoryDistribution, t_max: usize, seed: u64) -> Result<ExponentTrace> {
    if t_max == 0 {
        return Err(LampError::InvalidConfig("t_max must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lags = lag_sampler(w);
    let mut exponents: Vec<u64> = Vec::with_capacity(t_max);
    exponents.push(1);
    for t in 2..=t_max {
        let lag = lags.sample(&mut rng) + 1;
        let prev = if lag >= t { 0 } else { exponents[t - lag - 1] };
        exponents.push(prev + 1);
    }
    Ok(ExponentTrace { t_max, exponents, seed })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenewalEstimate {
    pub t: usize,
    /// `e_t / t` at the horizon.
    pub empirical_rate: f64,
    /// `1 / E[w]`.
    pub predicted_rate: f64,
    /// `(e_t - t / mu) / (sigma mu^{-3/2} sqrt(t))`; `None` when `sigma = 0`.
    pub clt_statistic: Option<f64>,
}

/// Compares a trace with the renewal-theory predictions for `w`.
pub fn renewal_rate_estimate(trace: &ExponentTrace, w: &HistoryDistribution) -> RenewalEstimate {
    let t = trace.exponents.len();
    let e = trace.last() as f64;
    let mu = w.mean();
    let sigma = w.variance().sqrt();
    let clt_statistic = (sigma > 0.0).then(|| (e - t as f64 / mu) / (sigma * mu.powf(-1.5) * (t as f64).sqrt()));
    RenewalEstimate { t, empirical_rate: e / t as f64, predicted_rate: 1.0 / mu, clt_statistic }
}
