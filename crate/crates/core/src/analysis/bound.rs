use serde::Serialize;

use super::mixing_time;
use crate::error::{LampError, Result};
use crate::model::{HistoryDistribution, SparseStochasticMatrix};

/// Bernstein constant `C(eps)` in the tail bound
/// `Pr[e_t < t / ((1 + eps) E[w])] <= exp(-C(eps) t)`.
///
/// With `a = t / ((1 + eps) mu)` lags, the event needs
/// `sum_{i<=a} (W_i - mu) >= eps mu a`. Bernstein's inequality for centered
/// summands bounded by `k` gives exponent
/// `(eps mu a)^2 / (2 a var + (2/3) k eps mu a)`; substituting `a` yields
///
/// ```text
/// C(eps) = eps^2 mu / ((1 + eps) (2 var + (2/3) k eps mu))
/// ```
pub fn bernstein_constant(w: &HistoryDistribution, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(LampError::InvalidConfig(format!("epsilon must be > 0 (got {epsilon})")));
    }
    let mu = w.mean();
    let var = w.variance();
    let k = w.k() as f64;
    Ok(epsilon * epsilon * mu / ((1.0 + epsilon) * (2.0 * var + 2.0 / 3.0 * k * epsilon * mu)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingBound {
    /// Threshold time `T`.
    #[serde(rename = "T")]
    pub threshold: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// `t_mix(P, delta)`.
    pub chain_mixing_time: usize,
    /// `max{T, ceil((1 + eps) E[w] t_mix(P, delta))}`.
    pub bound: usize,
    /// `1 - exp(-C T) / (1 - exp(-C))`.
    pub confidence: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// For `w` concentrated on lag 1 the process is the chain itself and
    /// its mixing time is exactly `t_mix(P, delta)` with certainty.
    pub exact_reduction: Option<usize>,
}

/// High-probability bound on the mixing time of `lamp(w, P)`.
pub fn lamp_mixing_bound(
    w: &HistoryDistribution,
    p: &SparseStochasticMatrix,
    delta: f64,
    epsilon: f64,
    threshold: usize,
) -> Result<MixingBound> {
    let c = bernstein_constant(w, epsilon)?;
    let chain_mixing_time = mixing_time(p, delta)?;
    let scaled = ((1.0 + epsilon) * w.mean() * chain_mixing_time as f64).ceil() as usize;
    let bound = threshold.max(scaled);
    let degenerate = w.is_first_order();
    let confidence = if degenerate {
        1.0
    } else {
        1.0 - (-c * threshold as f64).exp() / (1.0 - (-c).exp())
    };
    if confidence <= 0.0 {
        return Err(LampError::VacuousBound { confidence, threshold });
    }
    Ok(MixingBound {
        threshold,
        epsilon,
        delta,
        chain_mixing_time,
        bound,
        confidence,
        c,
        exact_reduction: degenerate.then_some(chain_mixing_time),
    })
}
