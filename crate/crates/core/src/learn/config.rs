use serde::{Deserialize, Serialize};

use crate::error::{LampError, Result};

/// Training configuration. Serialized as JSON; missing fields take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Lag support of `w`.
    pub k: usize,
    /// Half-iterations / 2. `1.5` runs w, P, w.
    pub rounds: f64,
    /// Relative KKT residual at which a block stops.
    pub kkt_tol: f64,
    /// Initial trust radius (max-norm bound on a step).
    pub trust_init: f64,
    pub trust_expand: f64,
    pub trust_shrink: f64,
    /// Iteration cap per block (accepted and rejected steps both count).
    pub max_newton_iters: usize,
    /// Initial weights `w_i` proportional to `init_decay^i`.
    pub init_decay: f64,
    /// Initial mass for support entries seen only at lags > 1.
    pub support_epsilon: f64,
    /// Keep `P` frozen at the empirical matrix.
    pub weight_only: bool,
    /// Additive Dirichlet-style pseudo-count on every block coordinate.
    pub prior_count: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            k: 1,
            rounds: 1.5,
            kkt_tol: 1e-6,
            trust_init: 0.1,
            trust_expand: 2.0,
            trust_shrink: 0.5,
            max_newton_iters: 100,
            init_decay: 0.8,
            support_epsilon: 1e-3,
            weight_only: false,
            prior_count: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn with_k(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LampError::InvalidConfig(msg));
        if self.k == 0 {
            return bad("k must be >= 1".into());
        }
        let halves = self.rounds * 2.0;
        if !(self.rounds >= 0.5 && halves.fract() == 0.0 && halves.is_finite()) {
            return bad(format!("rounds must be a positive multiple of 0.5 (got {})", self.rounds));
        }
        if !(self.kkt_tol > 0.0) || !(self.trust_init > 0.0) || !(self.support_epsilon > 0.0) {
            return bad("tolerances, trust_init and support_epsilon must be > 0".into());
        }
        if !(self.trust_shrink > 0.0 && self.trust_shrink < 1.0 && self.trust_expand > 1.0) {
            return bad("need 0 < trust_shrink < 1 < trust_expand".into());
        }
        if !(self.init_decay > 0.0 && self.init_decay.is_finite()) {
            return bad("init_decay must be > 0".into());
        }
        if !(self.prior_count >= 0.0 && self.prior_count.is_finite()) {
            return bad("prior_count must be >= 0".into());
        }
        if self.max_newton_iters == 0 {
            return bad("max_newton_iters must be >= 1".into());
        }
        Ok(())
    }

    /// Number of half-iterations, `2 * rounds`.
    pub fn half_iterations(&self) -> usize {
        (self.rounds * 2.0).round() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        TrainConfig::default().validate().unwrap();
        assert_eq!(TrainConfig::default().half_iterations(), 3);
    }

    #[test]
    fn rejects_bad_values() {
        for cfg in [
            TrainConfig { k: 0, ..Default::default() },
            TrainConfig { rounds: 0.0, ..Default::default() },
            TrainConfig { rounds: 1.25, ..Default::default() },
            TrainConfig { trust_shrink: 1.0, ..Default::default() },
            TrainConfig { trust_expand: 0.9, ..Default::default() },
            TrainConfig { kkt_tol: 0.0, ..Default::default() },
        ] {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn json_fills_defaults() {
        let cfg: TrainConfig = serde_json::from_str(r#"{"k": 4, "weight_only": true}"#).unwrap();
        assert_eq!(cfg.k, 4);
        assert!(cfg.weight_only);
        assert_eq!(cfg.rounds, 1.5);
    }
}
