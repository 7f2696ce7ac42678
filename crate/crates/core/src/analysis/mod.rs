//! Equilibrium and mixing behaviour of chains and LAMPs.
//!
//! The long-run distribution of `lamp(w, P)` is the stationary
//! distribution of `P` whenever `P` is ergodic, whatever `w` is; `w` only
//! changes the speed. After `t` steps the state distribution is a mixture
//! of `P^{e}` rows where the exponent `e_t` follows a renewal process with
//! increments drawn from `w`, so mixing takes about `E[w]` times as long.

mod bound;
mod equilibrium;
mod ergodic;
mod exponent;
mod occupancy;
mod report;

pub use bound::{bernstein_constant, lamp_mixing_bound, MixingBound};
pub use equilibrium::{
    mixing_time, stationary_distribution, tv_profile, MAX_POWER_ITERATIONS, MIXING_HORIZON,
    MIXING_STATE_GUARD,
};
pub use ergodic::{is_ergodic, Ergodicity};
pub use exponent::{renewal_rate_estimate, simulate_exponent_process, ExponentTrace, RenewalEstimate};
pub use occupancy::{empirical_state_distribution, state_distribution_at};
pub use report::AnalysisReport;

/// Total variation distance `(1/2) sum |a_i - b_i|`.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
