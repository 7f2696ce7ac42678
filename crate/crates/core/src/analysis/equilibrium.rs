use super::{is_ergodic, total_variation};
use crate::error::{LampError, Result};
use crate::model::SparseStochasticMatrix;

/// Power-iteration cap for [`stationary_distribution`].
pub const MAX_POWER_ITERATIONS: usize = 1_000_000;
/// Largest chain [`mixing_time`] will power densely.
pub const MIXING_STATE_GUARD: usize = 2000;
/// Longest horizon [`mixing_time`] will scan.
pub const MIXING_HORIZON: usize = 1_000_000;

fn require_ergodic(p: &SparseStochasticMatrix) -> Result<()> {
    let class = is_ergodic(p);
    if class.is_ergodic() {
        Ok(())
    } else {
        Err(LampError::NotErgodic(class.reason()))
    }
}

/// Stationary distribution of an ergodic chain by power iteration from the
/// uniform vector, stopping once `||pi P - pi||_1 <= tol`.
pub fn stationary_distribution(p: &SparseStochasticMatrix, tol: f64) -> Result<Vec<f64>> {
    require_ergodic(p)?;
    if !(tol > 0.0) {
        return Err(LampError::InvalidConfig(format!("tolerance must be > 0 (got {tol})")));
    }
    let n = p.n();
    let mut pi = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_POWER_ITERATIONS {
        let mut next = p.left_multiply(&pi);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if residual <= tol {
            return Ok(pi);
        }
    }
    Err(LampError::NotConverged { iterations: MAX_POWER_ITERATIONS, residual })
}

/// Worst-start total variation `max_z TV(1_z P^t, pi)` for `t = 0..=t_max`.
pub fn tv_profile(p: &SparseStochasticMatrix, pi: &[f64], t_max: usize) -> Vec<f64> {
    let n = p.n();
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|z| {
            let mut e = vec![0.0; n];
            e[z] = 1.0;
            e
        })
        .collect();
    let mut out = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        if t > 0 {
            rows = rows.iter().map(|r| p.left_multiply(r)).collect();
        }
        out.push(rows.iter().map(|r| total_variation(r, pi)).fold(0.0, f64::max));
    }
    out
}

/// Smallest `t` with `max_z TV(1_z P^t, pi) <= delta`.
///
/// Computed by dense powering from every start state. The worst-start
/// distance is non-increasing in `t`, so the first crossing holds for all
/// later times as well.
pub fn mixing_time(p: &SparseStochasticMatrix, delta: f64) -> Result<usize> {
    require_ergodic(p)?;
    if !(delta > 0.0) {
        return Err(LampError::InvalidConfig(format!("delta must be > 0 (got {delta})")));
    }
    if delta >= 1.0 {
        return Ok(0);
    }
    let n = p.n();
    if n > MIXING_STATE_GUARD {
        return Err(LampError::GuardExceeded(format!(
            "mixing time needs dense powers; {n} states exceed {MIXING_STATE_GUARD}"
        )));
    }
    let pi = stationary_distribution(p, 1e-14)?;
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|z| {
            let mut e = vec![0.0; n];
            e[z] = 1.0;
            e
        })
        .collect();
    let mut worst = 1.0;
    for t in 0..=MIXING_HORIZON {
        if t > 0 {
            rows = rows.iter().map(|r| p.left_multiply(r)).collect();
        }
        worst = rows.iter().map(|r| total_variation(r, &pi)).fold(0.0, f64::max);
        if worst <= delta {
            return Ok(t);
        }
    }
    Err(LampError::NotConverged { iterations: MIXING_HORIZON, residual: worst })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> SparseStochasticMatrix {
        SparseStochasticMatrix::from_dense(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap()
    }

    #[test]
    fn two_state_balance() {
        let pi = stationary_distribution(&worked(), 1e-14).unwrap();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((pi[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn doubly_stochastic_gives_uniform() {
        let p = SparseStochasticMatrix::from_dense(&[
            vec![0.2, 0.5, 0.3],
            vec![0.3, 0.2, 0.5],
            vec![0.5, 0.3, 0.2],
        ])
        .unwrap();
        for v in stationary_distribution(&p, 1e-14).unwrap() {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn permutation_is_rejected() {
        let p = SparseStochasticMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(stationary_distribution(&p, 1e-12), Err(LampError::NotErgodic(_))));
        assert!(matches!(mixing_time(&p, 0.1), Err(LampError::NotErgodic(_))));
    }

    #[test]
    fn worked_mixing_time() {
        // TV from state 0 is (1/3) 0.7^t, from state 1 it is (2/3) 0.7^t;
        // the worst start crosses 0.01 at t = 12.
        assert_eq!(mixing_time(&worked(), 0.01).unwrap(), 12);
        let pi = [2.0 / 3.0, 1.0 / 3.0];
        let profile = tv_profile(&worked(), &pi, 15);
        for (t, d) in profile.iter().enumerate() {
            assert!((d - 2.0 / 3.0 * 0.7f64.powi(t as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_mixing_times() {
        assert_eq!(mixing_time(&SparseStochasticMatrix::uniform(4), 0.01).unwrap(), 1);
        assert_eq!(mixing_time(&worked(), 1.0).unwrap(), 0);
        assert_eq!(mixing_time(&worked(), 5.0).unwrap(), 0);
    }
}
