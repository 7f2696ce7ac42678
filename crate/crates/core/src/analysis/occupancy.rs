use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::is_ergodic;
use crate::error::{LampError, Result};
use crate::model::{LampModel, LampWalker};

fn require_ergodic(model: &LampModel) -> Result<()> {
    let class = is_ergodic(model.p());
    if class.is_ergodic() {
        Ok(())
    } else {
        Err(LampError::NotErgodic(class.reason()))
    }
}

/// Occupancy frequencies of one trajectory started at state 0: the first
/// `burn_in` steps are discarded and the next `steps` states counted.
pub fn empirical_state_distribution(model: &LampModel, steps: usize, burn_in: usize, seed: u64) -> Result<Vec<f64>> {
    require_ergodic(model)?;
    if steps == 0 {
        return Err(LampError::InvalidConfig("steps must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walker = LampWalker::new(model, 0)?;
    for _ in 0..burn_in {
        walker.step(&mut rng)?;
    }
    let mut counts = vec![0u64; model.n()];
    for _ in 0..steps {
        counts[walker.step(&mut rng)?] += 1;
    }
    Ok(counts.into_iter().map(|c| c as f64 / steps as f64).collect())
}

/// Distribution of the state at time `time` over `runs` independent
/// trajectories from `start`. Run `i` uses seed `root_seed ^ i`.
pub fn state_distribution_at(
    model: &LampModel,
    start: usize,
    time: usize,
    runs: usize,
    root_seed: u64,
) -> Result<Vec<f64>> {
    require_ergodic(model)?;
    if runs == 0 {
        return Err(LampError::InvalidConfig("runs must be >= 1".into()));
    }
    LampWalker::new(model, start)?;
    let finals: Vec<usize> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(root_seed ^ i as u64);
            let mut walker = LampWalker::new(model, start)?;
            for _ in 0..time {
                walker.step(&mut rng)?;
            }
            Ok(walker.current())
        })
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; model.n()];
    for x in finals {
        counts[x] += 1;
    }
    Ok(counts.into_iter().map(|c| c as f64 / runs as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{stationary_distribution, total_variation};
    use crate::model::{HistoryDistribution, SparseStochasticMatrix};

    fn worked(w: Vec<f64>) -> LampModel {
        let p = SparseStochasticMatrix::from_dense(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        LampModel::anonymous(HistoryDistribution::new(w).unwrap(), p)
    }

    #[test]
    fn long_run_matches_stationary() {
        for w in [vec![0.5, 0.5], vec![1.0]] {
            let model = worked(w);
            let freq = empirical_state_distribution(&model, 200_000, 1_000, 1).unwrap();
            let pi = stationary_distribution(model.p(), 1e-14).unwrap();
            assert!(total_variation(&freq, &pi) < 0.01, "{freq:?}");
        }
    }

    #[test]
    fn many_runs_view_agrees() {
        let model = worked(vec![0.5, 0.5]);
        let freq = state_distribution_at(&model, 1, 200, 4000, 7).unwrap();
        assert!((freq[0] - 2.0 / 3.0).abs() < 0.03, "{freq:?}");
        assert_eq!(freq, state_distribution_at(&model, 1, 200, 4000, 7).unwrap());
    }

    #[test]
    fn periodic_is_rejected() {
        let p = SparseStochasticMatrix::cycle_with_self_loop(3, 0.0).unwrap();
        let model = LampModel::anonymous(HistoryDistribution::first_order(1), p);
        assert!(matches!(empirical_state_distribution(&model, 10, 0, 0), Err(LampError::NotErgodic(_))));
    }
}
