use lamp::analysis::{
    bernstein_constant, empirical_state_distribution, is_ergodic, mixing_time, renewal_rate_estimate,
    simulate_exponent_process, state_distribution_at, stationary_distribution, total_variation, tv_profile,
    Ergodicity,
};
use lamp::{HistoryDistribution, LampModel, SparseStochasticMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense_power_mixing_time(p: &[Vec<f64>], pi: &[f64], delta: f64) -> usize {
    let n = p.len();
    let mut pow: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for t in 0.. {
        let worst = pow
            .iter()
            .map(|row| 0.5 * row.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if worst <= delta {
            return t;
        }
        pow = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|m| pow[i][m] * p[m][j]).sum()).collect())
            .collect();
    }
    unreachable!()
}

fn random_positive(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / s).collect()
        })
        .collect()
}

#[test]
fn mixing_time_matches_dense_powers() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..30 {
        let n = rng.gen_range(2..=10);
        // lazy cycles mix slowly enough to make the count interesting
        let mut dense = random_positive(&mut rng, n);
        for (x, row) in dense.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v *= 0.3;
            }
            row[(x + 1) % n] += 0.7;
        }
        let p = SparseStochasticMatrix::from_dense(&dense).unwrap();
        let pi = stationary_distribution(&p, 1e-15).unwrap();
        for delta in [0.25, 0.05, 0.01] {
            assert_eq!(mixing_time(&p, delta).unwrap(), dense_power_mixing_time(&dense, &pi, delta));
        }
    }
}

#[test]
fn worked_example_mixes_in_twelve_steps() {
    let dense = vec![vec![0.9, 0.1], vec![0.2, 0.8]];
    let p = SparseStochasticMatrix::from_dense(&dense).unwrap();
    // worst start is state 1: TV = (2/3) 0.7^t
    assert_eq!(mixing_time(&p, 0.01).unwrap(), 12);
    assert_eq!(dense_power_mixing_time(&dense, &[2.0 / 3.0, 1.0 / 3.0], 0.01), 12);
}

#[test]
fn stationary_solves_balance_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let n = rng.gen_range(2..=8);
        let dense = random_positive(&mut rng, n);
        let p = SparseStochasticMatrix::from_dense(&dense).unwrap();
        let pi = stationary_distribution(&p, 1e-14).unwrap();
        let next = p.left_multiply(&pi);
        assert!(pi.iter().zip(&next).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn occupancy_does_not_depend_on_history_weights() {
    let p = SparseStochasticMatrix::from_dense(&[
        vec![0.1, 0.6, 0.3],
        vec![0.5, 0.2, 0.3],
        vec![0.3, 0.3, 0.4],
    ])
    .unwrap();
    let pi = stationary_distribution(&p, 1e-14).unwrap();
    for w in [vec![1.0], vec![0.2, 0.8], vec![0.1, 0.1, 0.1, 0.7]] {
        let model = LampModel::anonymous(HistoryDistribution::new(w).unwrap(), p.clone());
        let occ = empirical_state_distribution(&model, 200_000, 100, 3).unwrap();
        assert!(total_variation(&occ, &pi) < 0.01);
    }
}

#[test]
fn non_ergodic_chains_are_rejected() {
    let swap = SparseStochasticMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    assert_eq!(is_ergodic(&swap), Ergodicity::Periodic { period: 2 });
    assert!(stationary_distribution(&swap, 1e-12).is_err());
    assert!(mixing_time(&swap, 0.1).is_err());
    let split = SparseStochasticMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    assert_eq!(is_ergodic(&split), Ergodicity::Reducible);
}

#[test]
fn renewal_rate_for_truncated_heavy_tail() {
    // w_i proportional to i^-2.5 on 1..=50
    let raw: Vec<f64> = (1..=50).map(|i| (i as f64).powf(-2.5)).collect();
    let w = HistoryDistribution::normalized(&raw).unwrap();
    let trace = simulate_exponent_process(&w, 200_000, 9).unwrap();
    let est = renewal_rate_estimate(&trace, &w);
    assert!(trace.within_bounds(50));
    let z = est.clt_statistic.unwrap();
    assert!(z.abs() < 5.0, "z = {z}, rate {} vs {}", est.empirical_rate, est.predicted_rate);
}

#[test]
fn clt_statistic_is_roughly_standard_normal() {
    let w = HistoryDistribution::new(vec![0.5, 0.5]).unwrap();
    let z: Vec<f64> = (0..400)
        .map(|seed| {
            let trace = simulate_exponent_process(&w, 2000, seed).unwrap();
            renewal_rate_estimate(&trace, &w).clt_statistic.unwrap()
        })
        .collect();
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (z.len() - 1) as f64;
    assert!(mean.abs() < 0.25, "mean {mean}");
    assert!((0.75..1.3).contains(&var), "variance {var}");
}

#[test]
fn monte_carlo_distribution_is_seed_deterministic() {
    let p = SparseStochasticMatrix::from_dense(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
    let model = LampModel::anonymous(HistoryDistribution::new(vec![0.5, 0.5]).unwrap(), p);
    let a = state_distribution_at(&model, 0, 30, 500, 11).unwrap();
    let b = state_distribution_at(&model, 0, 30, 500, 11).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponent_bounds_hold_pointwise(raw in prop::collection::vec(0.01f64..1.0, 1..7), seed in any::<u64>()) {
        let w = HistoryDistribution::normalized(&raw).unwrap();
        let trace = simulate_exponent_process(&w, 3000, seed).unwrap();
        prop_assert_eq!(trace.at(1), 1);
        prop_assert!(trace.within_bounds(w.k()));
        // longer horizons extend the same trace
        let longer = simulate_exponent_process(&w, 4000, seed).unwrap();
        prop_assert_eq!(&longer.exponents[..3000], &trace.exponents[..]);
    }

    #[test]
    fn bernstein_constant_matches_closed_form(raw in prop::collection::vec(0.01f64..1.0, 1..8), eps in 0.05f64..4.0) {
        let w = HistoryDistribution::normalized(&raw).unwrap();
        let lags: Vec<f64> = (1..=w.k()).map(|i| i as f64).collect();
        let mu: f64 = lags.iter().zip(w.weights()).map(|(i, p)| i * p).sum();
        let var: f64 = lags.iter().zip(w.weights()).map(|(i, p)| p * (i - mu).powi(2)).sum();
        let want = eps * eps * mu / ((1.0 + eps) * (2.0 * var + 2.0 / 3.0 * w.k() as f64 * eps * mu));
        let got = bernstein_constant(&w, eps).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1e-300));
    }

    #[test]
    fn worst_start_distance_never_increases(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = SparseStochasticMatrix::from_dense(&random_positive(&mut rng, n)).unwrap();
        let pi = stationary_distribution(&p, 1e-15).unwrap();
        let profile = tv_profile(&p, &pi, 40);
        for pair in profile.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-12);
        }
    }
}
