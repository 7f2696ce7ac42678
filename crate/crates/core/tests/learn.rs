use lamp::learn::{
    alternate_minimize, grad_p, grad_w, initial_model, optimize_row, optimize_weights, Block, TrainConfig,
};
use lamp::model::generate;
use lamp::{log_likelihood, Corpus, HistoryDistribution, LampModel, SparseStochasticMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Straight transcription of the LAMP log-likelihood on dense parameters.
/// `w` and `p` are used as given (no normalization), so finite differences
/// give the unconstrained partial derivatives.
fn dense_ll(w: &[f64], p: &[Vec<f64>], seqs: &[Vec<usize>]) -> f64 {
    let mut total = 0.0;
    for seq in seqs {
        for t in 1..seq.len() {
            let mut prob = 0.0;
            for (i, wi) in w.iter().enumerate() {
                let lag = i + 1;
                let src = if t >= lag { seq[t - lag] } else { seq[0] };
                prob += wi * p[src][seq[t]];
            }
            total += prob.ln();
        }
    }
    total
}

fn random_simplex(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

fn random_instance(rng: &mut ChaCha8Rng) -> (LampModel, Corpus, Vec<Vec<f64>>) {
    let n = rng.gen_range(2..=5);
    let k = rng.gen_range(1..=4);
    let dense: Vec<Vec<f64>> = (0..n).map(|_| random_simplex(rng, n)).collect();
    let w = HistoryDistribution::new(random_simplex(rng, k)).unwrap();
    let p = SparseStochasticMatrix::from_dense(&dense).unwrap();
    let seqs: Vec<Vec<usize>> = (0..rng.gen_range(1..=4))
        .map(|_| (0..rng.gen_range(2..=50)).map(|_| rng.gen_range(0..n)).collect())
        .collect();
    (LampModel::anonymous(w, p), Corpus::from_ids(n, seqs).unwrap(), dense)
}

fn assert_relative(analytic: f64, numeric: f64, what: &str) {
    let scale = analytic.abs().max(numeric.abs());
    let err = (analytic - numeric).abs();
    assert!(
        err <= 1e-5 * scale || err <= 1e-9,
        "{what}: analytic {analytic} vs finite difference {numeric}"
    );
}

#[test]
fn gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-6;
    for _ in 0..100 {
        let (model, corpus, dense) = random_instance(&mut rng);
        let w = model.w().weights().to_vec();
        let seqs = corpus.sequences();

        let gw = grad_w(&model, &corpus).unwrap();
        for i in 0..w.len() {
            let (mut up, mut down) = (w.clone(), w.clone());
            up[i] += h;
            down[i] -= h;
            let fd = (dense_ll(&up, &dense, seqs) - dense_ll(&down, &dense, seqs)) / (2.0 * h);
            assert_relative(gw[i], fd, "w");
        }

        let gp = grad_p(&model, &corpus).unwrap();
        for (x, row) in model.p().rows().iter().enumerate() {
            for (m, &(y, _)) in row.iter().enumerate() {
                let (mut up, mut down) = (dense.clone(), dense.clone());
                up[x][y] += h;
                down[x][y] -= h;
                let fd = (dense_ll(&w, &up, seqs) - dense_ll(&w, &down, seqs)) / (2.0 * h);
                assert_relative(gp[x][m], fd, "P");
            }
        }
    }
}

#[test]
fn core_likelihood_matches_dense_transcription() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let (model, corpus, dense) = random_instance(&mut rng);
        let ll = log_likelihood(&model, &corpus).unwrap().total;
        let want = dense_ll(model.w().weights(), &dense, corpus.sequences());
        assert!((ll - want).abs() <= 1e-10 * want.abs().max(1.0));
    }
}

fn is_concave(values: &[f64]) -> bool {
    values.windows(3).all(|v| v[1] >= (v[0] + v[2]) / 2.0 - 1e-9)
}

#[test]
fn likelihood_is_concave_along_block_segments() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..30 {
        let (model, corpus, dense) = random_instance(&mut rng);
        let seqs = corpus.sequences();
        let k = model.k();
        let (a, b) = (random_simplex(&mut rng, k), random_simplex(&mut rng, k));
        let along_w: Vec<f64> = (0..=10)
            .map(|s| {
                let t = s as f64 / 10.0;
                let w: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (1.0 - t) * x + t * y).collect();
                dense_ll(&w, &dense, seqs)
            })
            .collect();
        assert!(is_concave(&along_w), "{along_w:?}");

        let n = model.n();
        let x = rng.gen_range(0..n);
        let (ra, rb) = (random_simplex(&mut rng, n), random_simplex(&mut rng, n));
        let along_row: Vec<f64> = (0..=10)
            .map(|s| {
                let t = s as f64 / 10.0;
                let mut p = dense.clone();
                p[x] = ra.iter().zip(&rb).map(|(u, v)| (1.0 - t) * u + t * v).collect();
                dense_ll(model.w().weights(), &p, seqs)
            })
            .collect();
        assert!(is_concave(&along_row), "{along_row:?}");
    }
}

fn toy_two_state() -> (LampModel, Corpus) {
    let corpus = Corpus::from_ids(2, vec![vec![0, 0, 1, 0, 1, 1, 1, 0, 0, 1], vec![1, 0, 0, 0, 1]]).unwrap();
    let (model, _) = initial_model(&corpus, &TrainConfig::with_k(2)).unwrap();
    (model, corpus)
}

#[test]
fn weight_block_matches_grid_search() {
    let (model, corpus) = toy_two_state();
    let dense = model.p().to_dense();
    let seqs = corpus.sequences();
    let grid_best = (0..=1000)
        .map(|s| {
            let w1 = s as f64 / 1000.0;
            dense_ll(&[w1, 1.0 - w1], &dense, seqs)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let (fitted, _) = optimize_weights(&model, &corpus, &TrainConfig::with_k(2)).unwrap();
    let ll = log_likelihood(&fitted, &corpus).unwrap().total;
    assert!(ll >= grid_best - 1e-6, "{ll} < {grid_best}");
    assert!(ll <= grid_best + 1e-3);
}

#[test]
fn row_block_matches_grid_search() {
    let (model, corpus) = toy_two_state();
    let seqs = corpus.sequences();
    let w = model.w().weights();
    for x in 0..2 {
        let grid_best = (0..=1000)
            .map(|s| {
                let mut p = model.p().to_dense();
                p[x] = vec![s as f64 / 1000.0, 1.0 - s as f64 / 1000.0];
                dense_ll(w, &p, seqs)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let (row, _) = optimize_row(&model, &corpus, x, &TrainConfig::with_k(2)).unwrap();
        let mut p = model.p().to_dense();
        for (y, v) in row {
            p[x][y] = v;
        }
        let ll = dense_ll(w, &p, seqs);
        assert!(ll >= grid_best - 1e-6, "row {x}: {ll} < {grid_best}");
    }
}

#[test]
fn first_order_data_concentrates_weight_on_lag_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let dense: Vec<Vec<f64>> = (0..4).map(|_| random_simplex(&mut rng, 4)).collect();
    let truth = LampModel::anonymous(
        HistoryDistribution::first_order(1),
        SparseStochasticMatrix::from_dense(&dense).unwrap(),
    );
    let seq = generate(&truth, 0, 100_001, 5).unwrap();
    let corpus = Corpus::from_ids(4, vec![seq]).unwrap();
    let (model, report) = alternate_minimize(&corpus, &TrainConfig::with_k(3)).unwrap();
    assert!(model.w().weight(1) >= 0.95, "{:?}", model.w().weights());
    assert_eq!(report.records.len(), 4);
    assert_eq!(report.records[1].block, Block::W);
    assert_eq!(report.records[2].block, Block::P);
}

#[test]
fn cycle_lamp_parameters_are_recovered() {
    let p = SparseStochasticMatrix::cycle_with_self_loop(6, 0.1).unwrap();
    let truth = LampModel::anonymous(HistoryDistribution::new(vec![0.5, 0.5]).unwrap(), p.clone());
    let seq = generate(&truth, 0, 100_001, 77).unwrap();
    let corpus = Corpus::from_ids(6, vec![seq]).unwrap();
    // 1.5 rounds stop midway (w1 ~ 0.74); the likelihood plateaus after ~5
    let cfg = TrainConfig { k: 2, rounds: 5.0, ..Default::default() };
    let (model, report) = alternate_minimize(&corpus, &cfg).unwrap();
    let w1 = model.w().weight(1);
    assert!((0.45..=0.55).contains(&w1), "w1 = {w1}");
    let (learned, want) = (model.p().to_dense(), p.to_dense());
    for x in 0..6 {
        for y in 0..6 {
            assert!((learned[x][y] - want[x][y]).abs() <= 0.02, "P({x},{y}) = {}", learned[x][y]);
        }
    }
    for pair in report.records.windows(2) {
        assert!(pair[1].log_likelihood >= pair[0].log_likelihood - 1e-12);
    }
}

#[test]
fn report_lines_parse_back() {
    let (_, corpus) = toy_two_state();
    let (_, report) = alternate_minimize(&corpus, &TrainConfig::with_k(2)).unwrap();
    let lines = report.to_json_lines().unwrap();
    let parsed: Vec<lamp::learn::HalfIterationRecord> =
        lines.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(parsed, report.records);
}

#[test]
fn training_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (truth, _, _) = random_instance(&mut rng);
    let seqs = (0..8).map(|s| generate(&truth, 0, 200, s).unwrap()).collect();
    let corpus = Corpus::from_ids(truth.n(), seqs).unwrap();
    let cfg = TrainConfig { k: 3, rounds: 2.0, ..Default::default() };
    let (a, ra) = alternate_minimize(&corpus, &cfg).unwrap();
    let (b, rb) = alternate_minimize(&corpus, &cfg).unwrap();
    assert_eq!(a.to_json_string().unwrap(), b.to_json_string().unwrap());
    assert_eq!(ra.records, rb.records);
}
