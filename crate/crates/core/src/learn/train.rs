use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gradient::{ordered_vector_sum, Positions, CHUNK};
use super::simplex::{optimize_simplex_block, BlockResult, SimplexObjective};
use super::{empirical_transition_matrix, TrainConfig};
use crate::error::{LampError, Result};
use crate::model::{log_likelihood, Corpus, HistoryDistribution, LampModel, SparseStochasticMatrix};

/// `L(w) = sum_j ln(A_j . w)` with `A_ji = P(src_ji, y_j)` and `P` fixed.
pub(crate) struct WeightObjective {
    k: usize,
    coefficients: Vec<f64>,
}

impl WeightObjective {
    pub(crate) fn new(model: &LampModel, pos: &Positions) -> Self {
        let k = pos.k;
        let coefficients = (0..pos.len())
            .into_par_iter()
            .with_min_len(CHUNK)
            .flat_map_iter(|j| {
                let y = pos.targets[j];
                pos.sources(j).iter().map(move |&src| model.p().get(src, y))
            })
            .collect();
        Self { k, coefficients }
    }

    fn rows(&self) -> usize {
        self.coefficients.len() / self.k
    }

    #[inline]
    fn dot(&self, j: usize, w: &[f64]) -> f64 {
        self.coefficients[j * self.k..(j + 1) * self.k].iter().zip(w).map(|(a, b)| a * b).sum()
    }
}

impl SimplexObjective for WeightObjective {
    fn dim(&self) -> usize {
        self.k
    }

    fn value(&self, w: &[f64]) -> f64 {
        ordered_vector_sum(self.rows(), 1, |j, acc| acc[0] += self.dot(j, w).ln())[0]
    }

    fn derivatives(&self, w: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let k = self.k;
        let both = ordered_vector_sum(self.rows(), 2 * k, |j, acc| {
            let den = self.dot(j, w);
            for i in 0..k {
                let r = self.coefficients[j * k + i] / den;
                acc[i] += r;
                acc[k + i] -= r * r;
            }
        });
        Ok((both[..k].to_vec(), both[k..].to_vec()))
    }
}

/// Objective of a single row `P(x, .)` with `w` and the other rows fixed:
/// `sum_j ln(c_j + a_j v_{m_j})` over positions with `x` among their sources,
/// where `a_j` is the weight on lags pointing at `x` and `c_j` the
/// contribution of every other lag.
pub(crate) struct RowObjective {
    dim: usize,
    /// `(support index of the target, a_j, c_j)`
    terms: Vec<(usize, f64, f64)>,
}

impl RowObjective {
    fn new(model: &LampModel, pos: &Positions, touching: &[usize], x: usize) -> Self {
        let w = model.w().weights();
        let p = model.p();
        let terms = touching
            .iter()
            .filter_map(|&j| {
                let y = pos.targets[j];
                let m = p.support_index(x, y)?;
                let mut a = 0.0;
                let mut c = 0.0;
                for (&src, &wi) in pos.sources(j).iter().zip(w) {
                    if src == x {
                        a += wi;
                    } else {
                        c += wi * p.get(src, y);
                    }
                }
                (a > 0.0).then_some((m, a, c))
            })
            .collect();
        Self { dim: p.row(x).len(), terms }
    }
}

impl SimplexObjective for RowObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, v: &[f64]) -> f64 {
        self.terms.iter().map(|&(m, a, c)| (c + a * v[m]).ln()).sum()
    }

    fn derivatives(&self, v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut g = vec![0.0; self.dim];
        let mut h = vec![0.0; self.dim];
        for &(m, a, c) in &self.terms {
            let r = a / (c + a * v[m]);
            g[m] += r;
            h[m] -= r * r;
        }
        Ok((g, h))
    }

    fn separable(&self) -> bool {
        true
    }
}

/// For each state, the positions that use it as a source at some lag.
pub(crate) fn touching_positions(pos: &Positions, n: usize) -> Vec<Vec<usize>> {
    let mut touching = vec![Vec::new(); n];
    for j in 0..pos.len() {
        let srcs = pos.sources(j);
        for (i, &x) in srcs.iter().enumerate() {
            if !srcs[..i].contains(&x) {
                touching[x].push(j);
            }
        }
    }
    touching
}

fn check_inputs(model: &LampModel, corpus: &Corpus) -> Result<()> {
    if model.vocab() != corpus.vocab() {
        return Err(LampError::VocabMismatch("model and corpus vocabularies differ".into()));
    }
    Ok(())
}

/// Optimizes `w` with `P` fixed.
pub fn optimize_weights(model: &LampModel, corpus: &Corpus, cfg: &TrainConfig) -> Result<(LampModel, BlockResult)> {
    check_inputs(model, corpus)?;
    let pos = Positions::new(corpus, model.k());
    optimize_weights_at(model, &pos, cfg)
}

fn optimize_weights_at(model: &LampModel, pos: &Positions, cfg: &TrainConfig) -> Result<(LampModel, BlockResult)> {
    let objective = WeightObjective::new(model, pos);
    let result = optimize_simplex_block(&objective, model.w().weights(), cfg)?;
    let w = HistoryDistribution::new(result.point.clone())?;
    Ok((model.with_w(w), result))
}

/// Optimizes row `x` of `P` with `w` and the other rows fixed. Returns the
/// updated row (same support) and the block outcome.
pub fn optimize_row(
    model: &LampModel,
    corpus: &Corpus,
    x: usize,
    cfg: &TrainConfig,
) -> Result<(Vec<(usize, f64)>, BlockResult)> {
    check_inputs(model, corpus)?;
    if x >= model.n() {
        return Err(LampError::InvalidState { id: x, n: model.n() });
    }
    let pos = Positions::new(corpus, model.k());
    let touching: Vec<usize> = (0..pos.len()).filter(|&j| pos.sources(j).contains(&x)).collect();
    let (values, result) = optimize_row_at(model, &pos, &touching, x, cfg)?;
    let row = model.p().row(x).iter().zip(values).map(|(&(c, _), v)| (c, v)).collect();
    Ok((row, result))
}

fn optimize_row_at(
    model: &LampModel,
    pos: &Positions,
    touching: &[usize],
    x: usize,
    cfg: &TrainConfig,
) -> Result<(Vec<f64>, BlockResult)> {
    let row = model.p().row(x);
    if row.is_empty() {
        return Err(LampError::EmptyRow { row: x });
    }
    let objective = RowObjective::new(model, pos, touching, x);
    let start: Vec<f64> = row.iter().map(|&(_, v)| v).collect();
    let result = optimize_simplex_block(&objective, &start, cfg)?;
    Ok((result.point.clone(), result))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Init,
    W,
    P,
}

/// One line of the training trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfIterationRecord {
    /// 0 for the initial model, then 0.5, 1.0, 1.5, ...
    pub half_iteration: f64,
    pub block: Block,
    pub log_likelihood: f64,
    pub perplexity: f64,
    /// Largest KKT residual over the blocks optimized in this half-iteration.
    pub kkt_residual: f64,
    /// Positive coordinates: entries of `w` for a w-block, of `P` otherwise.
    pub active_set_size: usize,
    pub newton_iterations: usize,
    pub accepted_steps: usize,
    /// Smallest objective change among accepted steps (0 when none).
    pub min_accepted_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub records: Vec<HalfIterationRecord>,
    /// Wall time per record in milliseconds. Kept apart from the records so
    /// those stay reproducible byte for byte.
    pub wall_time_ms: Vec<f64>,
    pub empty_rows: Vec<usize>,
}

impl TrainReport {
    /// Records as JSON lines.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn final_log_likelihood(&self) -> f64 {
        self.records.last().map_or(f64::NEG_INFINITY, |r| r.log_likelihood)
    }
}

fn summarize(
    half_iteration: f64,
    block: Block,
    model: &LampModel,
    corpus: &Corpus,
    results: &[BlockResult],
) -> Result<HalfIterationRecord> {
    let ll = log_likelihood(model, corpus)?;
    let active_set_size = match block {
        Block::W => model.w().weights().iter().filter(|&&v| v > 0.0).count(),
        _ => model.p().positive_count(),
    };
    let deltas = results.iter().flat_map(|r| r.deltas.iter().copied());
    Ok(HalfIterationRecord {
        half_iteration,
        block,
        log_likelihood: ll.total,
        perplexity: (-ll.total / ll.scored.max(1) as f64).exp(),
        kkt_residual: results.iter().map(|r| r.kkt_residual).fold(0.0, f64::max),
        active_set_size,
        newton_iterations: results.iter().map(|r| r.iterations).sum(),
        accepted_steps: results.iter().map(|r| r.accepted).sum(),
        min_accepted_delta: deltas.fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.min(d)))).unwrap_or(0.0),
    })
}

/// Initial model: empirical matrix with widened support and geometric `w`.
pub fn initial_model(corpus: &Corpus, cfg: &TrainConfig) -> Result<(LampModel, Vec<usize>)> {
    cfg.validate()?;
    let empirical = empirical_transition_matrix(corpus, cfg.k, cfg.support_epsilon)?;
    let w = HistoryDistribution::geometric(cfg.k, cfg.init_decay)?;
    let model = LampModel::new(w, empirical.matrix, corpus.vocab().clone())?;
    Ok((model, empirical.empty_rows))
}

/// Maximum-likelihood training by alternating between the `w` block and a
/// sweep over the rows of `P` (block coordinate ascent, rows in ascending
/// state order). Half-iterations alternate starting with `w`.
pub fn alternate_minimize(corpus: &Corpus, cfg: &TrainConfig) -> Result<(LampModel, TrainReport)> {
    let (mut model, empty_rows) = initial_model(corpus, cfg)?;
    let pos = Positions::new(corpus, cfg.k);
    let touching = touching_positions(&pos, model.n());

    let start = Instant::now();
    let mut records = vec![summarize(0.0, Block::Init, &model, corpus, &[])?];
    let mut wall_time_ms = vec![start.elapsed().as_secs_f64() * 1e3];

    for half in 1..=cfg.half_iterations() {
        let is_w = half % 2 == 1;
        if !is_w && cfg.weight_only {
            continue;
        }
        let started = Instant::now();
        let (block, results) = if is_w {
            let (next, result) = optimize_weights_at(&model, &pos, cfg)?;
            model = next;
            (Block::W, vec![result])
        } else {
            let mut results = Vec::new();
            for x in 0..model.n() {
                if model.p().row(x).is_empty() || touching[x].is_empty() {
                    continue;
                }
                let (values, result) = optimize_row_at(&model, &pos, &touching[x], x, cfg)?;
                let (w, mut p, vocab) = model.into_parts();
                p.set_row_values(x, &values);
                model = LampModel::new(w, p, vocab)?;
                results.push(result);
            }
            (Block::P, results)
        };
        records.push(summarize(half as f64 / 2.0, block, &model, corpus, &results)?);
        wall_time_ms.push(started.elapsed().as_secs_f64() * 1e3);
    }

    // guard against accumulated drift in row sums
    let p = SparseStochasticMatrix::from_rows(model.n(), model.p().rows().to_vec())?;
    let model = model.with_p(p)?;
    Ok((model, TrainReport { records, wall_time_ms, empty_rows }))
}

/// Denominators for an arbitrary model, exposed for tests of the row
/// decomposition.
#[cfg(test)]
pub(crate) fn position_denominators(model: &LampModel, corpus: &Corpus) -> Vec<f64> {
    super::gradient::denominators(model, &Positions::new(corpus, model.k()))
}
