//! Water-filling trust-region solver for concave objectives on a simplex.
//!
//! Each step linearizes the gradient with a diagonal Hessian,
//! `g_i(u) = g_i - d_i u_i`, and solves the KKT system of
//!
//! ```text
//! max  sum_i g_i u_i - d_i u_i^2 / 2
//! s.t. sum_i u_i = 0,  v_i + u_i >= 0,  |u_i| <= r
//! ```
//!
//! whose solution is `u_i(lambda) = clip((g_i - lambda) / d_i, lo_i, r)` for
//! the level `lambda` at which the adjustments sum to zero. The level is
//! found by sweeping `lambda` down from `+inf` (every coordinate at its lower
//! bound) across the breakpoints where coordinates enter and leave the
//! linear regime.

use serde::Serialize;

use super::TrainConfig;
use crate::error::{LampError, Result};

/// Magnitude floor for diagonal curvature.
pub const CURVATURE_FLOOR: f64 = 1e-8;

/// Smallest trust radius worth trying.
const MIN_RADIUS: f64 = 1e-15;

/// A concave objective over the probability simplex.
pub trait SimplexObjective: Sync {
    fn dim(&self) -> usize;

    /// Objective value; `-inf` where undefined.
    fn value(&self, point: &[f64]) -> f64;

    /// Gradient and Hessian diagonal at `point`.
    fn derivatives(&self, point: &[f64]) -> Result<(Vec<f64>, Vec<f64>)>;

    /// Whether the Hessian is diagonal, i.e. the objective is a sum of
    /// one-coordinate terms. Otherwise the diagonal model can badly
    /// overstate curvature along the simplex and the solver damps it.
    fn separable(&self) -> bool {
        false
    }
}

/// Outcome of one block optimization.
#[derive(Debug, Clone, Serialize)]
pub struct BlockResult {
    pub point: Vec<f64>,
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub accepted: usize,
    /// Objective change of every accepted step.
    pub deltas: Vec<f64>,
}

/// Relative KKT residual at `point` with gradient `grad`.
///
/// With `lambda` the mean gradient over the active set (`point_i > 0`), the
/// residual is `max_active |g_i - lambda| + max_inactive (g_i - lambda)^+`,
/// divided by `max(|lambda|, 1)`.
pub fn kkt_residual(point: &[f64], grad: &[f64]) -> f64 {
    let active: Vec<f64> = point
        .iter()
        .zip(grad)
        .filter(|(&v, _)| v > 0.0)
        .map(|(_, &g)| g)
        .collect();
    if active.is_empty() {
        return f64::INFINITY;
    }
    let lambda = active.iter().sum::<f64>() / active.len() as f64;
    let on = active.iter().map(|g| (g - lambda).abs()).fold(0.0, f64::max);
    let off = point
        .iter()
        .zip(grad)
        .filter(|(&v, _)| v <= 0.0)
        .map(|(_, &g)| (g - lambda).max(0.0))
        .fold(0.0, f64::max);
    (on + off) / lambda.abs().max(1.0)
}

/// Solves the linearized KKT system for a step `u` with `sum u = 0`,
/// `point + u >= 0` and `max |u_i| <= radius`. Returns `(u, lambda)`.
///
/// `curvature` holds `d_i > 0` (negated Hessian diagonal).
pub fn water_filling_step(
    point: &[f64],
    grad: &[f64],
    curvature: &[f64],
    radius: f64,
) -> (Vec<f64>, f64) {
    let dim = point.len();
    let lo: Vec<f64> = point.iter().map(|&v| (-v).max(-radius)).collect();
    let hi = radius;

    // Breakpoints: coordinate i leaves its lower bound below
    // lambda = g_i - d_i lo_i, and reaches its upper bound below
    // lambda = g_i - d_i hi.
    #[derive(Clone, Copy)]
    enum Event {
        Enter(usize),
        Saturate(usize),
    }
    let mut events: Vec<(f64, usize, Event)> = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        events.push((grad[i] - curvature[i] * lo[i], i, Event::Enter(i)));
        events.push((grad[i] - curvature[i] * hi, i, Event::Saturate(i)));
    }
    // descending lambda; ties by coordinate, entering before saturating
    events.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(a.1.cmp(&b.1))
            .then(matches!(a.2, Event::Saturate(_)).cmp(&matches!(b.2, Event::Saturate(_))))
    });

    // S(lambda) = clipped + linear_a - lambda * linear_b
    let mut clipped: f64 = lo.iter().sum();
    let mut linear_a = 0.0;
    let mut linear_b = 0.0;
    let mut lambda = f64::INFINITY;
    let mut found = None;
    for &(level, _, event) in &events {
        // S is linear on [level, lambda]; check for the root there
        let s_at_level = clipped + linear_a - level * linear_b;
        if s_at_level >= 0.0 {
            found = Some(if linear_b > 0.0 {
                ((clipped + linear_a) / linear_b).clamp(level, lambda)
            } else {
                level
            });
            break;
        }
        lambda = level;
        match event {
            Event::Enter(i) => {
                clipped -= lo[i];
                linear_a += grad[i] / curvature[i];
                linear_b += 1.0 / curvature[i];
            }
            Event::Saturate(i) => {
                linear_a -= grad[i] / curvature[i];
                linear_b -= 1.0 / curvature[i];
                clipped += hi;
            }
        }
    }
    // past the last breakpoint every coordinate sits at +radius: S > 0
    let lambda = found.unwrap_or(lambda);
    let u = (0..dim)
        .map(|i| ((grad[i] - lambda) / curvature[i]).clamp(lo[i], hi))
        .collect();
    (u, lambda)
}

/// Applies a step, snapping clipped coordinates to exactly zero and
/// renormalizing so the point stays on the simplex.
fn apply_step(point: &[f64], step: &[f64]) -> Vec<f64> {
    let mut next: Vec<f64> = point
        .iter()
        .zip(step)
        .map(|(&v, &u)| if u <= -v { 0.0 } else { (v + u).max(0.0) })
        .collect();
    let total: f64 = next.iter().sum();
    for v in &mut next {
        *v /= total;
    }
    next
}

/// Adds `prior * sum ln v_i` to an objective.
struct WithPrior<'a> {
    inner: &'a dyn SimplexObjective,
    prior: f64,
}

impl SimplexObjective for WithPrior<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, point: &[f64]) -> f64 {
        self.inner.value(point) + self.prior * point.iter().map(|v| v.ln()).sum::<f64>()
    }

    fn derivatives(&self, point: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (mut g, mut h) = self.inner.derivatives(point)?;
        for i in 0..point.len() {
            g[i] += self.prior / point[i];
            h[i] -= self.prior / (point[i] * point[i]);
        }
        Ok((g, h))
    }

    fn separable(&self) -> bool {
        self.inner.separable()
    }
}

/// Maximizes `objective` over the simplex starting from `start`.
///
/// Steps come from [`water_filling_step`] with the diagonal-Newton model and
/// are accepted only if the true objective does not decrease; the trust
/// radius grows by `trust_expand` after an accepted step and shrinks by
/// `trust_shrink` after a rejected one. Stops at `kkt_tol` or after
/// `max_newton_iters` iterations.
///
/// For non-separable objectives the diagonal curvature is additionally
/// scaled by a factor that shrinks after every accepted step that stayed
/// inside the trust region and is reset on rejection. Correlated
/// coordinates (nearly collinear lag columns for `w`) otherwise give
/// Newton steps orders of magnitude too short.
pub fn optimize_simplex_block(
    objective: &dyn SimplexObjective,
    start: &[f64],
    cfg: &TrainConfig,
) -> Result<BlockResult> {
    let dim = objective.dim();
    if start.len() != dim {
        return Err(LampError::InvalidConfig(format!(
            "start point has {} coordinates, objective {dim}",
            start.len()
        )));
    }
    let wrapped;
    let objective: &dyn SimplexObjective = if cfg.prior_count > 0.0 {
        wrapped = WithPrior { inner: objective, prior: cfg.prior_count };
        &wrapped
    } else {
        objective
    };

    let mut point = start.to_vec();
    let mut value = objective.value(&point);
    if dim == 1 {
        return Ok(BlockResult {
            point: vec![1.0],
            objective: value,
            kkt_residual: 0.0,
            iterations: 0,
            accepted: 0,
            deltas: Vec::new(),
        });
    }
    if !value.is_finite() {
        return Err(LampError::NonFinite(format!("objective at start point is {value}")));
    }

    let mut radius = cfg.trust_init;
    let mut scale = 1.0_f64;
    let mut derivs = objective.derivatives(&point)?;
    let mut iterations = 0;
    let mut deltas = Vec::new();
    let mut residual = kkt_residual(&point, &derivs.0);
    while iterations < cfg.max_newton_iters && residual > cfg.kkt_tol && radius >= MIN_RADIUS {
        iterations += 1;
        let (grad, hess) = &derivs;
        if grad.iter().chain(hess).any(|v| !v.is_finite()) {
            return Err(LampError::NonFinite("gradient or curvature".into()));
        }
        let curvature: Vec<f64> = hess.iter().map(|h| (-h * scale).max(CURVATURE_FLOOR)).collect();
        let (step, _) = water_filling_step(&point, grad, &curvature, radius);
        let interior = step.iter().all(|u| u.abs() < radius);
        let candidate = apply_step(&point, &step);
        let candidate_value = objective.value(&candidate);
        if candidate_value.is_nan() {
            return Err(LampError::NonFinite("objective evaluation".into()));
        }
        if candidate_value >= value && candidate != point {
            deltas.push(candidate_value - value);
            point = candidate;
            value = candidate_value;
            radius = (radius * cfg.trust_expand).min(1.0);
            if interior && !objective.separable() {
                scale *= cfg.trust_shrink;
            }
            derivs = objective.derivatives(&point)?;
            residual = kkt_residual(&point, &derivs.0);
        } else {
            radius *= cfg.trust_shrink;
            scale = 1.0;
        }
    }
    Ok(BlockResult {
        point,
        objective: value,
        kkt_residual: residual,
        iterations,
        accepted: deltas.len(),
        deltas,
    })
}
