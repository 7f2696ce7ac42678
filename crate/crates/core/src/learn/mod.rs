//! Maximum-likelihood estimation of `w` and `P`.
//!
//! The log-likelihood is concave in `w` for fixed `P` and in each row of `P`
//! for fixed `w` and other rows, so training alternates exact block solves:
//! one over `w`, then a sweep over the rows of `P`. Each block is maximized
//! over its simplex by [`optimize_simplex_block`].

mod config;
mod empirical;
mod gradient;
mod simplex;
mod train;

pub use config::TrainConfig;
pub use empirical::{empirical_transition_matrix, EmpiricalMatrix};
pub use gradient::{grad_p, grad_w};
pub use simplex::{
    kkt_residual, optimize_simplex_block, water_filling_step, BlockResult, SimplexObjective,
    CURVATURE_FLOOR,
};
pub use train::{
    alternate_minimize, initial_model, optimize_row, optimize_weights, Block, HalfIterationRecord,
    TrainReport,
};
