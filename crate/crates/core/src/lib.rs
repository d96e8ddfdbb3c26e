//! Maximum-likelihood estimation for directed graphs whose edge weights are
//! independent `Beta(a_i, b_j)` variables.
//!
//! The pipeline is: load or generate an [`EdgeWeightMatrix`], reduce it to
//! its [`SufficientStats`], and run the fixed-point [`estimate`]. The
//! [`special`] module supplies digamma, trigamma and their inverses.

pub mod error;
pub mod estimator;
pub mod generator;
pub mod ingest;
pub mod model;
pub mod special;

pub use error::{Error, Result};
pub use estimator::{
    compute_m, estimate, init_params, iterate_step, jacobian_column_sums, jacobian_l1_norm,
    EstimationReport, EstimatorConfig,
};
pub use generator::{
    generate_graph, generate_instance, recovery_experiment, sample_beta, ExperimentReport,
    GeneratorConfig, GraphRng,
};
pub use ingest::{load_matrix, normalize_counts, LoadedMatrix, MatrixFormat, RawFlowMatrix};
pub use model::{
    check_stats_bound, log_likelihood, mean_map, ml_residuals, sufficient_stats,
    weight_bound_margin, EdgeWeightMatrix, MeanParams, ParamVector, Residuals, SufficientStats,
};
pub use special::{digamma, inverse_digamma, solve_epsilon, trigamma, PositiveReal};
