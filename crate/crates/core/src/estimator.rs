//! Fixed-point maximum-likelihood estimator.
//!
//! The likelihood equations are rearranged into `θ = f(θ)` with
//!
//! ```text
//! a_i ← ψ⁻¹[ (R_i + Σ_{j≠i} ψ(a_i + b_j)) / (n−1) ]
//! b_j ← ψ⁻¹[ (C_j + Σ_{i≠j} ψ(a_i + b_j)) / (n−1) ]
//! ```
//!
//! and iterated synchronously from `ε·1`, where ε solves
//! `ψ(2ε) − ψ(ε) = M` and `M = max_i max(−R_i, −C_i) / (n−1)`. From that
//! start every coordinate increases monotonically to the unique solution,
//! and the rate is eventually geometric. The closed-form L1 norm of the
//! Jacobian of `f` at the solution is reported as a contraction certificate.

use crate::error::{domain, Error, Result};
use crate::model::{ml_residuals, pair_digamma_sums, ParamVector, SufficientStats};
use crate::special::{inverse_digamma, psi1, solve_epsilon};

/// Any coordinate above this during iteration is treated as divergence.
pub const PARAM_CAP: f64 = 1e8;

/// The iteration starts at `ε·(1 − START_SHRINK)`. In exact arithmetic the
/// coordinate attaining `M` satisfies `f(ε1) = ε` with equality, so rounding
/// can push it an ulp below ε; starting slightly lower keeps every
/// coordinate of the first step strictly increasing. Any start below ε is
/// still a lower bound on the solution.
pub const START_SHRINK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    /// Threshold on the scaled sup-norm step `max_k |Δθ_k| / max(1, θ_k)`.
    pub tol: f64,
    /// Threshold on `‖ml_residuals‖∞` at the candidate solution.
    pub residual_tol: f64,
    pub max_iters: usize,
    pub record_trace: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            residual_tol: 1e-8,
            max_iters: 100_000,
            record_trace: false,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(domain(
                "EstimatorConfig",
                format!("tol = {} must be > 0", self.tol),
            ));
        }
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) {
            return Err(domain(
                "EstimatorConfig",
                format!("residual_tol = {} must be > 0", self.residual_tol),
            ));
        }
        if self.max_iters == 0 {
            return Err(domain("EstimatorConfig", "max_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationReport {
    pub theta_hat: ParamVector,
    pub iterations: usize,
    /// Scaled sup-norm change of the last iteration.
    pub final_step: f64,
    /// `‖ml_residuals(stats, θ̂)‖∞`.
    pub final_residual: f64,
    /// L1 norm of the Jacobian of `f` at θ̂ (meaningful only at a solution).
    pub jacobian_l1: f64,
    pub converged: bool,
    /// Whether every iterate dominated its predecessor coordinatewise.
    pub monotone: bool,
    /// Solution of `ψ(2ε) − ψ(ε) = M`; the iteration starts just below `ε·1`.
    pub epsilon: f64,
    pub m: f64,
    /// Per-iteration scaled sup-norm changes, if requested.
    pub trace: Option<Vec<f64>>,
}

/// `M = max_i max(−R_i, −C_i) / (n−1)`; at least ln 2 for any realizable statistic.
pub fn compute_m(stats: &SufficientStats) -> f64 {
    let k = (stats.n() - 1) as f64;
    stats
        .r()
        .iter()
        .chain(stats.c())
        .fold(f64::NEG_INFINITY, |m, &x| m.max(-x / k))
}

/// Starting point `ε·1` (shrunk by [`START_SHRINK`]). Every coordinate is a
/// lower bound on the solution.
pub fn init_params(stats: &SufficientStats) -> Result<ParamVector> {
    let eps = solve_epsilon(compute_m(stats))?;
    ParamVector::constant(stats.n(), eps * (1.0 - START_SHRINK))
}

/// One synchronous application of the fixed-point map `f`.
pub fn iterate_step(theta: &ParamVector, stats: &SufficientStats) -> Result<ParamVector> {
    if theta.n() != stats.n() {
        return Err(Error::Dimension(format!(
            "statistics have n = {}, parameters have n = {}",
            stats.n(),
            theta.n()
        )));
    }
    let k = (theta.n() - 1) as f64;
    let (row, col) = pair_digamma_sums(theta);
    let a = row
        .iter()
        .zip(stats.r())
        .map(|(s, r)| inverse_digamma((r + s) / k))
        .collect::<Result<Vec<_>>>()?;
    let b = col
        .iter()
        .zip(stats.c())
        .map(|(s, c)| inverse_digamma((c + s) / k))
        .collect::<Result<Vec<_>>>()?;
    ParamVector::new(a, b)
}

fn scaled_step(prev: &ParamVector, next: &ParamVector) -> f64 {
    prev.iter()
        .zip(next.iter())
        .fold(0.0, |m, (p, q)| m.max((q - p).abs() / q.abs().max(1.0)))
}

/// Runs the fixed-point iteration from `ε·1` to convergence.
///
/// Stops once the scaled step is at most `tol` *and* the residual is at most
/// `residual_tol`. Running out of iterations returns
/// [`Error::NonConvergence`] carrying the partial report.
pub fn estimate(stats: &SufficientStats, config: &EstimatorConfig) -> Result<EstimationReport> {
    config.validate()?;
    let m = compute_m(stats);
    let epsilon = solve_epsilon(m)?;
    let mut theta = ParamVector::constant(stats.n(), epsilon * (1.0 - START_SHRINK))?;
    let mut trace = config.record_trace.then(Vec::new);
    let mut monotone = true;
    let mut step = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iters {
        iterations += 1;
        let next = iterate_step(&theta, stats)?;
        if next.iter().any(|x| x > PARAM_CAP) {
            return Err(Error::Divergence {
                iteration: iterations,
                cap: PARAM_CAP,
            });
        }
        step = scaled_step(&theta, &next);
        monotone &= next.dominates(&theta);
        theta = next;
        if let Some(t) = trace.as_mut() {
            t.push(step);
        }
        if step <= config.tol {
            residual = ml_residuals(stats, &theta)?.sup_norm();
            if residual <= config.residual_tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        residual = ml_residuals(stats, &theta)?.sup_norm();
    }

    let report = EstimationReport {
        jacobian_l1: jacobian_l1_norm(&theta),
        theta_hat: theta,
        iterations,
        final_step: step,
        final_residual: residual,
        converged,
        monotone,
        epsilon,
        m,
        trace,
    };
    if converged {
        Ok(report)
    } else {
        Err(Error::NonConvergence {
            report: Box::new(report),
        })
    }
}

/// Column sums of the Jacobian of `f` at a solution θ̂, `a` columns first.
///
/// At a solution the likelihood equations let the ψ⁻¹ derivative collapse to
/// `1/ψ′(â_j)` (resp. `1/ψ′(b̂_j)`), so the sums depend on θ̂ alone. Away from
/// a solution the values do not describe the Jacobian of `f`.
pub fn jacobian_column_sums(theta_hat: &ParamVector) -> Vec<f64> {
    let n = theta_hat.n();
    let k = (n - 1) as f64;
    let (a, b) = (theta_hat.a(), theta_hat.b());
    let inv_a: Vec<f64> = a.iter().map(|&x| 1.0 / psi1(x)).collect();
    let inv_b: Vec<f64> = b.iter().map(|&x| 1.0 / psi1(x)).collect();
    let mut col_a = vec![0.0; n];
    let mut col_b = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let t = psi1(a[i] + b[j]) * (inv_a[i] + inv_b[j]);
                col_a[i] += t;
                col_b[j] += t;
            }
        }
    }
    col_a.into_iter().chain(col_b).map(|s| s / k).collect()
}

/// L1 operator norm of the Jacobian of `f` at a solution: the largest
/// column sum (all entries are nonnegative). Below 1 certifies that `f`
/// contracts near θ̂.
pub fn jacobian_l1_norm(theta_hat: &ParamVector) -> f64 {
    jacobian_column_sums(theta_hat)
        .into_iter()
        .fold(0.0, f64::max)
}
