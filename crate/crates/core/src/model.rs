//! The beta-weight directed graph model.
//!
//! Edge `i → j` carries a weight `w_ij ~ Beta(a_i, b_j)`, independently over
//! ordered pairs `i ≠ j`. The likelihood depends on the weights only through
//! the row sums `R_i = Σ_j ln w_ij` and the column sums
//! `C_j = Σ_i ln(1 − w_ij)`, so everything downstream of
//! [`sufficient_stats`] works on [`SufficientStats`] alone.

use std::f64::consts::LN_2;

use crate::error::{domain, Error, Result};
use crate::special::{lgamma, psi};

/// Dense `n × n` edge-weight matrix with zero diagonal and every off-diagonal
/// entry strictly inside (0, 1). Stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeightMatrix {
    n: usize,
    w: Vec<f64>,
}

impl EdgeWeightMatrix {
    /// Builds a matrix from row-major data, validating every entry.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(format!(
                "need at least 2 vertices, got {n}"
            )));
        }
        if data.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                data.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let v = data[i * n + j];
                let ok = if i == j { v == 0.0 } else { v > 0.0 && v < 1.0 };
                if !ok {
                    return Err(Error::InvalidWeight {
                        row: i + 1,
                        col: j + 1,
                        value: v,
                    });
                }
            }
        }
        Ok(Self { n, w: data })
    }

    /// Builds a matrix from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Dimension(format!(
                "row {} has {} entries, expected {n}",
                i + 1,
                r.len()
            )));
        }
        Self::new(n, rows.concat())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    /// Row-major view of all entries, diagonal included.
    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    /// Entry of `U(W)`: `ln w_ij` (`i ≠ j`).
    #[inline]
    pub fn log_weight(&self, i: usize, j: usize) -> f64 {
        self.get(i, j).ln()
    }

    /// Entry of `V(W)`: `ln(1 − w_ij)` (`i ≠ j`).
    #[inline]
    pub fn log_complement(&self, i: usize, j: usize) -> f64 {
        (-self.get(i, j)).ln_1p()
    }

    /// Relabels vertices: vertex `k` of the result is vertex `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n)?;
        let n = self.n;
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                w[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        Ok(Self { n, w })
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::Dimension(format!(
            "permutation has length {}, expected {n}",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Dimension(format!(
                "{perm:?} is not a permutation of 0..{n}"
            )));
        }
    }
    Ok(())
}

/// The canonical sufficient statistic `t = (R, C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    r: Vec<f64>,
    c: Vec<f64>,
}

impl SufficientStats {
    /// Wraps precomputed row and column sums. Both must have the same length
    /// `n ≥ 2` and hold finite negative values.
    pub fn new(r: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if r.len() != c.len() {
            return Err(Error::Dimension(format!(
                "R has length {}, C has length {}",
                r.len(),
                c.len()
            )));
        }
        if r.len() < 2 {
            return Err(Error::Dimension(format!(
                "need at least 2 vertices, got {}",
                r.len()
            )));
        }
        for (name, v) in [("R", &r), ("C", &c)] {
            if let Some((i, x)) = v
                .iter()
                .enumerate()
                .find(|(_, x)| !(x.is_finite() && **x < 0.0))
            {
                return Err(domain(
                    "SufficientStats::new",
                    format!("{name}[{}] = {x} must be finite and negative", i + 1),
                ));
            }
        }
        Ok(Self { r, c })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.r.len()
    }

    /// Row sums of `ln w_ij`.
    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// Column sums of `ln(1 − w_ij)`.
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Vertex `k` of the result is vertex `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n())?;
        Ok(Self {
            r: perm.iter().map(|&p| self.r[p]).collect(),
            c: perm.iter().map(|&p| self.c[p]).collect(),
        })
    }
}

/// Beta shape parameters: `a_i` (out-potential of vertex i) and `b_j`
/// (in-resistance of vertex j).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl ParamVector {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Dimension(format!(
                "a has length {}, b has length {}",
                a.len(),
                b.len()
            )));
        }
        if a.len() < 2 {
            return Err(Error::Dimension(format!(
                "need at least 2 vertices, got {}",
                a.len()
            )));
        }
        for (name, v) in [("a", &a), ("b", &b)] {
            if let Some((i, x)) = v
                .iter()
                .enumerate()
                .find(|(_, x)| !(x.is_finite() && **x > 0.0))
            {
                return Err(domain(
                    "ParamVector::new",
                    format!("{name}[{}] = {x} must be finite and positive", i + 1),
                ));
            }
        }
        Ok(Self { a, b })
    }

    /// Every coordinate equal to `value`.
    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n], vec![value; n])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// All 2n coordinates, `a` first.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.a.iter().chain(self.b.iter()).copied()
    }

    /// `self ≥ other` in every coordinate.
    pub fn dominates(&self, other: &ParamVector) -> bool {
        self.iter().zip(other.iter()).all(|(x, y)| x >= y)
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n())?;
        Ok(Self {
            a: perm.iter().map(|&p| self.a[p]).collect(),
            b: perm.iter().map(|&p| self.b[p]).collect(),
        })
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.a, self.b)
    }
}

/// Image of θ under the gradient map: the expected value of `(R, C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanParams {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl MeanParams {
    /// Reinterprets the mean parameters as an observed statistic.
    pub fn into_stats(self) -> Result<SufficientStats> {
        SufficientStats::new(self.a, self.b)
    }
}

/// Left-hand sides of the likelihood equations, one vector per parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Residuals {
    pub fn sup_norm(&self) -> f64 {
        self.a
            .iter()
            .chain(&self.b)
            .fold(0.0, |m, x| m.max(x.abs()))
    }
}

pub fn sufficient_stats(w: &EdgeWeightMatrix) -> SufficientStats {
    let n = w.n();
    let mut r = vec![0.0; n];
    let mut c = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                r[i] += w.log_weight(i, j);
                c[j] += w.log_complement(i, j);
            }
        }
    }
    SufficientStats { r, c }
}

fn check_dims(stats: &SufficientStats, theta: &ParamVector) -> Result<()> {
    if stats.n() == theta.n() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "statistics have n = {}, parameters have n = {}",
            stats.n(),
            theta.n()
        )))
    }
}

/// `(Σ_{j≠i} ψ(a_i + b_j), Σ_{i≠j} ψ(a_i + b_j))`, the pairwise digamma sums
/// shared by the residuals, the mean map and the fixed-point map.
pub(crate) fn pair_digamma_sums(theta: &ParamVector) -> (Vec<f64>, Vec<f64>) {
    let n = theta.n();
    let (a, b) = (theta.a(), theta.b());
    let mut row = vec![0.0; n];
    let mut col = vec![0.0; n];
    for i in 0..n {
        let ai = a[i];
        let mut acc = 0.0;
        for j in 0..n {
            if i != j {
                let v = psi(ai + b[j]);
                acc += v;
                col[j] += v;
            }
        }
        row[i] = acc;
    }
    (row, col)
}

/// Log-likelihood of θ given the sufficient statistic.
pub fn log_likelihood(stats: &SufficientStats, theta: &ParamVector) -> Result<f64> {
    check_dims(stats, theta)?;
    let n = theta.n();
    let (a, b) = (theta.a(), theta.b());
    let lg_a: Vec<f64> = a.iter().map(|&x| lgamma(x)).collect();
    let lg_b: Vec<f64> = b.iter().map(|&x| lgamma(x)).collect();
    let mut ll = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                ll += lgamma(a[i] + b[j]) - lg_a[i] - lg_b[j];
            }
        }
    }
    for i in 0..n {
        ll += (a[i] - 1.0) * stats.r()[i] + (b[i] - 1.0) * stats.c()[i];
    }
    Ok(ll)
}

/// Partial derivatives of the log-likelihood:
/// `ρᵃ_i = Σ_{j≠i} ψ(a_i+b_j) − (n−1)ψ(a_i) + R_i`,
/// `ρᵇ_j = Σ_{i≠j} ψ(a_i+b_j) − (n−1)ψ(b_j) + C_j`.
///
/// θ is the maximum-likelihood estimate exactly when both vectors vanish.
pub fn ml_residuals(stats: &SufficientStats, theta: &ParamVector) -> Result<Residuals> {
    check_dims(stats, theta)?;
    let k = (theta.n() - 1) as f64;
    let (row, col) = pair_digamma_sums(theta);
    let a = row
        .iter()
        .zip(theta.a())
        .zip(stats.r())
        .map(|((s, &x), r)| s - k * psi(x) + r)
        .collect();
    let b = col
        .iter()
        .zip(theta.b())
        .zip(stats.c())
        .map(|((s, &x), c)| s - k * psi(x) + c)
        .collect();
    Ok(Residuals { a, b })
}

/// Gradient map θ ↦ (A, B) with
/// `A_i = −Σ_{j≠i} [ψ(a_i+b_j) − ψ(a_i)]`, `B_j = −Σ_{i≠j} [ψ(a_i+b_j) − ψ(b_j)]`.
pub fn mean_map(theta: &ParamVector) -> MeanParams {
    let k = (theta.n() - 1) as f64;
    let (row, col) = pair_digamma_sums(theta);
    MeanParams {
        a: row
            .iter()
            .zip(theta.a())
            .map(|(s, &x)| k * psi(x) - s)
            .collect(),
        b: col
            .iter()
            .zip(theta.b())
            .map(|(s, &x)| k * psi(x) - s)
            .collect(),
    }
}

/// `−2 ln 2 · n(n−1) − (Σ R_i + Σ C_j)`. Nonnegative for any valid statistic;
/// zero exactly when every weight is ½.
pub fn stats_bound_margin(stats: &SufficientStats) -> f64 {
    let n = stats.n() as f64;
    let total: f64 = stats.r().iter().chain(stats.c()).sum();
    -2.0 * LN_2 * n * (n - 1.0) - total
}

/// The same margin computed edge by edge from the weights as
/// `Σ_{i≠j} −ln(4 w_ij (1 − w_ij))`. Every term is nonnegative and vanishes
/// exactly at w = ½, so the result is exactly 0 on the all-½ matrix.
pub fn weight_bound_margin(w: &EdgeWeightMatrix) -> f64 {
    let n = w.n();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let x = w.get(i, j);
            total += if (0.25..=0.75).contains(&x) {
                // 1 − 2x is exact here.
                let d = 1.0 - 2.0 * x;
                -(-d * d).ln_1p()
            } else {
                -2.0 * LN_2 - x.ln() - (-x).ln_1p()
            };
        }
    }
    total
}

/// Whether `Σ R_i + Σ C_j ≤ −2 ln 2 · n(n−1)` holds, allowing for
/// summation rounding at the equality point.
pub fn check_stats_bound(stats: &SufficientStats) -> bool {
    let n = stats.n() as f64;
    let bound = 2.0 * LN_2 * n * (n - 1.0);
    stats_bound_margin(stats) >= -1e-12 * bound
}
