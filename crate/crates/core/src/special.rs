//! Real-valued digamma, trigamma and log-gamma on the positive half-line,
//! plus the two inverse problems the estimator needs: `ψ(x) = y` and
//! `ψ(2x) − ψ(x) = M`.
//!
//! All three forward functions use the same construction: shift the
//! argument with the upward recurrence until it is at least [`ASYMPTOTIC_THRESHOLD`],
//! then sum the asymptotic (Bernoulli) series. Twelve Bernoulli terms at
//! x ≥ 6 leave a truncation error near 1e−15.

use std::f64::consts::{LN_2, PI};

use crate::error::{domain, Error, Result};

/// Euler–Mascheroni constant γ = −ψ(1).
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments below this are shifted up by the recurrence before the
/// asymptotic series is applied.
pub const ASYMPTOTIC_THRESHOLD: f64 = 6.0;

const INVERSE_DIGAMMA_MAX_ITERS: usize = 50;

// B_2k for k = 1..12.
const BERNOULLI: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// A strictly positive, finite real.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PositiveReal(f64);

impl PositiveReal {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Self(value))
        } else {
            Err(domain(
                "PositiveReal::new",
                format!("{value} is not a finite positive real"),
            ))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<PositiveReal> for f64 {
    fn from(p: PositiveReal) -> f64 {
        p.0
    }
}

#[inline]
fn check_positive(func: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(domain(func, format!("argument {x} must be finite and > 0")))
    }
}

/// Digamma ψ(x) = d/dx ln Γ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma", x)?;
    Ok(psi(x))
}

/// Trigamma ψ′(x) for x > 0.
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive("trigamma", x)?;
    Ok(psi1(x))
}

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_positive("ln_gamma", x)?;
    Ok(lgamma(x))
}

/// Unchecked digamma. The caller guarantees `x > 0` and finite.
#[inline]
pub(crate) fn psi(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    while x < ASYMPTOTIC_THRESHOLD {
        shift += 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Σ B_2k / (2k x^2k), Horner in 1/x².
    let mut series = 0.0;
    for k in (1..=BERNOULLI.len()).rev() {
        series = (series + BERNOULLI[k - 1] / (2 * k) as f64) * inv2;
    }
    x.ln() - 0.5 / x - series - shift
}

/// Unchecked trigamma. The caller guarantees `x > 0` and finite.
#[inline]
pub(crate) fn psi1(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    while x < ASYMPTOTIC_THRESHOLD {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Σ B_2k / x^(2k+1)
    let mut series = 0.0;
    for k in (1..=BERNOULLI.len()).rev() {
        series = (series + BERNOULLI[k - 1]) * inv2;
    }
    inv + 0.5 * inv2 + series * inv + shift
}

/// Unchecked log-gamma via Stirling's series.
pub(crate) fn lgamma(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut log_prod = 0.0;
    while x < ASYMPTOTIC_THRESHOLD {
        log_prod += x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Σ B_2k / (2k (2k−1) x^(2k−1))
    let mut series = 0.0;
    for k in (1..=BERNOULLI.len()).rev() {
        let k2 = (2 * k) as f64;
        series = series * inv2 + BERNOULLI[k - 1] / (k2 * (k2 - 1.0));
    }
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series * inv - log_prod
}

/// `ln(x − ½)`, the two-term approximation of ψ for x > 1 with an
/// O(1/x²) error. Kept for diagnostics only; nothing in the estimator uses it.
pub fn digamma_approx(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 1.0) {
        return Err(domain(
            "digamma_approx",
            format!("argument {x} must be > 1"),
        ));
    }
    Ok((x - 0.5).ln())
}

/// Inverse of ψ: returns the unique x > 0 with ψ(x) = y.
///
/// Seeded with `exp(y) + ½` for y ≥ −2.22 and `−1/(y + γ)` below, then
/// refined by Newton's method on ψ. Because ψ is increasing and concave,
/// one Newton step from any start lands left of the root and the iterates
/// then climb to it monotonically.
pub fn inverse_digamma(y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(domain(
            "inverse_digamma",
            format!("argument {y} is not finite"),
        ));
    }
    let mut x = if y >= -2.22 {
        y.exp() + 0.5
    } else {
        -1.0 / (y + EULER_GAMMA)
    };
    if !x.is_finite() {
        return Err(Error::Numeric {
            func: "inverse_digamma",
            detail: format!("ψ⁻¹({y}) overflows f64"),
        });
    }
    // Newton converges quadratically, so run it to machine precision rather
    // than to the acceptance tolerance.
    for _ in 0..INVERSE_DIGAMMA_MAX_ITERS {
        let r = psi(x) - y;
        if r == 0.0 {
            break;
        }
        let mut next = x - r / psi1(x);
        if next <= 0.0 {
            // Overshot past zero from far right; fall back toward the origin.
            next = x / 16.0;
        }
        let done = (next - x).abs() <= 4.0 * f64::EPSILON * x;
        x = next;
        if done {
            break;
        }
    }
    let tol = 1e-12 * y.abs().max(1.0);
    let r = psi(x) - y;
    if r.abs() <= tol {
        Ok(x)
    } else {
        Err(Error::Numeric {
            func: "inverse_digamma",
            detail: format!("Newton failed for y = {y}: residual {r:e} at x = {x}"),
        })
    }
}

/// `ψ(2x) − ψ(x)`, strictly decreasing from +∞ to ln 2 on (0, ∞).
#[inline]
pub fn duplication_gap(x: f64) -> f64 {
    psi(2.0 * x) - psi(x)
}

/// Solves `ψ(2ε) − ψ(ε) = m` for ε > 0.
///
/// The left side ranges over (ln 2, ∞), so `m ≤ ln 2` has no solution and
/// yields [`Error::DegenerateStats`].
pub fn solve_epsilon(m: f64) -> Result<f64> {
    if m.is_nan() || m == f64::INFINITY {
        return Err(domain("solve_epsilon", format!("M = {m} is not finite")));
    }
    if m <= LN_2 {
        return Err(Error::DegenerateStats { m });
    }

    // Bracket [lo, hi] with gap(lo) > m >= gap(hi).
    let (mut lo, mut hi);
    let start = 0.5;
    if duplication_gap(start) > m {
        lo = start;
        hi = start * 2.0;
        while duplication_gap(hi) > m {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::Numeric {
                    func: "solve_epsilon",
                    detail: format!("no bracket found for M = {m}"),
                });
            }
        }
    } else {
        hi = start;
        lo = start / 2.0;
        while duplication_gap(lo) <= m {
            hi = lo;
            lo /= 2.0;
            if lo < 1e-300 {
                return Err(Error::Numeric {
                    func: "solve_epsilon",
                    detail: format!("no bracket found for M = {m}"),
                });
            }
        }
    }

    for _ in 0..400 {
        if hi - lo <= 1e-13 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if duplication_gap(mid) > m {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut x = 0.5 * (lo + hi);
    let mut r = duplication_gap(x) - m;
    // Newton polish, accepted only while it improves the residual.
    for _ in 0..3 {
        let slope = 2.0 * psi1(2.0 * x) - psi1(x);
        if slope == 0.0 {
            break;
        }
        let cand = x - r / slope;
        if !(cand > 0.0) {
            break;
        }
        let rc = duplication_gap(cand) - m;
        if rc.abs() < r.abs() {
            x = cand;
            r = rc;
        } else {
            break;
        }
    }
    Ok(x)
}
