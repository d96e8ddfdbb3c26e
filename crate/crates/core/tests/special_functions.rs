use std::f64::consts::LN_2;

use betagraph::special::{
    digamma, digamma_approx, duplication_gap, inverse_digamma, solve_epsilon, trigamma,
};
use proptest::prelude::*;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

proptest! {
    #[test]
    fn digamma_recurrence(x in log_uniform(1e-4, 1e4)) {
        let lhs = digamma(x + 1.0).unwrap();
        let rhs = digamma(x).unwrap() + 1.0 / x;
        prop_assert!((lhs - rhs).abs() <= 1e-11 * lhs.abs().max(1.0));
    }

    #[test]
    fn trigamma_recurrence(x in log_uniform(1e-4, 1e4)) {
        let lhs = trigamma(x + 1.0).unwrap();
        let rhs = trigamma(x).unwrap() - 1.0 / (x * x);
        prop_assert!((lhs - rhs).abs() <= 1e-11 * trigamma(x).unwrap().max(1.0));
    }

    #[test]
    fn duplication_identity(x in log_uniform(1e-4, 1e4)) {
        let lhs = digamma(2.0 * x).unwrap();
        let rhs = 0.5 * digamma(x).unwrap() + 0.5 * digamma(x + 0.5).unwrap() + LN_2;
        prop_assert!((lhs - rhs).abs() <= 1e-11 * lhs.abs().max(1.0));
    }

    #[test]
    fn reciprocal_trigamma_superadditive(x in log_uniform(1e-4, 1e4), y in log_uniform(1e-4, 1e4)) {
        let lhs = 1.0 / trigamma(x + y).unwrap();
        let rhs = 1.0 / trigamma(x).unwrap() + 1.0 / trigamma(y).unwrap();
        prop_assert!(lhs > rhs, "x={x} y={y}: {lhs} <= {rhs}");
    }

    #[test]
    fn trigamma_is_digamma_derivative(x in 0.05f64..200.0) {
        let h = 1e-5 * x.max(1.0);
        let fd = (digamma(x + h).unwrap() - digamma(x - h).unwrap()) / (2.0 * h);
        let t = trigamma(x).unwrap();
        prop_assert!((fd - t).abs() <= 1e-6 * t.max(1.0), "x={x}: fd {fd} vs {t}");
    }

    #[test]
    fn inverse_digamma_round_trip(x in log_uniform(1e-3, 1e3)) {
        let back = inverse_digamma(digamma(x).unwrap()).unwrap();
        prop_assert!((back - x).abs() <= 1e-10 * x.max(1.0));
    }

    #[test]
    fn inverse_digamma_increasing(y1 in -50.0f64..20.0, d in 1e-6f64..5.0) {
        prop_assert!(inverse_digamma(y1).unwrap() < inverse_digamma(y1 + d).unwrap());
    }

    #[test]
    fn solve_epsilon_residual(m in log_uniform(1e-8, 1e4)) {
        let m = LN_2 + m;
        let eps = solve_epsilon(m).unwrap();
        prop_assert!(eps > 0.0);
        prop_assert!((duplication_gap(eps) - m).abs() <= 1e-12 * m.max(1.0));
    }
}

#[test]
fn digamma_limits() {
    // ψ(x) → −∞ at 0+, and ψ(x) − ln x → 0 at ∞.
    assert!(digamma(1e-12).unwrap() < -1e11);
    let mut prev = f64::INFINITY;
    for k in 0..8 {
        let x = 10f64.powi(k);
        let gap = (digamma(x).unwrap() - x.ln()).abs();
        assert!(gap < prev);
        prev = gap;
    }
    assert!(prev < 1e-6);
    assert!(trigamma(1e8).unwrap() < 1e-7);
}

#[test]
fn digamma_increasing_and_trigamma_decreasing() {
    let xs: Vec<f64> = (0..=4000)
        .map(|k| 10f64.powf(-6.0 + 12.0 * k as f64 / 4000.0))
        .collect();
    for w in xs.windows(2) {
        assert!(digamma(w[1]).unwrap() > digamma(w[0]).unwrap());
        assert!(trigamma(w[1]).unwrap() < trigamma(w[0]).unwrap());
    }
}

#[test]
fn duplication_gap_decreasing_above_ln2() {
    let grid: Vec<f64> = (0..=10_000)
        .map(|k| 10f64.powf(-4.0 + 8.0 * k as f64 / 10_000.0))
        .collect();
    let mut prev = f64::INFINITY;
    for &x in &grid {
        let g = duplication_gap(x);
        assert!(g > LN_2, "gap({x}) = {g}");
        assert!(g < prev, "not decreasing at {x}");
        prev = g;
    }
}

#[test]
fn log_half_shift_approximation() {
    // Fit the constant in |ψ(x) − ln(x − ½)| ≤ K/x² over [2, 1e4].
    let k = (0..=2000)
        .map(|i| 2.0 * 5000f64.powf(i as f64 / 2000.0))
        .map(|x| (digamma(x).unwrap() - digamma_approx(x).unwrap()).abs() * x * x)
        .fold(0.0, f64::max);
    assert!(k <= 1.0, "fitted K = {k}");
    assert!(k > 0.0);
}
