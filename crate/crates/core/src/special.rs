//! Special functions shared by the pivotality models and the outcome estimators.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use libm::{erfc, lgamma};

pub(crate) fn ln_gamma(x: f64) -> f64 {
    lgamma(x)
}

/// Log-probabilities below this are reported as exactly zero.
pub const LN_UNDERFLOW: f64 = -745.0;

/// Largest `k` whose `ln k!` is served from the precomputed table.
const FACTORIAL_TABLE_LEN: usize = 10_001;

/// Standard normal CDF through the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

pub(crate) fn exp_floor(ln_p: f64) -> f64 {
    if ln_p < LN_UNDERFLOW {
        0.0
    } else {
        ln_p.exp()
    }
}

/// `ln Γ(x) - [(x - 1/2) ln x - x + ln(2π)/2]`, the Stirling remainder.
pub(crate) fn stirling_remainder(x: f64) -> f64 {
    if x >= 10.0 {
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        let tail = 1.0 / 1188.0 - inv2 * (691.0 / 360_360.0 - inv2 / 156.0);
        inv * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * tail))))
    } else {
        ln_gamma(x) - ((x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln())
    }
}

fn factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(FACTORIAL_TABLE_LEN);
        let mut acc = 0.0f64;
        table.push(0.0);
        for k in 1..FACTORIAL_TABLE_LEN {
            acc += (k as f64).ln();
            table.push(acc);
        }
        table
    })
}

pub(crate) fn ln_factorial(k: u64) -> f64 {
    match factorial_table().get(k as usize) {
        Some(&v) => v,
        None => ln_gamma(k as f64 + 1.0),
    }
}

/// Log pmf of `Bin(trials, success)` at `k`, exact at the degenerate ends.
pub(crate) fn ln_binomial_pmf(trials: u64, k: u64, success: f64) -> f64 {
    if k > trials {
        return f64::NEG_INFINITY;
    }
    if success <= 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if success >= 1.0 {
        return if k == trials { 0.0 } else { f64::NEG_INFINITY };
    }
    ln_factorial(trials) - ln_factorial(k) - ln_factorial(trials - k)
        + k as f64 * success.ln()
        + (trials - k) as f64 * (-success).ln_1p()
}

/// Stable `ln Σ exp(x_i)`. All summands are positive, so the relative
/// error stays within `len * eps` whatever the order.
pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    max + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_table_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert!((normal_cdf(-1.959_963_984_540_054) - 0.025).abs() < 1e-12);
        assert!(normal_cdf(-37.0) > 0.0);
    }

    #[test]
    fn stirling_remainder_matches_ln_gamma_on_both_branches() {
        for &x in &[9.5, 10.0, 12.5, 50.0, 1e3, 1e6] {
            let direct = ln_gamma(x) - ((x - 0.5) * f64::ln(x) - x + 0.5 * (2.0 * PI).ln());
            let tol = 1e-12 * ln_gamma(x).abs().max(1.0);
            assert!((stirling_remainder(x) - direct).abs() < tol, "x = {x}");
        }
    }

    #[test]
    fn factorial_table_and_gamma_fallback_agree() {
        assert!((ln_factorial(10_000) - ln_gamma(10_001.0)).abs() < 1e-8);
        assert!((ln_factorial(10_001) - ln_gamma(10_002.0)).abs() < 1e-8);
        assert_eq!(ln_factorial(0), 0.0);
    }

    #[test]
    fn binomial_pmf_edges() {
        assert_eq!(ln_binomial_pmf(5, 0, 0.0), 0.0);
        assert_eq!(ln_binomial_pmf(5, 5, 1.0), 0.0);
        assert_eq!(ln_binomial_pmf(5, 4, 1.0), f64::NEG_INFINITY);
        assert!((ln_binomial_pmf(4, 2, 0.5).exp() - 0.375).abs() < 1e-15);
    }
}
