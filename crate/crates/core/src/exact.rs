//! Closed-form single-element inclusion probabilities, first moments of the
//! missing counts, and the fringe-truncation bounds.

use crate::error::{domain, Result};
use crate::model::{Params, Probability};
use crate::numeric::{half_power, one_minus_sq, powu};

/// `P(j ∉ A + A)` for `0 <= j <= N`, where `j` is the distance to the nearer
/// end of `[0, 2N]`.
///
/// Odd `j` needs one of the `(j + 1)/2` pairs `{i, j - i}` to be excluded
/// from `A`; even `j` additionally needs `j/2 ∉ A`.
pub(crate) fn fringe_missing_prob(p: f64, j: usize) -> f64 {
    let j = j as u64;
    if j % 2 == 1 {
        powu(one_minus_sq(p), j.div_ceil(2))
    } else {
        (1.0 - p) * powu(one_minus_sq(p), j / 2)
    }
}

fn check_position(n: usize, params: &Params) -> Result<usize> {
    let top = 2 * params.n_max();
    if n > top {
        return Err(domain!("position {n} outside [0, {top}]"));
    }
    // reflect the right half onto the left fringe
    Ok(if n <= params.n_max() { n } else { top - n })
}

/// `P(n ∈ A + A)` for `0 <= n <= 2N`.
pub fn inclusion_prob(n: usize, params: &Params) -> Result<f64> {
    Ok(1.0 - missing_prob(n, params)?)
}

/// `P(n ∉ A + A)`, evaluated directly (no `1 - (1 - x)` round trip).
pub fn missing_prob(n: usize, params: &Params) -> Result<f64> {
    let j = check_position(n, params)?;
    Ok(fringe_missing_prob(params.p(), j))
}

/// `lim_{N→∞} E[Y] = 2/p² − 1/p − 1`.
pub fn expected_missing_left_limit(p: Probability) -> f64 {
    let p = p.get();
    2.0 / (p * p) - 1.0 / p - 1.0
}

/// `lim_{N→∞} E[W] = 4/p² − 2/p − 2`.
pub fn expected_missing_total_limit(p: Probability) -> f64 {
    2.0 * expected_missing_left_limit(p)
}

/// Exact `E[Y]` at finite `N`.
pub fn expected_missing_left(params: &Params) -> f64 {
    let p = params.p();
    let n = params.n_max() as u64;
    let p2 = p * p;
    let correction = if n % 2 == 0 {
        (2.0 - p) * one_minus_sq(p) / p2
    } else {
        (2.0 - p - p2) * libm::sqrt(one_minus_sq(p)) / p2
    };
    expected_missing_left_limit(params.probability()) - half_power(p, n) * correction
}

/// Exact `E[Z]` at finite `N`: the right fringe is the left fringe of length
/// `N` without the shared midpoint.
pub fn expected_missing_right(params: &Params) -> f64 {
    expected_missing_left(params) - fringe_missing_prob(params.p(), params.n_max())
}

/// Exact `E[W]` at finite `N`.
///
/// For even `N` the coefficient of `sqrt(1 - p²)^N` is
/// `(4 − 2p − 3p² + p³)/p² = (1 − p)(4 + 2p − p²)/p²`, which is what
/// `2 E[Y] − P(N ∉ A + A)` gives; at `N = 0` this reduces to `1 − p`.
pub fn expected_missing_total(params: &Params) -> f64 {
    let p = params.p();
    let n = params.n_max() as u64;
    let p2 = p * p;
    let correction = if n % 2 == 0 {
        (1.0 - p) * (4.0 + 2.0 * p - p2) / p2
    } else {
        (4.0 - 2.0 * p - p2) * libm::sqrt(one_minus_sq(p)) / p2
    };
    expected_missing_total_limit(params.probability()) - half_power(p, n) * correction
}

/// `(2/p²)(1 − p²)^{N/4}`: bounds `E[Y − Ỹ]`, `E[Z − Z̃]` and, by Markov,
/// `P(Y ≠ Ỹ)` and `P(Z ≠ Z̃)`.
pub fn fringe_truncation_bound(params: &Params) -> f64 {
    let p = params.p();
    2.0 / (p * p) * libm::pow(one_minus_sq(p), params.n_max() as f64 / 4.0)
}

/// `(8/p²)(1 − p²)^{N/4}`: bounds `|P(W = m) − (P_Y ∗ P_Z)(m)|` for every `m`.
pub fn convolution_discrepancy_bound(params: &Params) -> f64 {
    4.0 * fringe_truncation_bound(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::NeumaierSum;

    fn params(p: f64, n: usize) -> Params {
        Params::new(p, n).unwrap()
    }

    #[test]
    fn inclusion_examples() {
        let pr = params(0.5, 6);
        assert_eq!(inclusion_prob(0, &pr).unwrap(), 0.5);
        assert_eq!(inclusion_prob(1, &pr).unwrap(), 0.25);
        assert!((inclusion_prob(5, &pr).unwrap() - 0.578125).abs() < 1e-15);
        assert!(inclusion_prob(13, &pr).is_err());
    }

    #[test]
    fn inclusion_is_symmetric() {
        for n_max in 0..30 {
            let pr = params(0.37, n_max);
            for n in 0..=2 * n_max {
                let a = inclusion_prob(n, &pr).unwrap();
                let b = inclusion_prob(2 * n_max - n, &pr).unwrap();
                assert_eq!(a, b);
                assert!((0.0..=1.0).contains(&a));
            }
        }
    }

    #[test]
    fn first_moment_examples() {
        for &p in &[0.1, 0.5, 0.9] {
            assert!((expected_missing_left(&params(p, 0)) - (1.0 - p)).abs() < 1e-12);
            assert!((expected_missing_total(&params(p, 0)) - (1.0 - p)).abs() < 1e-12);
            assert!(expected_missing_right(&params(p, 0)).abs() < 1e-12);
        }
        assert!((expected_missing_left(&params(0.5, 2)) - 1.625).abs() < 1e-14);
        let half = Probability::new(0.5).unwrap();
        assert_eq!(expected_missing_left_limit(half), 5.0);
        assert_eq!(expected_missing_total_limit(half), 10.0);
    }

    #[test]
    fn closed_forms_match_direct_sums() {
        for &p in &[0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            for n_max in 0..120 {
                let pr = params(p, n_max);
                let left: NeumaierSum = (0..=n_max)
                    .map(|n| missing_prob(n, &pr).unwrap())
                    .collect();
                let total: NeumaierSum = (0..=2 * n_max)
                    .map(|n| missing_prob(n, &pr).unwrap())
                    .collect();
                let tol = 1e-12 * left.value().max(1.0);
                assert!((expected_missing_left(&pr) - left.value()).abs() < tol, "E[Y] p={p} N={n_max}");
                assert!(
                    (expected_missing_total(&pr) - total.value()).abs() < 2.0 * tol,
                    "E[W] p={p} N={n_max}"
                );
                let right = total.value() - left.value();
                assert!((expected_missing_right(&pr) - right).abs() < 2.0 * tol);
            }
        }
    }

    #[test]
    fn left_moment_increases_to_limit() {
        for &p in &[0.2, 0.5, 0.8] {
            let limit = expected_missing_left_limit(Probability::new(p).unwrap());
            let mut prev = 0.0;
            for n_max in 0..2000 {
                let e = expected_missing_left(&params(p, n_max));
                assert!(e >= prev && e <= limit + 1e-12);
                prev = e;
            }
            assert!((limit - prev).abs() < 1e-9);
        }
    }

    #[test]
    fn truncation_bounds() {
        assert_eq!(fringe_truncation_bound(&params(0.5, 0)), 8.0);
        assert_eq!(convolution_discrepancy_bound(&params(0.5, 0)), 32.0);
        let b = fringe_truncation_bound(&params(0.5, 200));
        assert!((b - 8.0 * 0.75f64.powi(50)).abs() < 1e-18);
        assert!((b - 4.53e-6).abs() < 1e-8);
        let c = convolution_discrepancy_bound(&params(0.5, 200));
        assert!((c - 1.81e-5).abs() < 1e-7);
    }
}
