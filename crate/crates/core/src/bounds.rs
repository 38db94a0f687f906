//! Moment bounds and exponential tail bounds for the left-fringe count `Y`.
//!
//! Upper bounds come from Chernoff's inequality applied to moment bounds of
//! the form `E[Y^k] <= c k!/r^k`; the decay rate is `α = log(1/sqrt(1 − p²))`
//! for the crude bound and `α′ = log(1/λ₁)` for the improved one. The lower
//! bound comes from the event that `0, ..., n/2` are all absent from `A`.

use crate::chains::spectral_constants;
use crate::error::{domain, Error, Result};
use crate::exact::expected_missing_left_limit;
use crate::model::Probability;

fn ln_factorial(k: u32) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

/// `2 k!/α^k`.
pub fn kth_moment_upper(p: Probability, k: u32) -> Result<f64> {
    let alpha = spectral_constants(p).alpha;
    let v = libm::exp(core::f64::consts::LN_2 + ln_factorial(k) - k as f64 * libm::log(alpha));
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Unrepresentable("k-th moment bound"))
    }
}

/// `(2/p² − 1/p − 1) + 2 k!/(λ₁ α′^k)`, for `k >= 1`.
pub fn kth_moment_upper_improved(p: Probability, k: u32) -> Result<f64> {
    if k < 1 {
        return Err(domain!("improved moment bound needs k >= 1"));
    }
    let s = spectral_constants(p);
    let tail = libm::exp(
        core::f64::consts::LN_2 + ln_factorial(k) - libm::log(s.lambda1) - k as f64 * libm::log(s.alpha_prime),
    );
    let v = expected_missing_left_limit(p) + tail;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Unrepresentable("improved k-th moment bound"))
    }
}

/// `E[e^{tY}] <= 2/(1 − t/α)` for `|t| < α`.
pub fn mgf_upper(p: Probability, t: f64) -> Result<f64> {
    let alpha = spectral_constants(p).alpha;
    if t.is_nan() || libm::fabs(t) >= alpha {
        return Err(domain!("need |t| < alpha = {alpha}, got {t}"));
    }
    Ok(2.0 / (1.0 - t / alpha))
}

/// Unclamped Chernoff bound on `P(Y >= n)`: `2αn e^{1 − αn}` for `n > 1/α`,
/// and the trivial value 1 otherwise.
pub fn tail_upper_chernoff_unclamped(p: Probability, n: u64) -> f64 {
    let alpha = spectral_constants(p).alpha;
    let x = alpha * n as f64;
    if x <= 1.0 {
        return 1.0;
    }
    2.0 * x * libm::exp(1.0 - x)
}

pub fn tail_upper_chernoff(p: Probability, n: u64) -> f64 {
    tail_upper_chernoff_unclamped(p, n).min(1.0)
}

/// Unclamped improved bound on `P(Y >= n)`:
/// `(2/p² − 1/p − 1) e^{−(n−1)(α′ − 1/n)} + 2nα′ e^{1 − nα′}/λ₁` for
/// `n > 1/α′`, and 1 otherwise.
pub fn tail_upper_improved_unclamped(p: Probability, n: u64) -> f64 {
    let s = spectral_constants(p);
    let nf = n as f64;
    let x = s.alpha_prime * nf;
    if x <= 1.0 {
        return 1.0;
    }
    let mean = expected_missing_left_limit(p);
    mean * libm::exp(-(nf - 1.0) * (s.alpha_prime - 1.0 / nf)) + 2.0 * x * libm::exp(1.0 - x) / s.lambda1
}

pub fn tail_upper_improved(p: Probability, n: u64) -> f64 {
    tail_upper_improved_unclamped(p, n).min(1.0)
}

/// Which exponent to use for the exponential lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LowerBoundVariant {
    /// `(1 − p)^{n/2 + 1}`: `0, ..., n/2` are `n/2 + 1` independent absences.
    #[default]
    Rigorous,
    /// `(1 − p)^{n/2}`, one factor fewer.
    AsStated,
}

/// Lower bound on `P(Y >= n)` for even `n`.
pub fn tail_lower(p: Probability, n: u64, variant: LowerBoundVariant) -> Result<f64> {
    if n % 2 == 1 {
        return Err(domain!("lower tail bound needs even n, got {n}"));
    }
    let exponent = match variant {
        LowerBoundVariant::Rigorous => n / 2 + 1,
        LowerBoundVariant::AsStated => n / 2,
    };
    Ok(libm::pow(1.0 - p.get(), exponent as f64))
}
