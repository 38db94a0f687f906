//! The chain-satisfaction probabilities `a_k` and their spectral constants.
//!
//! `a_k` is the probability that a length-`k` Bernoulli(p) bit string has no
//! two adjacent ones. It obeys `a_k = (1 − p) a_{k−1} + p(1 − p) a_{k−2}` with
//! `a_0 = a_1 = 1`, so it is a two-term linear recurrence whose characteristic
//! roots `λ₁ > 0 > λ₂` give the closed form `a_k = C₁λ₁^k + C₂λ₂^k`.

use alloc::vec::Vec;

use crate::model::Probability;
use crate::numeric::{one_minus_sq, powu};

/// Table of `a_0, ..., a_K` together with the complements `1 − a_k`.
///
/// The complements are produced by their own all-positive recurrence,
/// `1 − a_k = p² + (1 − p)(1 − a_{k−1}) + p(1 − p)(1 − a_{k−2})`, so they keep
/// full relative precision when `a_k` is close to one (small `p`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChainProbTable {
    p: Probability,
    values: Vec<f64>,
    complements: Vec<f64>,
}

impl ChainProbTable {
    pub fn new(p: Probability, max_k: usize) -> Self {
        let mut table = Self {
            p,
            values: Vec::with_capacity(max_k + 1),
            complements: Vec::with_capacity(max_k + 1),
        };
        table.values.extend([1.0, 1.0]);
        table.complements.extend([0.0, 0.0]);
        table.extend_to(max_k);
        table.values.truncate(max_k + 1);
        table.complements.truncate(max_k + 1);
        table
    }

    pub fn probability(&self) -> Probability {
        self.p
    }

    /// Largest `k` currently stored.
    pub fn max_k(&self) -> usize {
        self.values.len() - 1
    }

    /// Grows the table so that `a_k` is available.
    pub fn extend_to(&mut self, k: usize) {
        let p = self.p.get();
        let (c1, c2) = (1.0 - p, p * (1.0 - p));
        let p2 = p * p;
        while self.values.len() <= k {
            let i = self.values.len();
            if self.values.len() < 2 {
                self.values.push(1.0);
                self.complements.push(0.0);
                continue;
            }
            let a = c1 * self.values[i - 1] + c2 * self.values[i - 2];
            let b = p2 + c1 * self.complements[i - 1] + c2 * self.complements[i - 2];
            self.values.push(a);
            self.complements.push(b);
        }
    }

    /// `a_k`.
    ///
    /// # Panics
    ///
    /// Panics if `k > max_k()`.
    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// `1 − a_k`.
    #[inline]
    pub fn complement(&self, k: usize) -> f64 {
        self.complements[k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn chain_prob_table(p: Probability, max_k: usize) -> ChainProbTable {
    ChainProbTable::new(p, max_k)
}

/// Streaming evaluator of `(a_k, 1 − a_k)` for `k = 0, 1, 2, ...` in O(1)
/// memory. Used by series whose truncation depth is not known up front.
#[derive(Debug, Clone)]
pub(crate) struct ChainCursor {
    coeffs: (f64, f64, f64),
    prev: (f64, f64),
    cur: (f64, f64),
    k: usize,
}

impl ChainCursor {
    pub(crate) fn new(p: Probability) -> Self {
        let p = p.get();
        Self {
            coeffs: (1.0 - p, p * (1.0 - p), p * p),
            prev: (1.0, 0.0),
            cur: (1.0, 0.0),
            k: 0,
        }
    }

    #[cfg(test)]
    /// Index of the value returned by [`ChainCursor::current`].
    pub(crate) fn index(&self) -> usize {
        self.k
    }

    pub(crate) fn current(&self) -> (f64, f64) {
        if self.k == 0 {
            self.prev
        } else {
            self.cur
        }
    }

    pub(crate) fn advance(&mut self) {
        if self.k >= 1 {
            let (c1, c2, p2) = self.coeffs;
            let next = (
                c1 * self.cur.0 + c2 * self.prev.0,
                p2 + c1 * self.cur.1 + c2 * self.prev.1,
            );
            self.prev = self.cur;
            self.cur = next;
        }
        self.k += 1;
    }
}

/// Roots and Binet coefficients of the `a_k` recurrence, and the decay rates
/// used by the tail bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConstants {
    /// Dominant root `(1 − p + sqrt((1 − p)(1 + 3p)))/2`.
    pub lambda1: f64,
    /// Negative root, `−p(1 − p)/λ₁`.
    pub lambda2: f64,
    /// `1 − λ₁ = p²/(1 − λ₂)`, kept separately to avoid cancellation.
    pub one_minus_lambda1: f64,
    pub c1: f64,
    pub c2: f64,
    /// `log(1/sqrt(1 − p²))`.
    pub alpha: f64,
    /// `log(1/λ₁)`.
    pub alpha_prime: f64,
}

pub fn spectral_constants(p: Probability) -> SpectralConstants {
    let p = p.get();
    let q = 1.0 - p;
    let lambda1 = (q + libm::sqrt(q * (1.0 + 3.0 * p))) / 2.0;
    let lambda2 = -p * q / lambda1;
    let one_minus_lambda1 = p * p / (1.0 - lambda2);
    let gap = lambda1 - lambda2;
    SpectralConstants {
        lambda1,
        lambda2,
        one_minus_lambda1,
        c1: (1.0 - lambda2) / gap,
        c2: -one_minus_lambda1 / gap,
        alpha: -0.5 * libm::log(one_minus_sq(p)),
        alpha_prime: -libm::log1p(-one_minus_lambda1),
    }
}

impl SpectralConstants {
    /// `C₁λ₁^k + C₂λ₂^k`.
    pub fn chain_prob(&self, k: usize) -> f64 {
        let k = k as u64;
        self.c1 * powu(self.lambda1, k) + self.c2 * powu(self.lambda2, k)
    }
}

/// `a_k` from the closed form.
pub fn chain_prob_closed(p: Probability, k: usize) -> f64 {
    spectral_constants(p).chain_prob(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prob(p: f64) -> Probability {
        Probability::new(p).unwrap()
    }

    #[test]
    fn table_examples_at_one_half() {
        let t = chain_prob_table(prob(0.5), 10);
        assert_eq!(t.max_k(), 10);
        assert_eq!(t.get(0), 1.0);
        assert_eq!(t.get(1), 1.0);
        assert_eq!(t.get(2), 0.75);
        assert_eq!(t.get(3), 0.625);
        assert_eq!(t.get(4), 0.5);
        assert_eq!(t.get(8), 55.0 / 256.0);
        assert_eq!(t.get(10), 144.0 / 1024.0);
    }

    #[test]
    fn fibonacci_identity() {
        // a_k = Fib(k + 2) / 2^k at p = 1/2
        let t = chain_prob_table(prob(0.5), 60);
        let (mut f0, mut f1) = (1u64, 1u64); // Fib(1), Fib(2)
        for k in 0..=60 {
            assert_eq!(t.get(k), f1 as f64 / libm::pow(2.0, k as f64));
            (f0, f1) = (f1, f0 + f1);
        }
    }

    #[test]
    fn tiny_tables() {
        assert_eq!(chain_prob_table(prob(0.3), 0).values(), &[1.0]);
        assert_eq!(chain_prob_table(prob(0.3), 1).values(), &[1.0, 1.0]);
        let mut t = chain_prob_table(prob(0.3), 0);
        t.extend_to(2);
        assert!((t.get(2) - (1.0 - 0.09)).abs() < 1e-15);
    }

    #[test]
    fn complements_track_values() {
        let t = chain_prob_table(prob(1e-4), 500);
        for k in 0..=500 {
            assert!((t.get(k) + t.complement(k) - 1.0).abs() < 1e-14);
        }
        // 1 − a_2 = p² exactly
        assert_eq!(t.complement(2), 1e-8);
    }

    #[test]
    fn cursor_matches_table() {
        let p = prob(0.27);
        let t = chain_prob_table(p, 100);
        let mut c = ChainCursor::new(p);
        for k in 0..=100 {
            assert_eq!(c.index(), k);
            assert_eq!(c.current(), (t.get(k), t.complement(k)));
            c.advance();
        }
    }

    #[test]
    fn closed_form_small_k() {
        for i in 1..20 {
            let p = prob(i as f64 / 20.0);
            assert!((chain_prob_closed(p, 0) - 1.0).abs() < 1e-14);
            assert!((chain_prob_closed(p, 1) - 1.0).abs() < 1e-14);
        }
        assert!((chain_prob_closed(prob(0.5), 10) - 0.140625).abs() < 1e-15);
    }

    #[test]
    fn spectral_examples_at_one_half() {
        let s = spectral_constants(prob(0.5));
        let phi = (1.0 + libm::sqrt(5.0)) / 2.0;
        assert!((s.lambda1 - phi / 2.0).abs() < 1e-15);
        assert!((s.alpha - 0.1438).abs() < 1e-4);
        assert!((1.0 / s.alpha - 6.95).abs() < 5e-3);
        assert!((s.alpha_prime - 0.212).abs() < 1e-3);
    }

    #[test]
    fn spectral_invariants() {
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let s = spectral_constants(prob(p));
            assert!(s.lambda2 < 0.0 && 0.0 < s.lambda1 && s.lambda1 < 1.0);
            assert!((s.lambda1 + s.lambda2 - (1.0 - p)).abs() < 1e-15);
            assert!((s.lambda1 * s.lambda2 + p * (1.0 - p)).abs() < 1e-15);
            assert!((s.c1 + s.c2 - 1.0).abs() < 1e-14);
            assert!((s.c1 * s.lambda1 + s.c2 * s.lambda2 - 1.0).abs() < 1e-14);
            assert!((s.one_minus_lambda1 - (1.0 - s.lambda1)).abs() < 1e-15);
            assert!(s.alpha > 0.0 && s.alpha_prime > 0.0 && s.alpha < s.alpha_prime);
        }
    }

    #[test]
    fn small_p_expansion_of_lambda1() {
        // λ₁ − (1 − p²) = O(p³)
        for &p in &[1e-1, 3e-2, 1e-2, 3e-3, 1e-3] {
            let s = spectral_constants(prob(p));
            let gap = (s.one_minus_lambda1 - p * p).abs();
            assert!(gap <= 2.0 * p * p * p, "p={p} gap={gap}");
        }
    }
}
