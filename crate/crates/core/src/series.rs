//! Second-moment machinery: the floor-geometric lemma, wedge constants, the
//! exact `N → ∞` limit of `E[Y²]` as a single series over the twist degree,
//! its small-`p` leading order, and the derived variance quantities.
//!
//! Writing `T_l` for the wedge term
//!
//! ```text
//!         a_{2l} + (1−p) a_{l−1} + (1−p) a_l a_{2l} + (1−p)² a_l a_{l−1}
//!   T_l = --------------------------------------------------------------
//!                       (1 − a_{2l+2}) (1 − a_{2l})
//! ```
//!
//! the limit is `E[Y²]_∞ = −(2/p² − 1/p − 1) + 2 Σ_{l≥1} T_l`. Every `T_l` is
//! positive, and `a_k <= λ₁^{k−1}` gives the tail majorant
//! `Σ_{l>L} T_l <= 4 λ₁^{L−1} / ((1 − λ₁)(1 − λ₁^{2L+1})²)`.

use crate::chains::{spectral_constants, ChainCursor, ChainProbTable, SpectralConstants};
use crate::error::{domain, Error, Result};
use crate::exact::{expected_missing_left, expected_missing_left_limit};
use crate::model::{Params, Probability};
use crate::numeric::{half_power, one_minus_sq, powu, NeumaierSum};
use crate::orbits::PairProbEvaluator;

/// Hard cap on the number of wedge terms a limit evaluation may sum.
pub const MAX_SERIES_TERMS: u64 = 1_000_000_000;

/// A truncated positive series: the true value lies in
/// `[value, value + remainder_bound]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    /// Index of the last term included.
    pub truncation_l: u64,
    pub remainder_bound: f64,
}

/// `Σ_{n≥0} α^n β^{⌊((l−1)n + k)/l⌋}` in closed form, for `|α|, |β| < 1` and
/// `0 <= k < l`.
pub fn floor_geometric_sum(alpha: f64, beta: f64, k: u64, l: u64) -> Result<f64> {
    if !(libm::fabs(alpha) < 1.0 && libm::fabs(beta) < 1.0) {
        return Err(domain!("need |alpha| < 1 and |beta| < 1, got {alpha}, {beta}"));
    }
    if k >= l {
        return Err(domain!("need 0 <= k < l, got k = {k}, l = {l}"));
    }
    let ab = alpha * beta;
    let tail = powu(alpha, k + 1) * powu(beta, k) * (1.0 - beta)
        / (1.0 - powu(alpha, l) * powu(beta, l - 1));
    Ok((1.0 + tail) / (1.0 - ab))
}

/// `U_l = a_{2l}^l / a_{2l+2}^{l−1}` and `V_l = a_{2l+2}^l / a_{2l}^{l+1}`.
///
/// For odd `m`, `n` with twist degree `l`,
/// `P(m, n ∉ A + A) = U_l^{(m+1)/2} V_l^{(n+1)/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeConstants {
    pub u: f64,
    pub v: f64,
    pub log_u: f64,
    pub log_v: f64,
    l: usize,
    log_lo: f64,
    log_hi: f64,
}

impl WedgeConstants {
    /// `U_l^{(m+1)/2} V_l^{(n+1)/2}`, evaluated in log space.
    ///
    /// The exponents of `a_{2l}` and `a_{2l+2}` are combined in integers
    /// first, so the O(l) cancellation inside `log U_l`, `log V_l` never
    /// reaches floating point.
    pub fn pair_factor(&self, m: usize, n: usize) -> f64 {
        let (a, b, l) = ((m + 1) as i128, (n + 1) as i128, self.l as i128);
        let (e_lo, e_hi) = (a * l - b * (l + 1), b * l - a * (l - 1));
        if e_lo % 2 == 0 && e_hi % 2 == 0 {
            libm::exp((e_lo / 2) as f64 * self.log_lo + (e_hi / 2) as f64 * self.log_hi)
        } else {
            libm::exp(e_lo as f64 / 2.0 * self.log_lo + e_hi as f64 / 2.0 * self.log_hi)
        }
    }
}

pub fn wedge_constants(p: Probability, l: usize) -> Result<WedgeConstants> {
    if l < 1 {
        return Err(domain!("wedge index must be >= 1"));
    }
    let table = ChainProbTable::new(p, 2 * l + 2);
    let (ln_lo, ln_hi) = (libm::log(table.get(2 * l)), libm::log(table.get(2 * l + 2)));
    let lf = l as f64;
    let log_u = lf * ln_lo - (lf - 1.0) * ln_hi;
    let log_v = lf * ln_hi - (lf + 1.0) * ln_lo;
    Ok(WedgeConstants {
        u: libm::exp(log_u),
        v: libm::exp(log_v),
        log_u,
        log_v,
        l,
        log_lo: ln_lo,
        log_hi: ln_hi,
    })
}

/// `g_{m,l'} = ⌊(m + 1)(l' − 1)/l'⌋`: for `n < m`, the twist degree is at
/// least `l'` iff `n >= g_{m,l'}`.
pub fn wedge_boundary(m: usize, l_prime: usize) -> Result<usize> {
    if l_prime < 1 {
        return Err(domain!("wedge index must be >= 1"));
    }
    Ok((m + 1) * (l_prime - 1) / l_prime)
}

fn wedge_term(p: f64, a_lm1: f64, a_l: f64, a_2l: (f64, f64), a_2l2_complement: f64) -> f64 {
    let q = 1.0 - p;
    let numer = a_2l.0 + q * a_lm1 + q * a_l * a_2l.0 + q * q * a_l * a_lm1;
    numer / (a_2l2_complement * a_2l.1)
}

/// Bound on `Σ_{l > L} T_l`.
fn wedge_tail_bound(s: &SpectralConstants, last_l: u64) -> f64 {
    let l = last_l as f64;
    let decay = libm::exp(-(l - 1.0) * s.alpha_prime);
    let gap = -libm::expm1(-(2.0 * l + 1.0) * s.alpha_prime);
    4.0 * decay / (s.one_minus_lambda1 * gap * gap)
}

/// `Σ_{l=1}^{L} T_l`.
pub fn wedge_partial_sum(p: Probability, last_l: usize) -> Result<f64> {
    if last_l < 1 {
        return Err(domain!("partial sum needs L >= 1"));
    }
    let table = ChainProbTable::new(p, 2 * last_l + 2);
    let pv = p.get();
    let sum: NeumaierSum = (1..=last_l)
        .map(|l| {
            wedge_term(
                pv,
                table.get(l - 1),
                table.get(l),
                (table.get(2 * l), table.complement(2 * l)),
                table.complement(2 * l + 2),
            )
        })
        .collect();
    Ok(sum.value())
}

/// `Σ_{l≥1} T_l`, truncated once the tail majorant drops below `tol`.
pub fn wedge_series(p: Probability, tol: f64) -> Result<SeriesResult> {
    wedge_series_capped(p, tol, MAX_SERIES_TERMS)
}

pub fn wedge_series_capped(p: Probability, tol: f64, max_terms: u64) -> Result<SeriesResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(domain!("tolerance must be positive, got {tol}"));
    }
    let spectral = spectral_constants(p);
    let pv = p.get();

    // `small` walks a_{l−1}, a_l; `big` walks a_{2l}, a_{2l+2}.
    let mut small = ChainCursor::new(p);
    let mut a_lm1 = small.current().0;
    small.advance();
    let mut big = ChainCursor::new(p);
    big.advance();
    big.advance();
    let mut a_2l = big.current();
    big.advance();
    big.advance();

    let mut sum = NeumaierSum::new();
    for l in 1..=max_terms {
        let a_l = small.current().0;
        let a_2l2 = big.current();
        sum.add(wedge_term(pv, a_lm1, a_l, a_2l, a_2l2.1));
        let remainder = wedge_tail_bound(&spectral, l);
        if remainder < tol {
            return Ok(SeriesResult {
                value: sum.value(),
                truncation_l: l,
                remainder_bound: remainder,
            });
        }
        a_lm1 = a_l;
        small.advance();
        a_2l = a_2l2;
        big.advance();
        big.advance();
    }
    Err(Error::NoConvergence(max_terms))
}

/// `lim_{N→∞} E[Y²]` with a rigorous truncation bound below `tol`.
pub fn second_moment_limit(p: Probability, tol: f64) -> Result<SeriesResult> {
    // E[Y²] = −E[Y] + 2 S, so the wedge series needs half the tolerance.
    let wedges = wedge_series(p, tol / 2.0)?;
    Ok(SeriesResult {
        value: 2.0 * wedges.value - expected_missing_left_limit(p),
        truncation_l: wedges.truncation_l,
        remainder_bound: 2.0 * wedges.remainder_bound,
    })
}

/// `f(p, L) = p⁴ Σ_{l=1}^{L} T_l`, nondecreasing in `L`; tends to
/// `Σ_{l≤L} 4/(4l² − 1) = 2 − 2/(2L + 1)` as `p → 0`.
pub fn second_moment_partial(p: Probability, last_l: usize) -> Result<f64> {
    let p4 = powu(p.get(), 4);
    Ok(p4 * wedge_partial_sum(p, last_l)?)
}

/// `4/p⁴ − 2/p² + 1/p + 1`.
pub fn leading_order_approx(p: Probability) -> f64 {
    let p = p.get();
    4.0 / powu(p, 4) - 2.0 / (p * p) + 1.0 / p + 1.0
}

/// `Σ_{n>N} (2n + 1) q^{n+1}` with `q = sqrt(1 − p²)`, summed in closed form:
/// `q^{N+2} ((2N + 3)/(1 − q) + 2q/(1 − q)²)`.
///
/// Bounds `E[Y²]_∞ − E[Y²]_N`.
pub fn tail_remainder_bound(p: Probability, n_max: u64) -> f64 {
    let pv = p.get();
    let q = libm::sqrt(one_minus_sq(pv));
    let one_minus_q = pv * pv / (1.0 + q);
    let n = n_max as f64;
    half_power(pv, n_max + 2) * ((2.0 * n + 3.0) / one_minus_q + 2.0 * q / (one_minus_q * one_minus_q))
}

/// Rough `N` at which `E[Y²]_N` is within `eps` of its limit:
/// `⌈8|log p|/p² + 2|log(eps/8)|/p²⌉`.
pub fn n_for_tolerance(p: Probability, eps: f64) -> Result<u64> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(domain!("tolerance must be positive, got {eps}"));
    }
    let pv = p.get();
    let n = (8.0 * libm::fabs(libm::log(pv)) + 2.0 * libm::fabs(libm::log(eps / 8.0))) / (pv * pv);
    Ok(libm::ceil(n) as u64)
}

/// `Var(Y)` and `Var(Y)/E[Y]²` in the `N → ∞` limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceLimit {
    pub variance: f64,
    pub ratio: f64,
    pub second_moment: SeriesResult,
}

pub fn variance_limit(p: Probability, tol: f64) -> Result<VarianceLimit> {
    let second_moment = second_moment_limit(p, tol)?;
    let mean = expected_missing_left_limit(p);
    let variance = second_moment.value - mean * mean;
    Ok(VarianceLimit {
        variance,
        ratio: variance / (mean * mean),
        second_moment,
    })
}

/// `lim_{N→∞} E[W²] = 2 E[Y²]_∞ + 2 (E[Y]_∞)²`.
pub fn total_second_moment_limit(p: Probability, tol: f64) -> Result<f64> {
    let mean = expected_missing_left_limit(p);
    Ok(2.0 * second_moment_limit(p, tol / 2.0)?.value + 2.0 * mean * mean)
}

/// Exact `E[Y²]` at finite `N` through indicator pairs:
/// `E[Y]_N + 2 Σ_{0<=n<m<=N} P(m, n ∉ A + A)`.
pub fn second_moment_double_sum(params: &Params) -> f64 {
    let n_max = params.n_max();
    let eval = PairProbEvaluator::new(params.probability(), n_max);
    let mut pairs = NeumaierSum::new();
    for m in 1..=n_max {
        for n in 0..m {
            pairs.add(eval.prob(m, n).expect("pair within evaluator range"));
        }
    }
    expected_missing_left(params) + 2.0 * pairs.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbits::{pair_missing_prob, twist_degree};

    fn prob(p: f64) -> Probability {
        Probability::new(p).unwrap()
    }

    fn floor_geometric_direct(alpha: f64, beta: f64, k: u64, l: u64) -> f64 {
        let mut sum = NeumaierSum::new();
        let mut n = 0u64;
        loop {
            let term = libm::pow(alpha, n as f64) * libm::pow(beta, (((l - 1) * n + k) / l) as f64);
            sum.add(term);
            if libm::pow(libm::fabs(alpha), n as f64) < 1e-18 {
                return sum.value();
            }
            n += 1;
        }
    }

    #[test]
    fn floor_geometric_examples() {
        assert_eq!(floor_geometric_sum(0.0, 0.3, 2, 5).unwrap(), 1.0);
        let v = floor_geometric_sum(0.5, 0.5, 1, 2).unwrap();
        assert!((v - 10.0 / 7.0).abs() < 1e-15);
        assert!((floor_geometric_direct(0.5, 0.5, 1, 2) - 10.0 / 7.0).abs() < 1e-14);
        let near = floor_geometric_sum(0.4, 1.0 - 1e-12, 3, 7).unwrap();
        assert!((near - 1.0 / 0.6).abs() < 1e-9);
        // l = 1 forces k = 0 and a constant exponent
        assert!((floor_geometric_sum(0.3, 0.9, 0, 1).unwrap() - 1.0 / 0.7).abs() < 1e-15);
    }

    #[test]
    fn floor_geometric_domain() {
        assert!(floor_geometric_sum(1.0, 0.5, 0, 2).is_err());
        assert!(floor_geometric_sum(0.5, -1.0, 0, 2).is_err());
        assert!(floor_geometric_sum(0.5, 0.5, 2, 2).is_err());
        assert!(floor_geometric_sum(0.5, 0.5, 0, 0).is_err());
    }

    #[test]
    fn wedge_constants_at_one_half() {
        let w = wedge_constants(prob(0.5), 1).unwrap();
        assert!((w.u - 0.75).abs() < 1e-15);
        assert!((w.v - 8.0 / 9.0).abs() < 1e-15);
        assert!(wedge_constants(prob(0.5), 0).is_err());
    }

    #[test]
    fn wedge_constants_definitional_identity() {
        for &p in &[0.1, 0.5, 0.8] {
            let t = ChainProbTable::new(prob(p), 42);
            for l in 1..20usize {
                let w = wedge_constants(prob(p), l).unwrap();
                let (lo, hi) = (t.get(2 * l), t.get(2 * l + 2));
                let lhs = w.u * w.v * powu(hi, l as u64 - 1) * powu(lo, l as u64 + 1);
                let rhs = powu(lo, l as u64) * powu(hi, l as u64);
                assert!((lhs - rhs).abs() <= 1e-12 * rhs, "p={p} l={l}");
                assert!(w.u > 0.0 && w.u < 1.0 && w.v > 0.0 && w.v < 1.0, "p={p} l={l}");
            }
        }
    }

    #[test]
    fn wedge_identity_for_odd_pairs() {
        for &p in &[0.3, 0.5, 0.7] {
            let params = Params::new(p, 200).unwrap();
            for m in (1..=200).step_by(2) {
                for n in (1..m).step_by(2) {
                    let l = twist_degree(m, n).unwrap();
                    let w = wedge_constants(prob(p), l).unwrap();
                    let exact = pair_missing_prob(m, n, &params).unwrap();
                    let via = w.pair_factor(m, n);
                    assert!((via - exact).abs() <= 1e-12 * exact, "({m},{n}) p={p}");
                }
            }
        }
    }

    #[test]
    fn wedge_boundary_matches_twist_degree() {
        assert_eq!(wedge_boundary(17, 4).unwrap(), 13);
        assert_eq!(wedge_boundary(5, 1).unwrap(), 0);
        assert!(wedge_boundary(5, 0).is_err());
        for m in 1..=200 {
            for n in 0..m {
                let l = twist_degree(m, n).unwrap();
                for lp in 1..=l + 2 {
                    assert_eq!(l >= lp, n >= wedge_boundary(m, lp).unwrap(), "m={m} n={n} l'={lp}");
                }
            }
        }
    }

    #[test]
    fn partial_sums_pointwise_limit() {
        let f1 = second_moment_partial(prob(1e-3), 1).unwrap();
        assert!((f1 - 4.0 / 3.0).abs() < 1e-2, "{f1}");
        for last in 1..=10usize {
            let f = second_moment_partial(prob(1e-4), last).unwrap();
            let want = 2.0 - 2.0 / (2.0 * last as f64 + 1.0);
            assert!((f - want).abs() < 1e-2, "L={last} f={f} want={want}");
        }
        assert!(second_moment_partial(prob(0.5), 0).is_err());
    }

    #[test]
    fn partial_sums_nondecreasing() {
        for &p in &[0.05, 0.3, 0.9] {
            let mut prev = 0.0;
            for last in 1..200 {
                let f = second_moment_partial(prob(p), last).unwrap();
                assert!(f >= prev);
                prev = f;
            }
        }
    }

    #[test]
    fn series_remainder_covers_doubled_truncation() {
        for &p in &[0.1, 0.3, 0.5, 0.8] {
            let r = wedge_series(prob(p), 1e-6).unwrap();
            let deeper = wedge_partial_sum(prob(p), 2 * r.truncation_l as usize).unwrap();
            let gained = deeper - r.value;
            assert!(gained >= -1e-12 && gained <= r.remainder_bound, "p={p}");
            assert!(r.remainder_bound < 1e-6);
        }
    }

    #[test]
    fn streaming_series_matches_table_partial_sum() {
        let p = prob(0.37);
        let r = wedge_series(p, 1e-12).unwrap();
        let direct = wedge_partial_sum(p, r.truncation_l as usize).unwrap();
        assert!((r.value - direct).abs() < 1e-13 * direct);
    }

    #[test]
    fn second_moment_at_one_half() {
        let r = second_moment_limit(prob(0.5), 1e-10).unwrap();
        assert!(r.remainder_bound < 1e-10);
        assert!(r.value >= 25.0);
        let finite = second_moment_double_sum(&Params::new(0.5, 300).unwrap());
        assert!((r.value - finite).abs() < 1e-9, "{} vs {}", r.value, finite);
        assert!(second_moment_limit(prob(0.5), 0.0).is_err());
        assert!(matches!(
            wedge_series_capped(prob(0.01), 1e-12, 10),
            Err(Error::NoConvergence(10))
        ));
    }

    #[test]
    fn leading_order_examples() {
        assert_eq!(leading_order_approx(prob(0.5)), 59.0);
        let p = 0.02;
        let approx = leading_order_approx(prob(p));
        let lead = 4.0 / powu(p, 4);
        assert!(((approx - lead) / lead).abs() < 1e-3);
    }

    #[test]
    fn tail_remainder_closed_form() {
        for &p in &[0.3, 0.5] {
            let q = libm::sqrt(1.0 - p * p);
            for &n in &[10u64, 100, 400] {
                let mut direct = NeumaierSum::new();
                let mut k = n + 1;
                loop {
                    let term = (2 * k + 1) as f64 * libm::pow(q, (k + 1) as f64);
                    direct.add(term);
                    if term < 1e-20 * direct.value() {
                        break;
                    }
                    k += 1;
                }
                let closed = tail_remainder_bound(prob(p), n);
                assert!((closed - direct.value()).abs() <= 1e-12 * direct.value(), "p={p} N={n}");
            }
            let mut prev = f64::INFINITY;
            for n in 0..500 {
                let b = tail_remainder_bound(prob(p), n);
                assert!(b < prev);
                prev = b;
            }
        }
    }

    #[test]
    fn n_for_tolerance_examples() {
        assert_eq!(n_for_tolerance(prob(0.5), 0.01).unwrap(), 76);
        assert!(n_for_tolerance(prob(0.5), 0.0).is_err());
        assert!(n_for_tolerance(prob(0.5), 0.1).unwrap() < n_for_tolerance(prob(0.5), 0.001).unwrap());
        assert!(n_for_tolerance(prob(0.1), 0.01).unwrap() > n_for_tolerance(prob(0.2), 0.01).unwrap());
    }

    #[test]
    fn n_for_tolerance_is_roughly_calibrated() {
        // the formula is approximate; the tail at N_eps stays within a small
        // multiple of eps on this grid (worst observed ratio is about 23)
        for &p in &[0.1, 0.2, 0.3, 0.5, 0.7] {
            for &eps in &[1e-1, 1e-2, 1e-4, 1e-6] {
                let n = n_for_tolerance(prob(p), eps).unwrap();
                assert!(tail_remainder_bound(prob(p), n) <= 32.0 * eps, "p={p} eps={eps}");
            }
        }
    }

    #[test]
    fn variance_quantities() {
        let v = variance_limit(prob(0.5), 1e-10).unwrap();
        assert!(v.variance > 0.0);
        let mut prev = f64::INFINITY;
        for &p in &[0.32, 0.16, 0.08, 0.05] {
            let r = variance_limit(prob(p), 1e-8).unwrap().ratio;
            assert!(r < prev, "p={p}");
            prev = r;
        }
        // the limit ratio at p = 0.05 is about 0.0507
        let r = variance_limit(prob(0.05), 1e-8).unwrap().ratio;
        assert!((r - 0.0507).abs() < 1e-3, "{r}");
    }

    #[test]
    fn total_second_moment() {
        let e2 = second_moment_limit(prob(0.5), 1e-12).unwrap().value;
        let w2 = total_second_moment_limit(prob(0.5), 1e-10).unwrap();
        assert!((w2 - (2.0 * e2 + 50.0)).abs() < 1e-9);
        let p = 0.02;
        let scaled = powu(p, 4) * total_second_moment_limit(prob(p), 1e-6).unwrap();
        assert!((scaled - 16.0).abs() < 1.6, "{scaled}");
    }
}
