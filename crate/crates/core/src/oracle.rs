//! Brute-force ground truth: exact distributions for small `N` by a weighted
//! sum over all `2^(N+1)` subsets.
//!
//! Enumeration only records integer counts indexed by `|A|`; the probability
//! weight `p^|A| (1 − p)^(N + 1 − |A|)` is applied at the end. Partial counts
//! over disjoint ranges of subsets therefore merge exactly, whatever the
//! partition.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::model::{compute_sumset_into, Params, Probability, SubsetSample, SumsetMask, Variable};
use crate::numeric::{powu, NeumaierSum};

/// Largest `N` accepted by the enumerators (`2^23` subsets).
pub const MAX_ORACLE_N: usize = 22;

/// Largest chain length accepted by [`exact_chain_prob`].
pub const MAX_CHAIN_K: usize = 24;

fn check_n(n_max: usize) -> Result<()> {
    if n_max > MAX_ORACLE_N {
        return Err(Error::ResourceLimit {
            what: "oracle N",
            requested: n_max as u128,
            limit: MAX_ORACLE_N as u128,
        });
    }
    Ok(())
}

/// Probability mass function on `0, 1, ..., len − 1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Pmf {
    pub probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    /// `P(X = v)`, zero outside the support.
    pub fn get(&self, v: usize) -> f64 {
        self.probs.get(v).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().copied().collect::<NeumaierSum>().value()
    }

    /// `E[X^k]`, with `0^0 = 1`.
    pub fn moment(&self, k: u32) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(v, &pr)| powu(v as f64, k as u64) * pr)
            .collect::<NeumaierSum>()
            .value()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// `P(X >= n)`.
    pub fn tail(&self, n: usize) -> f64 {
        self.probs
            .iter()
            .skip(n)
            .copied()
            .collect::<NeumaierSum>()
            .value()
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: usize) -> f64 {
        self.probs
            .iter()
            .take(x.saturating_add(1))
            .copied()
            .collect::<NeumaierSum>()
            .value()
    }
}

/// `(a ∗ b)(m) = Σ_y a(y) b(m − y)`.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![NeumaierSum::new(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j].add(x * y);
        }
    }
    out.into_iter().map(|s| s.value()).collect()
}

/// `max_m |a(m) − b(m)|`, treating missing entries as zero.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    (0..a.len().max(b.len()))
        .map(|i| (a.get(i).unwrap_or(&0.0) - b.get(i).unwrap_or(&0.0)).abs())
        .fold(0.0, f64::max)
}

/// Subset counts by `(|A|, value)` for each variable, plus the joint of
/// `(Ỹ, Z̃)`, over some range of subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationCounts {
    n_max: usize,
    // [variable][popcount][value]
    marginal: [Vec<Vec<u64>>; 5],
    // [popcount][ỹ * stride + z̃]
    joint: Vec<Vec<u64>>,
    stride: usize,
}

impl EnumerationCounts {
    pub fn new(n_max: usize) -> Result<Self> {
        check_n(n_max)?;
        let sizes = Variable::ALL.map(|v| v.max_value(n_max) + 1);
        let stride = Variable::ZTilde.max_value(n_max) + 1;
        let rows = n_max + 2;
        Ok(Self {
            n_max,
            marginal: sizes.map(|s| vec![vec![0; s]; rows]),
            joint: vec![vec![0; (Variable::YTilde.max_value(n_max) + 1) * stride]; rows],
            stride,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of subsets recorded so far.
    pub fn subsets(&self) -> u64 {
        self.marginal[0].iter().flatten().sum()
    }

    /// Counts the subsets whose bit masks lie in `lo..hi`.
    pub fn enumerate_range(n_max: usize, lo: u64, hi: u64) -> Result<Self> {
        let mut counts = Self::new(n_max)?;
        let end = 1u64 << (n_max + 1);
        if lo > hi || hi > end {
            return Err(domain!("mask range {lo}..{hi} outside 0..{end}"));
        }
        let mut sample = SubsetSample::empty(n_max);
        let mut sumset = SumsetMask::empty(n_max);
        for mask in lo..hi {
            sample.bits_mut().words_mut()[0] = mask;
            compute_sumset_into(&sample, &mut sumset);
            let mc = sumset.missing();
            let k = mask.count_ones() as usize;
            for (slot, var) in Variable::ALL.iter().enumerate() {
                counts.marginal[slot][k][mc.get(*var)] += 1;
            }
            counts.joint[k][mc.y_tilde * counts.stride + mc.z_tilde] += 1;
        }
        Ok(counts)
    }

    /// Adds counts from a disjoint range.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if other.n_max != self.n_max {
            return Err(domain!("cannot merge counts for N = {} into N = {}", other.n_max, self.n_max));
        }
        for (mine, theirs) in self.marginal.iter_mut().zip(&other.marginal) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            }
        }
        for (a, b) in self.joint.iter_mut().zip(&other.joint) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        Ok(())
    }

    /// Applies the Bernoulli(p) weights. The counts must cover every subset.
    pub fn into_distribution(self, p: Probability) -> Result<ExactDistribution> {
        let total = 1u64 << (self.n_max + 1);
        if self.subsets() != total {
            return Err(domain!("counts cover {} of {total} subsets", self.subsets()));
        }
        let p = p.get();
        let weights: Vec<f64> = (0..=self.n_max + 1)
            .map(|k| powu(p, k as u64) * powu(1.0 - p, (self.n_max + 1 - k) as u64))
            .collect();
        let weigh = |rows: &[Vec<u64>]| -> Vec<f64> {
            let width = rows[0].len();
            (0..width)
                .map(|v| {
                    rows.iter()
                        .zip(&weights)
                        .map(|(row, w)| row[v] as f64 * w)
                        .collect::<NeumaierSum>()
                        .value()
                })
                .collect()
        };
        let [y, z, w, y_tilde, z_tilde] = self.marginal.each_ref().map(|rows| Pmf::new(weigh(rows)));
        let flat = weigh(&self.joint);
        let joint_tilde = flat.chunks(self.stride).map(<[f64]>::to_vec).collect();
        Ok(ExactDistribution {
            params: Params::with_probability(Probability::new(p)?, self.n_max),
            y,
            z,
            w,
            y_tilde,
            z_tilde,
            joint_tilde,
        })
    }
}

/// Exact laws of the missing counts at one `(p, N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    pub params: Params,
    pub y: Pmf,
    pub z: Pmf,
    pub w: Pmf,
    pub y_tilde: Pmf,
    pub z_tilde: Pmf,
    /// `joint_tilde[a][b] = P(Ỹ = a, Z̃ = b)`.
    pub joint_tilde: Vec<Vec<f64>>,
}

impl ExactDistribution {
    pub fn pmf(&self, var: Variable) -> &Pmf {
        match var {
            Variable::Y => &self.y,
            Variable::Z => &self.z,
            Variable::W => &self.w,
            Variable::YTilde => &self.y_tilde,
            Variable::ZTilde => &self.z_tilde,
        }
    }

    /// `max_m |P(W = m) − (P_Y ∗ P_Z)(m)|`.
    pub fn convolution_discrepancy(&self) -> f64 {
        max_abs_diff(&self.w.probs, &convolve(&self.y.probs, &self.z.probs))
    }

    /// `max_{a,b} |P(Ỹ = a, Z̃ = b) − P(Ỹ = a) P(Z̃ = b)|`.
    pub fn joint_factorization_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (a, row) in self.joint_tilde.iter().enumerate() {
            for (b, &pr) in row.iter().enumerate() {
                worst = worst.max((pr - self.y_tilde.get(a) * self.z_tilde.get(b)).abs());
            }
        }
        worst
    }

    /// `E[Y − Ỹ]`.
    pub fn fringe_truncation_gap(&self) -> f64 {
        self.y.mean() - self.y_tilde.mean()
    }
}

pub fn exact_distribution(params: &Params) -> Result<ExactDistribution> {
    let n = params.n_max();
    check_n(n)?;
    EnumerationCounts::enumerate_range(n, 0, 1u64 << (n + 1))?.into_distribution(params.probability())
}

/// `E[X^k]` for `X ∈ {Y, Z, W, Ỹ, Z̃}`.
pub fn exact_moment(params: &Params, var: Variable, k: u32) -> Result<f64> {
    Ok(exact_distribution(params)?.pmf(var).moment(k))
}

/// `P(m, n ∉ A + A)` by enumerating all subsets of `{0, ..., m}`.
pub fn exact_pair_missing(m: usize, n: usize, params: &Params) -> Result<f64> {
    check_n(params.n_max())?;
    if !(n < m && m <= params.n_max()) {
        return Err(domain!("need n < m <= N, got m = {m}, n = {n}, N = {}", params.n_max()));
    }
    let p = params.p();
    let mut by_size = vec![0u64; m + 2];
    let mut sample = SubsetSample::empty(m);
    let mut sumset = SumsetMask::empty(m);
    for mask in 0..1u64 << (m + 1) {
        sample.bits_mut().words_mut()[0] = mask;
        compute_sumset_into(&sample, &mut sumset);
        if !sumset.contains(m) && !sumset.contains(n) {
            by_size[mask.count_ones() as usize] += 1;
        }
    }
    Ok(by_size
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 * powu(p, k as u64) * powu(1.0 - p, (m + 1 - k) as u64))
        .collect::<NeumaierSum>()
        .value())
}

/// `P(n ∉ A + A)` by enumeration.
pub fn exact_missing_prob(n: usize, params: &Params) -> Result<f64> {
    let top = 2 * params.n_max();
    if n > top {
        return Err(domain!("position {n} outside [0, {top}]"));
    }
    check_n(params.n_max())?;
    let big_n = params.n_max();
    let p = params.p();
    let mut by_size = vec![0u64; big_n + 2];
    let mut sample = SubsetSample::empty(big_n);
    let mut sumset = SumsetMask::empty(big_n);
    for mask in 0..1u64 << (big_n + 1) {
        sample.bits_mut().words_mut()[0] = mask;
        compute_sumset_into(&sample, &mut sumset);
        if !sumset.contains(n) {
            by_size[mask.count_ones() as usize] += 1;
        }
    }
    Ok(by_size
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 * powu(p, k as u64) * powu(1.0 - p, (big_n + 1 - k) as u64))
        .collect::<NeumaierSum>()
        .value())
}

/// Probability that a length-`k` Bernoulli(p) bit string has no two adjacent
/// ones, by enumeration.
pub fn exact_chain_prob(p: Probability, k: usize) -> Result<f64> {
    if k > MAX_CHAIN_K {
        return Err(Error::ResourceLimit {
            what: "chain length",
            requested: k as u128,
            limit: MAX_CHAIN_K as u128,
        });
    }
    let p = p.get();
    let mut by_size = vec![0u64; k + 1];
    for mask in 0..1u64 << k {
        if mask & (mask >> 1) == 0 {
            by_size[mask.count_ones() as usize] += 1;
        }
    }
    Ok(by_size
        .iter()
        .enumerate()
        .map(|(j, &c)| c as f64 * powu(p, j as u64) * powu(1.0 - p, (k - j) as u64))
        .collect::<NeumaierSum>()
        .value())
}
