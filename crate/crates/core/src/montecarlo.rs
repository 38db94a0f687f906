//! Seeded, shardable Monte Carlo engine.
//!
//! Trial `t` draws its subset from `ChaCha8` keyed by `seed` on stream `t`,
//! so every trial is reproducible on its own and the shard layout has no
//! effect on the result. Shards cover contiguous trial ranges and their
//! integer histograms merge by addition.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{domain, Error, Result};
use crate::model::{compute_sumset_into, Params, SubsetSample, SumsetMask, Variable};
use crate::oracle::{convolve, max_abs_diff};

/// Default cap on `trials · (N + 1)` random draws.
pub const DEFAULT_WORK_BUDGET: u128 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub params: Params,
    pub trials: u64,
    pub seed: u64,
    pub shards: u64,
}

impl McConfig {
    pub fn new(params: Params, trials: u64, seed: u64, shards: u64) -> Result<Self> {
        let config = Self {
            params,
            trials,
            seed,
            shards,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(domain!("trials must be positive"));
        }
        if self.shards == 0 || self.shards > self.trials {
            return Err(domain!("shards must lie in 1..={}, got {}", self.trials, self.shards));
        }
        Ok(())
    }

    /// Random draws needed by the whole run.
    pub fn work(&self) -> u128 {
        self.trials as u128 * (self.params.n_max() as u128 + 1)
    }
}

/// Dense integer histogram on `0, ..., len − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Histogram {
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(len: usize) -> Self {
        Self { counts: vec![0; len] }
    }

    pub fn record(&mut self, v: usize) {
        self.counts[v] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &Self) {
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
    }

    /// `Σ v^k · count(v)`, exact.
    pub fn power_sum(&self, k: u32) -> u128 {
        self.counts
            .iter()
            .enumerate()
            .map(|(v, &c)| (v as u128).pow(k) * c as u128)
            .sum()
    }

    pub fn moment(&self, k: u32) -> f64 {
        self.power_sum(k) as f64 / self.total() as f64
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// Relative frequencies.
    pub fn frequencies(&self) -> Vec<f64> {
        let m = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / m).collect()
    }

    /// Number of recorded values `>= n`.
    pub fn count_at_least(&self, n: usize) -> u64 {
        self.counts.iter().skip(n).sum()
    }
}

/// Aggregated output of a run or of a single shard.
#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub config: McConfig,
    pub y: Histogram,
    pub z: Histogram,
    pub w: Histogram,
    pub y_tilde: Histogram,
    pub z_tilde: Histogram,
    /// Per-sample `Ỹ + Z̃`.
    pub w_tilde: Histogram,
}

impl McSummary {
    pub fn empty(config: McConfig) -> Self {
        let n = config.params.n_max();
        let h = |var: Variable| Histogram::new(var.max_value(n) + 1);
        Self {
            config,
            y: h(Variable::Y),
            z: h(Variable::Z),
            w: h(Variable::W),
            y_tilde: h(Variable::YTilde),
            z_tilde: h(Variable::ZTilde),
            w_tilde: Histogram::new(Variable::YTilde.max_value(n) + Variable::ZTilde.max_value(n) + 1),
        }
    }

    pub fn histogram(&self, var: Variable) -> &Histogram {
        match var {
            Variable::Y => &self.y,
            Variable::Z => &self.z,
            Variable::W => &self.w,
            Variable::YTilde => &self.y_tilde,
            Variable::ZTilde => &self.z_tilde,
        }
    }

    /// Number of trials recorded.
    pub fn trials(&self) -> u64 {
        self.y.total()
    }

    pub fn mean(&self, var: Variable) -> f64 {
        self.histogram(var).mean()
    }

    pub fn second_moment(&self, var: Variable) -> f64 {
        self.histogram(var).moment(2)
    }

    /// Unbiased sample variance.
    pub fn variance(&self, var: Variable) -> f64 {
        let h = self.histogram(var);
        let m = h.total() as f64;
        if m < 2.0 {
            return 0.0;
        }
        let mean = h.mean();
        (h.moment(2) - mean * mean) * m / (m - 1.0)
    }

    /// Plain standard error of the sample mean.
    pub fn mean_std_error(&self, var: Variable) -> f64 {
        libm::sqrt(self.variance(var) / self.trials() as f64)
    }

    /// Plain standard error of the sample second moment.
    pub fn second_moment_std_error(&self, var: Variable) -> f64 {
        let h = self.histogram(var);
        let m = h.total() as f64;
        let m2 = h.moment(2);
        let var4 = (h.moment(4) - m2 * m2).max(0.0);
        libm::sqrt(var4 / m)
    }

    /// Adds the histograms of a summary over a disjoint set of trials.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if other.config.params != self.config.params {
            return Err(domain!("cannot merge summaries with different parameters"));
        }
        self.y.merge(&other.y);
        self.z.merge(&other.z);
        self.w.merge(&other.w);
        self.y_tilde.merge(&other.y_tilde);
        self.z_tilde.merge(&other.z_tilde);
        self.w_tilde.merge(&other.w_tilde);
        Ok(())
    }
}

/// Draws Bernoulli(p) subsets, one independent `ChaCha8` stream per trial.
#[derive(Debug, Clone)]
pub struct SubsetSampler {
    base: ChaCha8Rng,
    threshold: u128,
    n_max: usize,
}

impl SubsetSampler {
    pub fn new(params: &Params, seed: u64) -> Self {
        // bit i is set iff a uniform 64-bit draw is below round(p·2^64)
        let threshold = libm::round(params.p() * 18446744073709551616.0) as u128;
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
            threshold,
            n_max: params.n_max(),
        }
    }

    /// Fills `out` with the subset of trial `trial`.
    pub fn sample_into(&self, trial: u64, out: &mut SubsetSample) {
        let mut rng = self.base.clone();
        rng.set_stream(trial);
        let bits = out.bits_mut();
        bits.clear();
        for i in 0..=self.n_max {
            if (rng.next_u64() as u128) < self.threshold {
                bits.set(i);
            }
        }
    }

    pub fn sample(&self, trial: u64) -> SubsetSample {
        let mut out = SubsetSample::empty(self.n_max);
        self.sample_into(trial, &mut out);
        out
    }
}

/// Trial range `[start, end)` of shard `index`.
pub fn shard_range(config: &McConfig, index: u64) -> Result<(u64, u64)> {
    config.validate()?;
    if index >= config.shards {
        return Err(domain!("shard {index} out of range 0..{}", config.shards));
    }
    let (q, r) = (config.trials / config.shards, config.trials % config.shards);
    let start = index * q + index.min(r);
    let len = q + u64::from(index < r);
    Ok((start, start + len))
}

/// Runs the trials of a single shard.
pub fn run_shard(config: &McConfig, index: u64) -> Result<McSummary> {
    let (start, end) = shard_range(config, index)?;
    run_trials(config, start, end)
}

/// Runs trials `start..end` of `config`.
pub fn run_trials(config: &McConfig, start: u64, end: u64) -> Result<McSummary> {
    if start > end || end > config.trials {
        return Err(domain!("trial range {start}..{end} outside 0..{}", config.trials));
    }
    let params = &config.params;
    let sampler = SubsetSampler::new(params, config.seed);
    let mut summary = McSummary::empty(*config);
    let mut sample = SubsetSample::empty(params.n_max());
    let mut sumset = SumsetMask::empty(params.n_max());
    for trial in start..end {
        sampler.sample_into(trial, &mut sample);
        compute_sumset_into(&sample, &mut sumset);
        let mc = sumset.missing();
        summary.y.record(mc.y);
        summary.z.record(mc.z);
        summary.w.record(mc.w);
        summary.y_tilde.record(mc.y_tilde);
        summary.z_tilde.record(mc.z_tilde);
        summary.w_tilde.record(mc.y_tilde + mc.z_tilde);
    }
    Ok(summary)
}

/// Checks `config` against a cap on `trials · (N + 1)`.
pub fn check_budget(config: &McConfig, budget: u128) -> Result<()> {
    config.validate()?;
    if config.work() > budget {
        return Err(Error::ResourceLimit {
            what: "Monte Carlo draws",
            requested: config.work(),
            limit: budget,
        });
    }
    Ok(())
}

/// Runs every shard in turn on the current thread.
pub fn run_with_budget(config: &McConfig, budget: u128) -> Result<McSummary> {
    check_budget(config, budget)?;
    let mut total = McSummary::empty(*config);
    for index in 0..config.shards {
        total.merge(&run_shard(config, index)?)?;
    }
    Ok(total)
}

pub fn run(config: &McConfig) -> Result<McSummary> {
    run_with_budget(config, DEFAULT_WORK_BUDGET)
}

/// Empirical `P(Y >= n)` and its binomial standard error `sqrt(p̂(1 − p̂)/M)`.
pub fn tail_estimate(summary: &McSummary, n: usize) -> (f64, f64) {
    let m = summary.trials() as f64;
    let est = summary.y.count_at_least(n) as f64 / m;
    (est, libm::sqrt(est * (1.0 - est) / m))
}

/// `(x, P̂(Y <= x·Ȳ))` for each grid point, `Ȳ` the sample mean.
pub fn normalized_cdf(summary: &McSummary, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mean = summary.y.mean();
    if mean.is_nan() || mean <= 0.0 {
        return Err(domain!("sample mean of Y is zero"));
    }
    let m = summary.trials() as f64;
    let counts = &summary.y.counts;
    Ok(grid
        .iter()
        .map(|&x| {
            let cut = x * mean;
            let below: u64 = counts
                .iter()
                .enumerate()
                .take_while(|(v, _)| *v as f64 <= cut)
                .map(|(_, &c)| c)
                .sum();
            (x, below as f64 / m)
        })
        .collect())
}

/// `max_m |P̂(W = m) − (P̂_Y ∗ P̂_Z)(m)|`.
pub fn convolution_check(summary: &McSummary) -> f64 {
    let conv = convolve(&summary.y.frequencies(), &summary.z.frequencies());
    max_abs_diff(&summary.w.frequencies(), &conv)
}

/// The same statistic for `W̃ = Ỹ + Z̃`, whose summands are independent.
pub fn convolution_check_tilde(summary: &McSummary) -> f64 {
    let conv = convolve(&summary.y_tilde.frequencies(), &summary.z_tilde.frequencies());
    max_abs_diff(&summary.w_tilde.frequencies(), &conv)
}

/// `2 Ê[Y²]/sqrt(M)`, the random-error model used for second-moment plots.
pub fn mc_error_estimate(summary: &McSummary) -> f64 {
    2.0 * summary.second_moment(Variable::Y) / libm::sqrt(summary.trials() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::expected_missing_left;
    use crate::oracle::exact_distribution;

    fn config(p: f64, n: usize, trials: u64, seed: u64, shards: u64) -> McConfig {
        McConfig::new(Params::new(p, n).unwrap(), trials, seed, shards).unwrap()
    }

    #[test]
    fn config_validation() {
        let params = Params::new(0.5, 10).unwrap();
        assert!(McConfig::new(params, 0, 1, 1).is_err());
        assert!(McConfig::new(params, 5, 1, 0).is_err());
        assert!(McConfig::new(params, 5, 1, 6).is_err());
        assert!(McConfig::new(params, 5, 1, 5).is_ok());
    }

    #[test]
    fn shard_ranges_tile_trials() {
        let c = config(0.5, 3, 103, 1, 7);
        let mut next = 0;
        for i in 0..7 {
            let (s, e) = shard_range(&c, i).unwrap();
            assert_eq!(s, next);
            assert!(e - s == 14 || e - s == 15);
            next = e;
        }
        assert_eq!(next, 103);
        assert!(shard_range(&c, 7).is_err());
    }

    #[test]
    fn deterministic_and_shard_independent() {
        let a = run(&config(0.3, 40, 2000, 9, 1)).unwrap();
        let b = run(&config(0.3, 40, 2000, 9, 1)).unwrap();
        assert_eq!(a, b);
        let c = run(&config(0.3, 40, 2000, 9, 13)).unwrap();
        assert_eq!(a.y, c.y);
        assert_eq!(a.w, c.w);
        assert_eq!(a.w_tilde, c.w_tilde);
        let d = run(&config(0.3, 40, 2000, 10, 1)).unwrap();
        assert_ne!(a.y, d.y);
    }

    #[test]
    fn histogram_invariants() {
        let s = run(&config(0.2, 30, 3000, 5, 3)).unwrap();
        for var in Variable::ALL {
            assert_eq!(s.histogram(var).total(), 3000);
            assert_eq!(s.histogram(var).counts.len(), var.max_value(30) + 1);
        }
        assert_eq!(s.w.power_sum(1), s.y.power_sum(1) + s.z.power_sum(1));
        assert_eq!(s.w_tilde.power_sum(1), s.y_tilde.power_sum(1) + s.z_tilde.power_sum(1));
    }

    #[test]
    fn n0_mean() {
        let s = run(&config(0.5, 0, 200_000, 3, 4)).unwrap();
        let se = libm::sqrt(0.25 / 200_000.0);
        assert!((s.mean(Variable::Y) - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn threshold_matches_probability() {
        let params = Params::new(0.3, 63).unwrap();
        let sampler = SubsetSampler::new(&params, 77);
        let ones: usize = (0..4000).map(|t| sampler.sample(t).len()).sum();
        let freq = ones as f64 / (4000.0 * 64.0);
        assert!((freq - 0.3).abs() < 4.0 * libm::sqrt(0.21 / 256_000.0));
    }

    #[test]
    fn mean_tracks_exact_formula() {
        let c = config(0.5, 60, 40_000, 11, 4);
        let s = run(&c).unwrap();
        let want = expected_missing_left(&c.params);
        assert!((s.mean(Variable::Y) - want).abs() < 4.0 * s.mean_std_error(Variable::Y));
    }

    #[test]
    fn histogram_bins_match_oracle() {
        for &p in &[0.3, 0.6] {
            let c = config(p, 8, 20_000, 21, 2);
            let s = run(&c).unwrap();
            let d = exact_distribution(&c.params).unwrap();
            for var in Variable::ALL {
                let freqs = s.histogram(var).frequencies();
                for (v, &f) in freqs.iter().enumerate() {
                    let q = d.pmf(var).get(v);
                    let se = libm::sqrt(q * (1.0 - q) / 20_000.0);
                    assert!((f - q).abs() <= 4.0 * se + 1e-12, "p={p} {var} v={v}");
                }
            }
        }
    }

    #[test]
    fn tail_and_cdf_edges() {
        let s = run(&config(0.5, 20, 1000, 2, 1)).unwrap();
        assert_eq!(tail_estimate(&s, 0), (1.0, 0.0));
        assert_eq!(tail_estimate(&s, 22).0, 0.0);
        let cdf = normalized_cdf(&s, &[0.0, 10.0]).unwrap();
        assert_eq!(cdf[0].1, s.y.counts[0] as f64 / 1000.0);
        assert_eq!(cdf[1].1, 1.0);
    }

    #[test]
    fn cdf_needs_positive_mean() {
        // p close to one fills the whole sumset
        let s = run(&config(0.999_999, 5, 100, 2, 1)).unwrap();
        assert_eq!(s.mean(Variable::Y), 0.0);
        assert!(normalized_cdf(&s, &[1.0]).is_err());
    }

    #[test]
    fn error_estimate_scaling() {
        let mut s = run(&config(0.5, 20, 1000, 2, 1)).unwrap();
        let e1 = mc_error_estimate(&s);
        for c in s.y.counts.iter_mut() {
            *c *= 4;
        }
        assert!((mc_error_estimate(&s) - e1 / 2.0).abs() < 1e-12 * e1);
    }

    #[test]
    fn budget_is_enforced() {
        let c = config(0.5, 99, 1000, 1, 1);
        assert!(matches!(run_with_budget(&c, 99_999), Err(Error::ResourceLimit { .. })));
        assert!(run_with_budget(&c, 100_000).is_ok());
    }

    #[test]
    fn tilde_convolution_is_noise_level() {
        let s = run(&config(0.5, 40, 20_000, 4, 2)).unwrap();
        assert!(convolution_check_tilde(&s) < 0.02);
        assert!(convolution_check(&s) < 0.02);
    }
}
