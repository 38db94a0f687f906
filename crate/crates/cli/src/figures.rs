//! Data behind the four figures, one CSV per curve.

use std::path::{Path, PathBuf};

use sumset_core::bounds::{
    tail_lower, tail_upper_chernoff, tail_upper_chernoff_unclamped, tail_upper_improved,
    tail_upper_improved_unclamped, LowerBoundVariant,
};
use sumset_core::chains::spectral_constants;
use sumset_core::exact::missing_prob;
use sumset_core::montecarlo::{mc_error_estimate, normalized_cdf, tail_estimate, McConfig, McSummary};
use sumset_core::series::{leading_order_approx, second_moment_limit, tail_remainder_bound};
use sumset_core::{Params, Probability, Variable};

use crate::checks::fitted_log_slope;
use crate::error::Result;
use crate::parallel::{default_shards, run_mc, Budget};
use crate::row;
use crate::table::{create_dir, Table};

pub const FIG1: (f64, usize) = (0.5, 40);
pub const FIG2: (f64, usize, u64) = (0.5, 200, 1_000_000);
pub const FIG2_MAX_N: u64 = 60;
pub const FIG3_N: usize = 400;
pub const FIG3_TRIALS: u64 = 100_000;
pub const FIG3_P: [f64; 11] = [0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
pub const FIG4_N: usize = 800;
pub const FIG4_TRIALS: u64 = 100_000;
pub const FIG4_P: [f64; 5] = [0.05, 0.08, 0.16, 0.24, 0.32];
pub const FIG4_GRID_STEP: f64 = 0.01;
pub const FIG4_GRID_MAX: f64 = 2.5;

#[derive(Debug, Clone, Copy)]
pub struct FigureOptions {
    pub seed: u64,
    /// Overrides the trial count of the simulated curves.
    pub trials: Option<u64>,
}

fn simulate(p: f64, n: usize, trials: u64, seed: u64, budget: &Budget) -> Result<McSummary> {
    let config = McConfig::new(Params::new(p, n)?, trials, seed, default_shards(trials))?;
    run_mc(&config, budget)
}

/// `n, prob_missing, prob_included` for `0 <= n <= 2N`.
pub fn noninclusion_table(params: &Params) -> Result<Table> {
    let mut t = Table::new(&["n", "prob_missing", "prob_included"]);
    for n in 0..=2 * params.n_max() {
        let q = missing_prob(n, params)?;
        t.push(row![n, q, 1.0 - q]);
    }
    Ok(t)
}

/// `n, estimate, std_error` of the empirical `P(Y >= n)`.
pub fn tail_table(summary: &McSummary, max_n: u64) -> Table {
    let mut t = Table::new(&["n", "estimate", "std_error"]);
    for n in 0..=max_n {
        let (est, se) = tail_estimate(summary, n as usize);
        t.push(row![n, est, se]);
    }
    t
}

/// Upper tail bounds, clamped and raw, for `0 <= n <= max_n`.
pub fn upper_bound_table(p: Probability, max_n: u64) -> Table {
    let mut t = Table::new(&["n", "improved", "chernoff", "improved_unclamped", "chernoff_unclamped"]);
    for n in 0..=max_n {
        t.push(row![
            n,
            tail_upper_improved(p, n),
            tail_upper_chernoff(p, n),
            tail_upper_improved_unclamped(p, n),
            tail_upper_chernoff_unclamped(p, n),
        ]);
    }
    t
}

/// Both lower bound variants at even `n`.
pub fn lower_bound_table(p: Probability, max_n: u64) -> Result<Table> {
    let mut t = Table::new(&["n", "rigorous", "as_stated"]);
    for n in (0..=max_n).step_by(2) {
        t.push(row![
            n,
            tail_lower(p, n, LowerBoundVariant::Rigorous)?,
            tail_lower(p, n, LowerBoundVariant::AsStated)?,
        ]);
    }
    Ok(t)
}

pub fn histogram_table(summary: &McSummary) -> Table {
    let mut t = Table::new(&["variable", "value", "count"]);
    for var in Variable::ALL {
        for (v, &c) in summary.histogram(var).counts.iter().enumerate() {
            t.push(row![var.name(), v, c]);
        }
    }
    for (v, &c) in summary.w_tilde.counts.iter().enumerate() {
        t.push(row!["W_tilde", v, c]);
    }
    t
}

pub fn moments_table(summary: &McSummary) -> Table {
    let mut t = Table::new(&["variable", "mean", "second_moment", "variance", "mean_std_error", "second_moment_std_error"]);
    for var in [Variable::Y, Variable::Z, Variable::W] {
        t.push(row![
            var.name(),
            summary.mean(var),
            summary.second_moment(var),
            summary.variance(var),
            summary.mean_std_error(var),
            summary.second_moment_std_error(var),
        ]);
    }
    t
}

pub fn run_header(summary: &McSummary) -> String {
    let c = &summary.config;
    format!(
        "p = {}\nN = {}\nM = {}\nseed = {}\nshards = {}\n",
        c.params.p(),
        c.params.n_max(),
        c.trials,
        c.seed,
        c.shards
    )
}

pub fn cdf_grid() -> Vec<f64> {
    let steps = (FIG4_GRID_MAX / FIG4_GRID_STEP).round() as usize;
    (0..=steps).map(|i| i as f64 * FIG4_GRID_STEP).collect()
}

pub fn cdf_table(summary: &McSummary, grid: &[f64]) -> Result<Table> {
    let mut t = Table::new(&["p", "x", "cdf"]);
    let p = summary.config.params.p();
    for (x, c) in normalized_cdf(summary, grid)? {
        t.push(row![p, x, c]);
    }
    Ok(t)
}

fn save(dir: &Path, name: &str, table: &Table, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    table.write_file(&path)?;
    written.push(path);
    Ok(())
}

pub fn figure1(out: &Path) -> Result<Vec<PathBuf>> {
    create_dir(out)?;
    let mut written = Vec::new();
    save(out, "noninclusion.csv", &noninclusion_table(&Params::new(FIG1.0, FIG1.1)?)?, &mut written)?;
    Ok(written)
}

pub fn figure2(out: &Path, opts: &FigureOptions, budget: &Budget) -> Result<Vec<PathBuf>> {
    let (p, n, trials) = FIG2;
    let trials = opts.trials.unwrap_or(trials);
    let prob = Probability::new(p)?;
    let summary = simulate(p, n, trials, opts.seed, budget)?;
    create_dir(out)?;
    let mut written = Vec::new();
    save(out, "mc.csv", &tail_table(&summary, FIG2_MAX_N), &mut written)?;
    save(out, "ub.csv", &upper_bound_table(prob, FIG2_MAX_N), &mut written)?;
    save(out, "lb.csv", &lower_bound_table(prob, FIG2_MAX_N)?, &mut written)?;

    let points: Vec<(u64, f64)> = (8..=40).step_by(2).map(|k| (k, tail_estimate(&summary, k as usize).0)).collect();
    let mut slopes = Table::new(&["curve", "beta"]);
    slopes.push(row!["mc", fitted_log_slope(&points)]);
    slopes.push(row!["ub", spectral_constants(prob).lambda1.ln()]);
    slopes.push(row!["lb", (1.0 - p).sqrt().ln()]);
    save(out, "slopes.csv", &slopes, &mut written)?;
    Ok(written)
}

pub fn figure3(out: &Path, opts: &FigureOptions, budget: &Budget) -> Result<Vec<PathBuf>> {
    let trials = opts.trials.unwrap_or(FIG3_TRIALS);
    let mut series = Table::new(&["p", "second_moment", "remainder_bound"]);
    let mut mc = Table::new(&["p", "second_moment", "random_error"]);
    let mut approx = Table::new(&["p", "approx"]);
    let mut errors = Table::new(&["p", "discrepancy", "random_error", "systematic_error", "expected_error"]);
    for &p in &FIG3_P {
        let prob = Probability::new(p)?;
        let limit = second_moment_limit(prob, 1e-9)?;
        let summary = simulate(p, FIG3_N, trials, opts.seed, budget)?;
        let m2 = summary.second_moment(Variable::Y);
        let random = mc_error_estimate(&summary);
        let systematic = tail_remainder_bound(prob, FIG3_N as u64);
        series.push(row![p, limit.value, limit.remainder_bound]);
        mc.push(row![p, m2, random]);
        approx.push(row![p, leading_order_approx(prob)]);
        errors.push(row![
            p,
            m2 - limit.value,
            random,
            systematic,
            (random * random + systematic * systematic).sqrt(),
        ]);
    }
    create_dir(out)?;
    let mut written = Vec::new();
    save(out, "series.csv", &series, &mut written)?;
    save(out, "mc.csv", &mc, &mut written)?;
    save(out, "approx.csv", &approx, &mut written)?;
    save(out, "expected_error.csv", &errors, &mut written)?;
    Ok(written)
}

pub fn figure4(out: &Path, opts: &FigureOptions, budget: &Budget) -> Result<Vec<PathBuf>> {
    let trials = opts.trials.unwrap_or(FIG4_TRIALS);
    let grid = cdf_grid();
    let mut cdf = Table::new(&["p", "x", "cdf"]);
    let mut stats = Table::new(&["p", "sample_mean", "sample_variance", "ratio"]);
    for &p in &FIG4_P {
        let summary = simulate(p, FIG4_N, trials, opts.seed, budget)?;
        let mean = summary.mean(Variable::Y);
        let var = summary.variance(Variable::Y);
        for (x, c) in normalized_cdf(&summary, &grid)? {
            cdf.push(row![p, x, c]);
        }
        stats.push(row![p, mean, var, var / (mean * mean)]);
    }
    create_dir(out)?;
    let mut written = Vec::new();
    save(out, "cdf.csv", &cdf, &mut written)?;
    save(out, "summary.csv", &stats, &mut written)?;
    Ok(written)
}
