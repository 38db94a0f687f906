//! Rayon drivers for the simulator and the enumeration oracle, plus the work
//! budget shared by every command.

use rayon::prelude::*;

use sumset_core::montecarlo::{run_shard, McConfig, McSummary};
use sumset_core::oracle::{EnumerationCounts, ExactDistribution, MAX_ORACLE_N};
use sumset_core::Params;

use crate::error::{CliError, Result};

/// Cap on work units: one unit is one random draw in the simulator, or one
/// subset element visited by the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub limit: u128,
}

impl Budget {
    pub const DEFAULT: Budget = Budget { limit: 1 << 34 };

    pub fn unlimited() -> Self {
        Budget { limit: u128::MAX }
    }

    pub fn check(&self, what: &str, requested: u128) -> Result<()> {
        if requested > self.limit {
            return Err(CliError::Budget {
                what: what.to_string(),
                requested,
                budget: self.limit,
            });
        }
        Ok(())
    }

    pub fn check_oracle(&self, n_max: usize) -> Result<()> {
        let work = if n_max > MAX_ORACLE_N {
            u128::MAX
        } else {
            (1u128 << (n_max + 1)) * (n_max as u128 + 1)
        };
        self.check(&format!("oracle enumeration at N = {n_max}"), work)
    }

    pub fn check_mc(&self, config: &McConfig) -> Result<()> {
        self.check("Monte Carlo run", config.work())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Shard count used when the caller does not pick one. The result does not
/// depend on it.
pub fn default_shards(trials: u64) -> u64 {
    (4 * rayon::current_num_threads() as u64).clamp(1, trials.max(1))
}

/// Runs every shard of `config` on the rayon pool and merges in shard order.
pub fn run_mc(config: &McConfig, budget: &Budget) -> Result<McSummary> {
    config.validate()?;
    budget.check_mc(config)?;
    let parts = (0..config.shards)
        .into_par_iter()
        .map(|i| run_shard(config, i))
        .collect::<Result<Vec<_>, _>>()?;
    let mut total = McSummary::empty(*config);
    for part in &parts {
        total.merge(part)?;
    }
    Ok(total)
}

/// Exact distribution with the subset range split across the pool.
pub fn exact_distribution(params: &Params, budget: &Budget) -> Result<ExactDistribution> {
    budget.check_oracle(params.n_max())?;
    let n = params.n_max();
    let total = 1u64 << (n + 1);
    let chunks = 64u64.min(total);
    let step = total.div_ceil(chunks);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| EnumerationCounts::enumerate_range(n, c * step, ((c + 1) * step).min(total)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut counts = EnumerationCounts::new(n)?;
    for part in &parts {
        counts.merge(part)?;
    }
    Ok(counts.into_distribution(params.probability())?)
}
