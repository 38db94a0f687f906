//! Reflection orbits and the exact probability that two integers are both
//! missing from `A + A`.
//!
//! For `n < m`, the pairs `{x, m − x}` and `{x, n − x}` link integers into
//! chains. Walking from `r ∈ (n, m]` by alternating the reflections
//! `x ↦ m − x` and `x ↦ n − x` traces an *orbit*; `m, n ∉ A + A` exactly when
//! no two consecutive orbit entries both lie in `A`. The orbits of a pair
//! split into loopless ones (two free ends) and looped ones (ending on a
//! fixed point `m/2` or `n/2`), whose counts and lengths depend only on the
//! twist degree `l = ⌈(n + 1)/(m − n)⌉` and the parities of `m`, `n`, `l`.

use alloc::vec::Vec;

use crate::chains::{spectral_constants, ChainProbTable};
use crate::error::{domain, Result};
use crate::model::{Params, Probability};
use crate::numeric::powu;

/// The orbit `(r_1, ..., r_k)` of `r` under the alternating reflections.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Orbit {
    pub entries: Vec<usize>,
    /// The orbit ends on a repeated fixed point.
    pub looped: bool,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct positions touched by the orbit (the loop repeat counted once).
    pub fn positions(&self) -> &[usize] {
        if self.looped {
            &self.entries[..self.entries.len() - 1]
        } else {
            &self.entries
        }
    }
}

/// Orbit of `r` for the pair `(m, n)`, `n < r <= m`.
///
/// The walk stops as looped when a reflection returns the current value and
/// as loopless when the next reflection would leave the nonnegative integers.
pub fn orbit(r: usize, m: usize, n: usize) -> Result<Orbit> {
    if !(n < r && r <= m) {
        return Err(domain!("orbit start {r} must satisfy {n} < r <= {m}"));
    }
    let mut entries = alloc::vec![r];
    let mut cur = r;
    // the first step reflects through m
    let mut through_m = true;
    loop {
        let axis = if through_m { m } else { n };
        let Some(next) = axis.checked_sub(cur) else {
            return Ok(Orbit {
                entries,
                looped: false,
            });
        };
        entries.push(next);
        if next == cur {
            return Ok(Orbit {
                entries,
                looped: true,
            });
        }
        cur = next;
        through_m = !through_m;
    }
}

/// Orbits of every `r ∈ (n, m]`, in increasing order of `r`. Loopless orbits
/// appear together with their reversals.
pub fn orbits(m: usize, n: usize) -> Result<Vec<Orbit>> {
    if n >= m {
        return Err(domain!("need n < m, got m = {m}, n = {n}"));
    }
    (n + 1..=m).map(|r| orbit(r, m, n)).collect()
}

/// `⌈(n + 1)/(m − n)⌉`, the number of twists in the snail diagram of `(m, n)`.
pub fn twist_degree(m: usize, n: usize) -> Result<usize> {
    if n >= m {
        return Err(domain!("need n < m, got m = {m}, n = {n}"));
    }
    Ok((n + 1).div_ceil(m - n))
}

/// Combinatorial descriptor of the pair `(m, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairGeometry {
    pub m: usize,
    pub n: usize,
    /// Twist degree `⌈(n + 1)/(m − n)⌉`.
    pub l: usize,
    /// Integers of `n + 1 ..= m` at or above `l(m − n)`.
    pub d1: usize,
    /// Integers of `n + 1 ..= m` below `l(m − n)`.
    pub d2: usize,
    /// `(m, n, l) mod 2`.
    pub s: (u8, u8, u8),
    /// Loopless orbits of length `2(l + 1)`, reversals counted separately.
    pub loopless_long: usize,
    /// Loopless orbits of length `2l`, reversals counted separately.
    pub loopless_short: usize,
    /// Looped orbits of length `l + 2`.
    pub looped_long: usize,
    /// Looped orbits of length `l + 1`.
    pub looped_short: usize,
}

pub fn pair_geometry(m: usize, n: usize) -> Result<PairGeometry> {
    let l = twist_degree(m, n)?;
    let gap = m - n;
    let d1 = (m + 1) - l * gap;
    let d2 = l * gap - (n + 1);
    let (m_odd, n_odd) = (m % 2 == 1, n % 2 == 1);
    // A fixed point m/2 or n/2 exists for each even endpoint; each one ends a
    // looped orbit, which sits in the long or short band according to parity.
    let (looped_long, looped_short) = match (m_odd, n_odd) {
        (true, true) => (0, 0),
        (false, false) => (1, 1),
        _ if d1 % 2 == 1 => (1, 0),
        _ => (0, 1),
    };
    Ok(PairGeometry {
        m,
        n,
        l,
        d1,
        d2,
        s: ((m % 2) as u8, (n % 2) as u8, (l % 2) as u8),
        loopless_long: d1 - looped_long,
        loopless_short: d2 - looped_short,
        looped_long,
        looped_short,
    })
}

impl PairGeometry {
    /// `P(m, n ∉ A + A)` given a chain table covering index `2l + 2`.
    ///
    /// # Panics
    ///
    /// Panics if `table.max_k() < 2l + 2`.
    pub fn missing_prob(&self, table: &ChainProbTable) -> f64 {
        let p = table.probability().get();
        let l = self.l;
        let a = |k: usize| table.get(k);
        let loopless =
            powu(a(2 * l + 2), (self.d1 / 2) as u64) * powu(a(2 * l), (self.d2 / 2) as u64);
        let looped = match self.s {
            (1, 1, _) => 1.0,
            (1, 0, 1) | (0, 1, 0) => (1.0 - p) * a(l),
            (1, 0, 0) | (0, 1, 1) => (1.0 - p) * a(l - 1),
            _ => (1.0 - p) * (1.0 - p) * a(l) * a(l - 1),
        };
        loopless * looped
    }
}

/// `P(m ∉ A + A and n ∉ A + A)` for `0 <= n < m <= N`.
pub fn pair_missing_prob(m: usize, n: usize, params: &Params) -> Result<f64> {
    if m > params.n_max() {
        return Err(domain!("m = {m} exceeds N = {}", params.n_max()));
    }
    let g = pair_geometry(m, n)?;
    let table = ChainProbTable::new(params.probability(), 2 * g.l + 2);
    Ok(g.missing_prob(&table))
}

/// Evaluates `P(m, n ∉ A + A)` for many pairs against one shared chain table.
#[derive(Debug, Clone)]
pub struct PairProbEvaluator {
    table: ChainProbTable,
}

impl PairProbEvaluator {
    /// Evaluator for all pairs with `m <= m_max`.
    pub fn new(p: Probability, m_max: usize) -> Self {
        // l <= n + 1 <= m, so indices stay below 2m + 2
        Self {
            table: ChainProbTable::new(p, 2 * m_max + 2),
        }
    }

    pub fn table(&self) -> &ChainProbTable {
        &self.table
    }

    pub fn prob(&self, m: usize, n: usize) -> Result<f64> {
        let g = pair_geometry(m, n)?;
        if 2 * g.l + 2 > self.table.max_k() {
            return Err(domain!("pair ({m}, {n}) outside the evaluator's range"));
        }
        Ok(g.missing_prob(&self.table))
    }
}

/// `λ₁^{1 + (m + n)/2}`, an upper bound on `P(m, n ∉ A + A)` whenever the
/// twist degree is at least 2.
pub fn pair_missing_prob_upper(m: usize, n: usize, p: Probability) -> Result<f64> {
    if n >= m {
        return Err(domain!("need n < m, got m = {m}, n = {n}"));
    }
    let lambda1 = spectral_constants(p).lambda1;
    Ok(libm::pow(lambda1, 1.0 + (m + n) as f64 / 2.0))
}
