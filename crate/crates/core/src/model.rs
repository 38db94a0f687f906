//! Core domain types: parameters, subset and sumset bit-vectors, and the
//! missing-summand counts `Y`, `Z`, `W`, `Ỹ`, `Z̃`.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{domain, Error, Result};
use crate::BitSet;

/// An inclusion probability in the open interval `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p < 1.0 {
            Ok(Self(p))
        } else {
            Err(Error::InvalidProbability(p))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Experiment definition: each of `0..=n_max` is in `A` independently with
/// probability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    p: Probability,
    n_max: usize,
}

impl Params {
    pub fn new(p: f64, n_max: usize) -> Result<Self> {
        Ok(Self {
            p: Probability::new(p)?,
            n_max,
        })
    }

    pub fn with_probability(p: Probability, n_max: usize) -> Self {
        Self { p, n_max }
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p.get()
    }

    #[inline]
    pub fn probability(&self) -> Probability {
        self.p
    }

    /// The upper endpoint `N`.
    #[inline]
    pub fn n_max(&self) -> usize {
        self.n_max
    }
}

/// The random variables tracked by the oracle and the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    /// Missing sums in `[0, N]`.
    Y,
    /// Missing sums in `[N + 1, 2N]`.
    Z,
    /// Missing sums in `[0, 2N]`.
    W,
    /// Missing sums in `[0, ⌊N/2⌋]`.
    YTilde,
    /// Missing sums in `[⌊3N/2⌋ + 1, 2N]`.
    ZTilde,
}

impl Variable {
    pub const ALL: [Variable; 5] = [
        Variable::Y,
        Variable::Z,
        Variable::W,
        Variable::YTilde,
        Variable::ZTilde,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variable::Y => "Y",
            Variable::Z => "Z",
            Variable::W => "W",
            Variable::YTilde => "Y_tilde",
            Variable::ZTilde => "Z_tilde",
        }
    }

    /// Largest value the variable can take for upper endpoint `n_max`.
    pub fn max_value(self, n_max: usize) -> usize {
        match self {
            Variable::Y => n_max + 1,
            Variable::Z => n_max,
            Variable::W => 2 * n_max + 1,
            Variable::YTilde => n_max / 2 + 1,
            Variable::ZTilde => 2 * n_max - (3 * n_max / 2),
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A subset `A ⊆ {0, ..., N}` as a bit-vector of length `N + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetSample {
    members: BitSet,
}

impl SubsetSample {
    pub fn empty(n_max: usize) -> Self {
        Self {
            members: BitSet::new(n_max + 1),
        }
    }

    pub fn from_elements(n_max: usize, elements: &[usize]) -> Result<Self> {
        let mut members = BitSet::new(n_max + 1);
        for &a in elements {
            if a > n_max {
                return Err(domain!("element {a} exceeds N = {n_max}"));
            }
            members.set(a);
        }
        Ok(Self { members })
    }

    /// Subset whose membership is given by the low `n_max + 1` bits of `mask`.
    pub fn from_mask(n_max: usize, mask: u64) -> Self {
        debug_assert!(n_max < 64);
        Self {
            members: BitSet::from_low_bits(n_max + 1, mask),
        }
    }

    pub fn from_bits(members: BitSet) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::LengthMismatch {
                expected: 1,
                actual: 0,
            });
        }
        Ok(Self { members })
    }

    pub fn n_max(&self) -> usize {
        self.members.len() - 1
    }

    pub fn contains(&self, a: usize) -> bool {
        self.members.get(a)
    }

    pub fn len(&self) -> usize {
        self.members.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.members.words().iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter_ones()
    }

    pub fn bits(&self) -> &BitSet {
        &self.members
    }

    pub(crate) fn bits_mut(&mut self) -> &mut BitSet {
        &mut self.members
    }

    /// The reflected subset `{N - a : a ∈ A}`.
    pub fn reflect(&self) -> Self {
        let n = self.n_max();
        let mut members = BitSet::new(n + 1);
        for a in self.iter() {
            members.set(n - a);
        }
        Self { members }
    }
}

/// The sumset `A + A ⊆ {0, ..., 2N}` as a bit-vector of length `2N + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SumsetMask {
    members: BitSet,
}

impl SumsetMask {
    pub fn empty(n_max: usize) -> Self {
        Self {
            members: BitSet::new(2 * n_max + 1),
        }
    }

    pub fn from_bits(members: BitSet) -> Self {
        Self { members }
    }

    pub fn n_max(&self) -> usize {
        (self.members.len() - 1) / 2
    }

    pub fn contains(&self, s: usize) -> bool {
        self.members.get(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter_ones()
    }

    pub fn bits(&self) -> &BitSet {
        &self.members
    }

    /// Counts of unset positions over the five fringe ranges.
    pub fn missing(&self) -> MissingCounts {
        let n = self.n_max();
        let b = &self.members;
        let y = b.count_zeros_in(0, n + 1);
        let z = b.count_zeros_in(n + 1, 2 * n + 1);
        MissingCounts {
            y,
            z,
            w: y + z,
            y_tilde: b.count_zeros_in(0, n / 2 + 1),
            z_tilde: b.count_zeros_in(3 * n / 2 + 1, 2 * n + 1),
        }
    }
}

/// Number of sums missing from each range of `{0, ..., 2N}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MissingCounts {
    pub y: usize,
    pub z: usize,
    pub w: usize,
    pub y_tilde: usize,
    pub z_tilde: usize,
}

impl MissingCounts {
    pub fn get(&self, var: Variable) -> usize {
        match var {
            Variable::Y => self.y,
            Variable::Z => self.z,
            Variable::W => self.w,
            Variable::YTilde => self.y_tilde,
            Variable::ZTilde => self.z_tilde,
        }
    }
}

/// Computes `A + A` by OR-ing in a shifted copy of `A` for every `a ∈ A`.
pub fn compute_sumset(sample: &SubsetSample) -> SumsetMask {
    let mut out = SumsetMask::empty(sample.n_max());
    compute_sumset_into(sample, &mut out);
    out
}

/// Allocation-free variant of [`compute_sumset`] for hot loops.
///
/// # Panics
///
/// Panics if `out` was sized for a different `N`.
pub fn compute_sumset_into(sample: &SubsetSample, out: &mut SumsetMask) {
    assert_eq!(out.members.len(), 2 * sample.n_max() + 1);
    out.members.clear();
    for a in sample.iter() {
        out.members.or_shifted(&sample.members, a);
    }
}

pub fn missing_counts(sumset: &SumsetMask, params: &Params) -> Result<MissingCounts> {
    let expected = 2 * params.n_max() + 1;
    if sumset.members.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: sumset.members.len(),
        });
    }
    Ok(sumset.missing())
}

/// Sorted elements of `A + A` by the O(|A|²) double loop. Reference path for
/// tests and diagnostics.
pub fn sumset_naive(sample: &SubsetSample) -> Vec<usize> {
    let elems: Vec<usize> = sample.iter().collect();
    let mut sums = Vec::with_capacity(elems.len() * elems.len());
    for (i, &a) in elems.iter().enumerate() {
        for &b in &elems[i..] {
            sums.push(a + b);
        }
    }
    sums.sort_unstable();
    sums.dedup();
    sums
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn sums(n: usize, a: &[usize]) -> Vec<usize> {
        let s = SubsetSample::from_elements(n, a).unwrap();
        compute_sumset(&s).iter().collect()
    }

    #[test]
    fn sumset_examples() {
        assert_eq!(sums(2, &[0, 1, 2]), [0, 1, 2, 3, 4]);
        assert_eq!(sums(2, &[]), Vec::<usize>::new());
        assert_eq!(sums(2, &[0, 2]), [0, 2, 4]);
    }

    #[test]
    fn missing_count_examples() {
        let params = Params::new(0.5, 2).unwrap();
        let count = |a: &[usize]| {
            let s = SubsetSample::from_elements(2, a).unwrap();
            missing_counts(&compute_sumset(&s), &params).unwrap()
        };
        let full = count(&[0, 1, 2]);
        assert_eq!((full.y, full.z, full.w), (0, 0, 0));
        let gaps = count(&[0, 2]);
        assert_eq!((gaps.y, gaps.z, gaps.w), (1, 1, 2));
        let none = count(&[]);
        assert_eq!((none.y, none.z, none.w), (3, 2, 5));
        assert_eq!((none.y_tilde, none.z_tilde), (2, 1));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let params = Params::new(0.5, 3).unwrap();
        let mask = SumsetMask::empty(2);
        assert_eq!(
            missing_counts(&mask, &params),
            Err(Error::LengthMismatch {
                expected: 7,
                actual: 5
            })
        );
    }

    #[test]
    fn n_zero_has_empty_right_fringe() {
        let params = Params::new(0.3, 0).unwrap();
        let c = missing_counts(&compute_sumset(&SubsetSample::empty(0)), &params).unwrap();
        assert_eq!(c, MissingCounts { y: 1, z: 0, w: 1, y_tilde: 1, z_tilde: 0 });
        assert_eq!(Variable::ZTilde.max_value(0), 0);
    }

    #[test]
    fn probability_rejects_endpoints() {
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(Probability::new(bad).is_err());
        }
        assert!(Params::new(0.5, 0).is_ok());
    }

    #[test]
    fn reflect_round_trips() {
        let s = SubsetSample::from_elements(9, &[0, 4, 7]).unwrap();
        assert_eq!(s.reflect().iter().collect::<Vec<_>>(), vec![2, 5, 9]);
        assert_eq!(s.reflect().reflect(), s);
    }
}
