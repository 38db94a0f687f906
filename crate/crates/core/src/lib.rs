//! Exact and Monte Carlo analysis of the summands missing from a random
//! sumset `A + A`, where `A` is a Bernoulli(p) subset of `{0, ..., N}`.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs; IO, parallel drivers and file formats live in the
//! companion `sumset` crate.
//!
//! Module map:
//!
//! * [`model`] – parameters, subset/sumset bit-vectors, missing-summand counts.
//! * [`exact`] – single-element inclusion probabilities and first moments.
//! * [`chains`] – the chain-satisfaction sequence `a_k` and its decay constants.
//! * [`orbits`] – reflection orbits, pair geometry and `P(m, n ∉ A + A)`.
//! * [`series`] – the `N → ∞` second moment and its small-`p` asymptotics.
//! * [`bounds`] – moment bounds and exponential tail bounds.
//! * [`montecarlo`] – seeded, shardable simulation engine.
//! * [`oracle`] – brute-force enumeration over all subsets for small `N`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod bitset;
mod error;
mod numeric;

pub mod bounds;
pub mod chains;
pub mod exact;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod orbits;
pub mod series;

pub use bitset::BitSet;
pub use error::{Error, Result};
pub use model::{MissingCounts, Params, Probability, SubsetSample, SumsetMask, Variable};
pub use numeric::NeumaierSum;
