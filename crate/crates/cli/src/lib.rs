//! Command-line driver for `sumset-core`: CSV output, rayon runners for the
//! simulator and the oracle, figure data and the verification checks.

pub mod checks;
pub mod error;
pub mod figures;
pub mod parallel;
pub mod table;

pub use error::{CliError, Result};
pub use parallel::Budget;
