//! Command-line driver, JSON formats and verification suite for `jrgauss-core`.

pub mod cli;
pub mod io;
pub mod suite;
