//! Command-line front end, output formats and Monte Carlo harness for
//! `effconc-core`.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod grid;
pub mod mc;
pub mod memo;
pub mod records;
pub mod selftest;
pub mod stop;

pub use error::{CliError, CliResult};
pub use memo::MemoOmega;
