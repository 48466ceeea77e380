//! Finite-sample valid and asymptotically efficient concentration bounds for
//! the scaled deviation `S_n = √n (W̄_n − E W_1)` of bounded i.i.d. variables
//! `W_i ∈ [0, R]` with standard deviation `σ`.
//!
//! The crate is `no_std` (with `alloc`) so the bound computations can be
//! embedded anywhere. IO, file formats, caching and the command-line front end
//! live in the `effconc` companion crate.
//!
//! Module map:
//!
//! - [`numerics`]: special functions, quadrature, scalar optimization.
//! - [`model`]: the `(n, R, σ)` problem description and derived parameters.
//! - [`classical`]: Hoeffding, Bernstein, Berry-Esseen baselines and the
//!   default auxiliary tail combination.
//! - [`zero_bias`]: the efficient zero-bias tail bound and its variant.
//! - [`wasserstein`]: the computable p-Wasserstein bound and the tail and
//!   quantile bounds built on it.
//! - [`empirical`]: unknown-variance (empirical Berry-Esseen) quantiles.
//! - [`stopping`]: (ε, δ)-stopping rules and a stream simulator.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod classical;
pub mod empirical;
pub mod error;
pub mod model;
pub mod numerics;
pub mod stopping;
pub mod wasserstein;
pub mod zero_bias;

pub use classical::{BoundResult, Settings, Sided};
pub use error::{Error, Result};
pub use model::{DerivedParams, Problem};
