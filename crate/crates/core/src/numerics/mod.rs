//! Numerical building blocks shared by every bound module.

mod optimize;
mod quad;
mod special;

pub use optimize::{invert_monotone_tail, minimize_scalar, minimize_scalar_grid, Minimum, GRID_POINTS};
pub use quad::{integrate, integrate_vec};
pub use special::{
    binomial_pnorm, erfcx, hermite_moment_bound, ln_gamma, log_std_normal_cdf_c, mills_ratio, normal_pnorm,
    std_normal_cdf, std_normal_cdf_c, std_normal_pdf, std_normal_quantile, std_normal_quantile_upper, FRAC_1_SQRT_2PI,
    SQRT_2PI,
};

use crate::error::{Error, Result};

/// Stopping rule for iterative numerical routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        if !(abs_tol >= 0.0 && rel_tol >= 0.0) || abs_tol + rel_tol <= 0.0 {
            return Err(Error::Domain("tolerances must be nonnegative with a positive sum"));
        }
        if max_iter == 0 {
            return Err(Error::Domain("max_iter must be at least 1"));
        }
        Ok(Self { abs_tol, rel_tol, max_iter })
    }

    /// Acceptance threshold for a quantity of magnitude `scale`.
    #[inline]
    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * scale.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-10, max_iter: 2000 }
    }
}
