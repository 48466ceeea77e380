use libm::sqrt;

use crate::error::{Error, Result};

/// A bounded i.i.d. mean problem: `n` summands supported on `[0, R]` with
/// standard deviation `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem {
    n: u64,
    r: f64,
    sigma: f64,
}

/// Scalars derived from a [`Problem`] that recur in every bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// `R_σ`, an almost-sure bound on `|W_1 − E W_1|`.
    pub rsig: f64,
    /// `R̃ = R/σ`.
    pub tilde_r: f64,
    /// `R̃_σ = R_σ/σ`.
    pub tilde_rsig: f64,
}

// Relative slack that absorbs rounding when σ sits on the boundary R/2.
const BOUNDARY_SLACK: f64 = 1e-15;

fn discriminant(r: f64, sigma: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain("support length R must be positive and finite"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain("standard deviation must be positive and finite"));
    }
    let disc = r * r - 4.0 * sigma * sigma;
    if disc < -BOUNDARY_SLACK * r * r {
        return Err(Error::Domain("standard deviation exceeds R/2"));
    }
    Ok(disc.max(0.0))
}

/// `R_σ = ½R + ½√(R² − 4σ²)`.
pub fn rsig(r: f64, sigma: f64) -> Result<f64> {
    Ok(0.5 * r + 0.5 * sqrt(discriminant(r, sigma)?))
}

/// [`rsig`] evaluated at a substitute standard deviation `σ′`.
pub fn rsig_at(r: f64, sigma_prime: f64) -> Result<f64> {
    rsig(r, sigma_prime)
}

impl Problem {
    pub fn new(n: u64, r: f64, sigma: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("sample size must be at least 1"));
        }
        discriminant(r, sigma)?;
        Ok(Self { n, r, sigma: sigma.min(0.5 * r) })
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    #[inline]
    pub fn sqrt_n(&self) -> f64 {
        sqrt(self.n as f64)
    }

    /// Same support and variance with a different sample size.
    pub fn with_n(&self, n: u64) -> Result<Self> {
        Self::new(n, self.r, self.sigma)
    }

    /// Same support and sample size with a different standard deviation.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.n, self.r, sigma)
    }

    pub fn derived(&self) -> DerivedParams {
        // Admissibility was checked at construction.
        let rsig = 0.5 * self.r + 0.5 * sqrt((self.r * self.r - 4.0 * self.sigma * self.sigma).max(0.0));
        DerivedParams { rsig, tilde_r: self.r / self.sigma, tilde_rsig: rsig / self.sigma }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rsig_closed_forms() {
        assert_eq!(rsig(1.0, 0.5).unwrap(), 0.5);
        assert!((rsig(1.0, 0.3).unwrap() - 0.9).abs() < 1e-12);
        assert!((rsig(2.0, 0.6).unwrap() - 1.8).abs() < 1e-12);
        assert!((rsig(1.0, 1e-9).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rsig_at_modified_sigma() {
        let sp = sqrt(55.0) * 0.5 / 12.0;
        let expect = 0.5 + 0.5 * sqrt(1.0 - 4.0 * sp * sp);
        assert!((rsig_at(1.0, sp).unwrap() - expect).abs() < 1e-15);
        assert!((rsig_at(1.0, sp).unwrap() - 0.8931).abs() < 1e-4);
    }

    #[test]
    fn inadmissible_inputs() {
        assert!(rsig(1.0, 0.5000001).is_err());
        assert!(rsig(0.0, 0.1).is_err());
        assert!(rsig(1.0, 0.0).is_err());
        assert!(Problem::new(0, 1.0, 0.2).is_err());
        assert!(Problem::new(10, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn boundary_rounding_is_absorbed() {
        let r = 0.3;
        let sigma = r / 2.0 * (1.0 + 1e-16);
        let p = Problem::new(5, r, sigma).unwrap();
        assert!(p.sigma() <= r / 2.0);
        assert!((p.derived().tilde_rsig - 1.0).abs() < 1e-7);
    }

    #[test]
    fn derived_params_consistent() {
        let p = Problem::new(100, 2.0, 0.4).unwrap();
        let d = p.derived();
        assert!((d.rsig - rsig(2.0, 0.4).unwrap()).abs() < 1e-15);
        let t = d.tilde_r;
        assert!((d.tilde_rsig - (0.5 * t + 0.5 * sqrt(t * t - 4.0))).abs() < 1e-12);
        assert!(d.tilde_rsig >= 1.0);
    }
}
