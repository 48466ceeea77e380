//! Classical baselines and the default auxiliary bounds.
//!
//! Tail functions bound `P(S_n > σu)` and take `u` in units of `σ`.
//! Quantile functions return a level on the scale of `S_n` itself.

use libm::{exp, log, sqrt};

use crate::error::Result;
use crate::model::Problem;
use crate::numerics::{invert_monotone_tail, std_normal_cdf_c, Tolerance};
use crate::zero_bias::zero_bias_tail_at_threshold;

/// One- or two-sided bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sided {
    One,
    Two,
}

impl Sided {
    pub fn as_str(self) -> &'static str {
        match self {
            Sided::One => "one",
            Sided::Two => "two",
        }
    }
}

/// Optimizer settings that produced a bound, where they apply.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Settings {
    pub p: Option<u32>,
    pub rho: Option<f64>,
    pub kappa: Option<f64>,
    pub lambda: Option<f64>,
}

/// A tail probability or quantile with the sub-bound that achieved it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub value: f64,
    pub winner: &'static str,
    pub settings: Settings,
    /// Set when a fallback path was taken while computing the value.
    pub flag: Option<&'static str>,
}

impl BoundResult {
    pub fn new(value: f64, winner: &'static str) -> Self {
        Self { value, winner, settings: Settings::default(), flag: None }
    }

    pub fn with_settings(mut self, settings: Settings) -> Self {
        self.settings = settings;
        self
    }

    pub fn with_flag(mut self, flag: Option<&'static str>) -> Self {
        self.flag = flag;
        self
    }

    /// The smaller of two results; ties keep `self`.
    pub fn min(self, other: Self) -> Self {
        if other.value < self.value {
            other
        } else {
            self
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(crate::Error::Domain("delta must lie in (0, 1)"))
    }
}

pub fn hoeffding_tail(prob: &Problem, u: f64) -> f64 {
    let s = u * prob.sigma() / prob.r();
    if u <= 0.0 {
        return 1.0;
    }
    exp(-2.0 * s * s).min(1.0)
}

pub fn bernstein_tail(prob: &Problem, u: f64) -> f64 {
    if u <= 0.0 {
        return 1.0;
    }
    let denom = 2.0 * (1.0 + prob.r() * u / (3.0 * prob.sigma() * prob.sqrt_n()));
    exp(-u * u / denom).min(1.0)
}

/// Berry-Esseen constant `C = min(.3328(R̃_σ + .429), .33554(R̃_σ + .415))`.
pub fn berry_esseen_constant(prob: &Problem) -> f64 {
    let t = prob.derived().tilde_rsig;
    (0.3328 * (t + 0.429)).min(0.33554 * (t + 0.415))
}

/// Non-uniform Berry-Esseen constant `C̃ = min(17.36 R̃_σ, 15.70 R̃_σ + 0.646)`.
pub fn nonuniform_be_constant(prob: &Problem) -> f64 {
    let t = prob.derived().tilde_rsig;
    (17.36 * t).min(15.70 * t + 0.646)
}

/// `min(1, Φ^c(u) + C/√n)`, never above the Hoeffding tail.
pub fn berry_esseen_tail(prob: &Problem, u: f64) -> f64 {
    let be = (std_normal_cdf_c(u) + berry_esseen_constant(prob) / prob.sqrt_n()).min(1.0);
    be.min(hoeffding_tail(prob, u))
}

/// `min(1, Φ^c(u) + C̃/(√n(1+u)³))`, never above the Hoeffding tail.
pub fn nonuniform_be_tail(prob: &Problem, u: f64) -> f64 {
    let w = 1.0 + u;
    let nube = (std_normal_cdf_c(u) + nonuniform_be_constant(prob) / (prob.sqrt_n() * w * w * w)).min(1.0);
    nube.min(hoeffding_tail(prob, u))
}

/// Two-sided Bernstein quantile `R_σ/(3√n)·log(2/δ) + σ√(2 log(2/δ))`.
pub fn bernstein_quantile(prob: &Problem, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let l = log(2.0 / delta);
    Ok(prob.derived().rsig / (3.0 * prob.sqrt_n()) * l + prob.sigma() * sqrt(2.0 * l))
}

/// `R√(log(1/δ)/2)` one-sided, `R√(log(2/δ)/2)` two-sided.
pub fn hoeffding_quantile(r: f64, delta: f64, sided: Sided) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(crate::Error::Domain("delta must lie in (0, 1]"));
    }
    let l = match sided {
        Sided::One => log(1.0 / delta),
        Sided::Two => log(2.0 / delta),
    };
    Ok(r * sqrt(0.5 * l.max(0.0)))
}

/// Smallest of the zero-bias (both variants), Hoeffding, Bernstein,
/// Berry-Esseen and non-uniform Berry-Esseen tails at `u`.
pub fn default_onetail(prob: &Problem, u: f64) -> BoundResult {
    let mut best = BoundResult::new(hoeffding_tail(prob, u), "hoeffding");
    best = best.min(BoundResult::new(bernstein_tail(prob, u), "bernstein"));
    best = best.min(BoundResult::new(berry_esseen_tail(prob, u), "berry_esseen"));
    best = best.min(BoundResult::new(nonuniform_be_tail(prob, u), "nonuniform_be"));
    if u > 0.0 {
        best = best.min(zero_bias_tail_at_threshold(prob, prob.sigma() * u));
    }
    best
}

/// `min(1, 2·default_onetail)`.
pub fn default_twotail(prob: &Problem, u: f64) -> BoundResult {
    let mut r = default_onetail(prob, u);
    r.value = (2.0 * r.value).min(1.0);
    r
}

fn u_max(prob: &Problem, delta: f64, sided: Sided) -> f64 {
    let l = match sided {
        Sided::One => log(1.0 / delta),
        Sided::Two => log(2.0 / delta),
    };
    prob.r() / prob.sigma() * sqrt(0.5 * l) + 1.0
}

// Bisection stops at a relative width of 1e-9 in u; the bound's own slack
// dwarfs that, and every returned point is feasible regardless.
fn inversion_tolerance() -> Tolerance {
    Tolerance { abs_tol: 1e-12, rel_tol: 1e-9, max_iter: 200 }
}

/// Quantile of `S_n` (or `|S_n|`) obtained by inverting the default
/// auxiliary tail at level `δ`.
pub fn default_quantile(prob: &Problem, delta: f64, sided: Sided) -> Result<BoundResult> {
    check_delta(delta)?;
    let tail = |u: f64| match sided {
        Sided::One => default_onetail(prob, u).value,
        Sided::Two => default_twotail(prob, u).value,
    };
    let u = invert_monotone_tail(tail, delta, 0.0, u_max(prob, delta, sided), inversion_tolerance())?;
    let winner = match sided {
        Sided::One => default_onetail(prob, u).winner,
        Sided::Two => default_twotail(prob, u).winner,
    };
    Ok(BoundResult::new(prob.sigma() * u, winner))
}

/// Quantile from inverting one named tail function, for baseline comparisons.
pub fn invert_tail(prob: &Problem, delta: f64, sided: Sided, tail: impl Fn(&Problem, f64) -> f64) -> Result<f64> {
    check_delta(delta)?;
    let factor = match sided {
        Sided::One => 1.0,
        Sided::Two => 2.0,
    };
    let bound = |u: f64| (factor * tail(prob, u)).min(1.0);
    let u = invert_monotone_tail(bound, delta, 0.0, u_max(prob, delta, sided), inversion_tolerance())?;
    Ok(prob.sigma() * u)
}
