//! The efficient zero-bias tail bound and its shifted-threshold variant.
//!
//! Both bound `P(S_n > threshold)` by `Φ^c(u)` plus a correction that decays
//! like `exp(−c u²)/√n`. The correction interpolates between two values of
//! `h_u` with a free weight `λ ∈ [0, 1]`, which is chosen here by a grid.

use libm::{exp, sqrt};

use crate::classical::{BoundResult, Settings};
use crate::model::{rsig_at, Problem};
use crate::numerics::{erfcx, std_normal_cdf, std_normal_cdf_c, SQRT_2PI};

/// Number of `λ` values tried, evenly spaced on `[0, 1]`.
pub const LAMBDA_GRID: usize = 33;

const FRAC_8_PI: f64 = 8.0 / core::f64::consts::PI;

/// The pieces of the bound at one `(u, λ)`, exposed for inspection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroBiasTerms {
    pub h_lambda_u: f64,
    pub h_u_u: f64,
    pub delta_prime: f64,
    pub q_n: f64,
    pub delta_n: f64,
    pub v_up_sq: f64,
    pub v_low_sq: f64,
    pub beta_n: f64,
}

/// `h_u(w) = (w + (1 + w²)√(2π) e^{w²/2} Φ(w)) Φ^c(u)` for `w ≤ u`.
///
/// The product `e^{w²/2}Φ^c(u)` is formed as `½ erfcx(u/√2) e^{(w²−u²)/2}`,
/// which stays finite for any `u`.
pub fn h_u(w: f64, u: f64) -> f64 {
    let tail = std_normal_cdf_c(u);
    let scaled = 0.5 * erfcx(u * core::f64::consts::FRAC_1_SQRT_2) * exp(0.5 * (w * w - u * u));
    w * tail + (1.0 + w * w) * SQRT_2PI * std_normal_cdf(w) * scaled
}

/// `b(w) = 2/(w + √(w² + 8/π)) − 8w/(π(w + √(w² + 8/π))²)`.
pub fn b_growth(w: f64) -> f64 {
    let d = w + sqrt(w * w + FRAC_8_PI);
    2.0 / d - FRAC_8_PI * w / (d * d)
}

/// `δ′_u = h_u(u) − b(u)Φ(u)`.
pub fn delta_prime(u: f64) -> f64 {
    h_u(u, u) - b_growth(u) * std_normal_cdf(u)
}

/// Parameters of `Q_n` for a problem of size `n`.
#[derive(Debug, Clone, Copy)]
struct QParams {
    delta_n: f64,
    v_up_sq: f64,
    v_low_sq: f64,
    beta_n: f64,
    r: f64,
    rsig: f64,
    sqrt_n: f64,
}

impl QParams {
    fn new(prob: &Problem, n: u64) -> Self {
        let (r, sigma) = (prob.r(), prob.sigma());
        let rsig = prob.derived().rsig;
        let nf = n as f64;
        let sqrt_n = sqrt(nf);
        // σ′ = √55σ/12 < σ ≤ R/2 is always admissible.
        let rsig_mod = rsig_at(r, sqrt(55.0) * sigma / 12.0).unwrap_or(r);
        QParams {
            delta_n: rsig / (4.0 * sqrt_n),
            v_up_sq: sigma * sigma + (rsig * rsig - 6.0 * sigma * sigma) / (9.0 * nf),
            v_low_sq: sigma * sigma * (1.0 - 89.0 / (144.0 * nf)),
            beta_n: (0.25 * rsig).min(rsig_mod - rsig) * (sigma * sigma / (3.0 * nf) + rsig * rsig / (9.0 * nf)),
            r,
            rsig,
            sqrt_n,
        }
    }

    fn q(&self, x: f64) -> f64 {
        let shift = x - self.delta_n;
        let pos = shift.max(0.0);
        let hoeffding = exp(-2.0 * pos * pos / (self.r * self.r));
        let bernstein = exp(-pos * pos / (2.0 * (self.v_up_sq + self.rsig * pos / (3.0 * self.sqrt_n))));
        let mut best = hoeffding.min(bernstein);
        if self.v_low_sq > 0.0 {
            let v_low = sqrt(self.v_low_sq);
            let be = std_normal_cdf_c(shift / v_low)
                + 0.56 / self.sqrt_n * (self.rsig * self.v_up_sq + self.beta_n) / (self.v_low_sq * v_low);
            best = best.min(be);
        }
        best.clamp(0.0, 1.0)
    }
}

/// `Q_n(x)`: a tail bound for the interpolated zero-biased sum.
pub fn q_n(prob: &Problem, x: f64) -> f64 {
    QParams::new(prob, prob.n()).q(x)
}

/// All intermediate terms of [`zero_bias_tail`] at `(u, λ)`.
pub fn terms(prob: &Problem, u: f64, lambda: f64) -> ZeroBiasTerms {
    let qp = QParams::new(prob, prob.n());
    ZeroBiasTerms {
        h_lambda_u: h_u(lambda * u, u),
        h_u_u: h_u(u, u),
        delta_prime: delta_prime(u),
        q_n: qp.q(lambda * prob.sigma() * u),
        delta_n: qp.delta_n,
        v_up_sq: qp.v_up_sq,
        v_low_sq: qp.v_low_sq,
        beta_n: qp.beta_n,
    }
}

/// Shared evaluation; `None` signals a nonpositive denominator.
fn core_bound(r: f64, scale: f64, u: f64, lambda: f64, dp: f64, q: f64) -> Option<f64> {
    let denom = scale + r * dp;
    if !(denom > 0.0) {
        return None;
    }
    let tail = std_normal_cdf_c(u);
    let (h_l, h_u_u) = (h_u(lambda * u, u), h_u(u, u));
    let value = tail + r / denom * (h_l - dp * tail + (h_u_u - h_l) * q);
    Some(value.clamp(0.0, 1.0))
}

/// Bound on `P(S_n > σu + R/√n)` at a fixed `λ ∈ [0, 1]`.
///
/// Returns 1 if `σ√n + Rδ′_u ≤ 0`; use [`zero_bias_tail_flagged`] to detect
/// that case.
pub fn zero_bias_tail(prob: &Problem, u: f64, lambda: f64) -> f64 {
    zero_bias_tail_flagged(prob, u, lambda).0
}

/// [`zero_bias_tail`] together with a flag that is set when the fallback
/// value 1 was returned because the denominator was not positive.
pub fn zero_bias_tail_flagged(prob: &Problem, u: f64, lambda: f64) -> (f64, bool) {
    let qp = QParams::new(prob, prob.n());
    let q = qp.q(lambda * prob.sigma() * u);
    match core_bound(prob.r(), prob.sigma() * prob.sqrt_n(), u, lambda, delta_prime(u), q) {
        Some(v) => (v, false),
        None => (1.0, true),
    }
}

/// Bound on `P(S_n > σu√((n+1)/n) + R_σ/√n)` at a fixed `λ ∈ [0, 1]`.
pub fn alt_zero_bias_tail(prob: &Problem, u: f64, lambda: f64) -> f64 {
    alt_zero_bias_tail_flagged(prob, u, lambda).0
}

pub fn alt_zero_bias_tail_flagged(prob: &Problem, u: f64, lambda: f64) -> (f64, bool) {
    let n = prob.n();
    let qp = QParams::new(prob, n + 1);
    let ratio = sqrt(n as f64 / (n as f64 + 1.0));
    let q = qp.q(lambda * prob.sigma() * u * ratio);
    let scale = prob.sigma() * sqrt(n as f64 + 1.0);
    match core_bound(prob.r(), scale, u, lambda, delta_prime(u), q) {
        Some(v) => (v, false),
        None => (1.0, true),
    }
}

fn lambda_at(i: usize) -> f64 {
    i as f64 / (LAMBDA_GRID - 1) as f64
}

fn best_over_lambda(mut f: impl FnMut(f64) -> (f64, bool)) -> (f64, f64, bool) {
    let mut best = (1.0, 1.0, false);
    let mut any_flag = false;
    for i in 0..LAMBDA_GRID {
        let lambda = lambda_at(i);
        let (v, flag) = f(lambda);
        any_flag |= flag;
        if v < best.0 {
            best = (v, lambda, flag);
        }
    }
    (best.0, best.1, any_flag)
}

/// [`zero_bias_tail`] minimized over the `λ` grid.
pub fn zero_bias_tail_opt(prob: &Problem, u: f64) -> BoundResult {
    let (value, lambda, flag) = best_over_lambda(|l| zero_bias_tail_flagged(prob, u, l));
    BoundResult::new(value, "zero_bias")
        .with_settings(Settings { lambda: Some(lambda), ..Settings::default() })
        .with_flag(flag.then_some("nonpositive zero-bias denominator"))
}

/// [`alt_zero_bias_tail`] minimized over the `λ` grid.
pub fn alt_zero_bias_tail_opt(prob: &Problem, u: f64) -> BoundResult {
    let (value, lambda, flag) = best_over_lambda(|l| alt_zero_bias_tail_flagged(prob, u, l));
    BoundResult::new(value, "zero_bias_alt")
        .with_settings(Settings { lambda: Some(lambda), ..Settings::default() })
        .with_flag(flag.then_some("nonpositive zero-bias denominator"))
}

/// Bound on `P(S_n > t)` from both zero-bias variants.
///
/// Each variant is solved for the `u ≥ 0` placing its threshold at `t`; a
/// variant with no such `u` is skipped, and 1 is returned if neither applies.
pub fn zero_bias_tail_at_threshold(prob: &Problem, t: f64) -> BoundResult {
    let sigma = prob.sigma();
    let sqrt_n = prob.sqrt_n();
    let n = prob.n() as f64;
    let mut best = BoundResult::new(1.0, "trivial");

    let u_main = (t - prob.r() / sqrt_n) / sigma;
    if u_main >= 0.0 {
        best = best.min(zero_bias_tail_opt(prob, u_main));
    }
    let u_alt = (t - prob.derived().rsig / sqrt_n) / sigma * sqrt(n / (n + 1.0));
    if u_alt >= 0.0 {
        best = best.min(alt_zero_bias_tail_opt(prob, u_alt));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    // Direct evaluation of the defining formula; fine for moderate arguments.
    fn h_direct(w: f64, u: f64) -> f64 {
        (w + (1.0 + w * w) * SQRT_2PI * exp(0.5 * w * w) * std_normal_cdf(w)) * std_normal_cdf_c(u)
    }

    #[test]
    fn h_u_special_values() {
        let half_pi_root = sqrt(core::f64::consts::FRAC_PI_2);
        assert!((h_u(0.0, 2.0) - half_pi_root * std_normal_cdf_c(2.0)).abs() < 1e-15);
        assert!((h_u(0.0, 0.0) - 0.5 * half_pi_root).abs() < 1e-15);
        assert!((h_u(0.0, 0.0) - 0.626_657_068_657_750_1).abs() < 1e-14);
        for &(w, u) in &[(1.0, 1.0), (0.5, 3.0), (2.5, 4.0), (3.0, 3.0)] {
            let d = h_direct(w, u);
            assert!((h_u(w, u) - d).abs() < 1e-13 * d, "w={w} u={u}");
        }
    }

    #[test]
    fn h_u_finite_far_out() {
        let v = h_u(39.0, 40.0);
        assert!(v.is_finite() && v > 0.0);
        let v = h_u(40.0, 40.0);
        // Asymptotically h_u(u) ≈ u^2·√(2π)·φ(u)/u·e^{u²/2} → about u.
        assert!(v > 30.0 && v < 50.0);
    }

    #[test]
    fn b_growth_values() {
        assert!((b_growth(0.0) - sqrt(core::f64::consts::FRAC_PI_2)).abs() < 1e-15);
        assert!(b_growth(1e8) < 1e-7);
        let mut prev = b_growth(0.0);
        for i in 1..200 {
            let v = b_growth(i as f64 * 0.1);
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn delta_prime_vanishes_at_zero() {
        assert!(delta_prime(0.0).abs() < 1e-15);
    }

    #[test]
    fn q_n_is_min_of_branches() {
        let prob = Problem::new(100, 1.0, 0.25).unwrap();
        let t = terms(&prob, 0.0, 0.0);
        let x = 0.5;
        let pos = x - t.delta_n;
        let b1 = exp(-2.0 * pos * pos);
        let rsig = prob.derived().rsig;
        let b2 = exp(-pos * pos / (2.0 * (t.v_up_sq + rsig * pos / 30.0)));
        let vl = sqrt(t.v_low_sq);
        let b3 = std_normal_cdf_c(pos / vl) + 0.056 * (rsig * t.v_up_sq + t.beta_n) / (vl * vl * vl);
        let q = q_n(&prob, x);
        assert!((q - b1.min(b2).min(b3).min(1.0)).abs() < 1e-15);
        // Below Δ_n the first two branches are 1.
        assert!(q_n(&prob, 0.0) <= 1.0);
    }

    #[test]
    fn lambda_one_drops_q_term() {
        let prob = Problem::new(400, 1.0, 0.5).unwrap();
        let u = 2.0;
        let dp = delta_prime(u);
        let expect = std_normal_cdf_c(u) + 1.0 / (0.5 * 20.0 + dp) * (h_u(u, u) - dp * std_normal_cdf_c(u));
        assert!((zero_bias_tail(&prob, u, 1.0) - expect).abs() < 1e-14);
    }

    #[test]
    fn threshold_below_both_minimums_is_trivial() {
        let prob = Problem::new(100, 1.0, 0.3).unwrap();
        let r = zero_bias_tail_at_threshold(&prob, 0.05);
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn optimized_lambda_never_worse_than_lambda_one() {
        let prob = Problem::new(1000, 1.0, 0.25).unwrap();
        for i in 0..30 {
            let u = i as f64 * 0.2;
            let opt = zero_bias_tail_opt(&prob, u).value;
            assert!(opt <= zero_bias_tail(&prob, u, 1.0));
        }
    }
}
