//! Quantile bounds when `σ` is unknown.
//!
//! A Kolmogorov-Smirnov band around the empirical distribution yields a
//! bracket `[σ̂_ℓ, σ̂_u]` containing `σ` with probability at least `1 − a`.
//! Any known-variance quantile bound at level `δ − a`, maximized over the
//! bracket, is then a valid bound at level `δ`.

use libm::{ceil as ceil_f, exp, floor as floor_f, log, round as round_f, sqrt};

use crate::classical::{BoundResult, Sided};
use crate::error::{Error, Result};
use crate::model::{rsig, Problem};
use crate::numerics::{minimize_scalar, std_normal_quantile_upper, Tolerance, GRID_POINTS};
use crate::wasserstein::OmegaProvider;

/// Sample size, mean and `1/n`-normalized variance of a sample in `[0, R]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub n: u64,
    pub mean: f64,
    pub emp_var: f64,
}

impl SampleSummary {
    pub fn new(n: u64, mean: f64, emp_var: f64, r: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("sample must be nonempty"));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain("support length R must be positive and finite"));
        }
        if !(0.0..=r).contains(&mean) {
            return Err(Error::Domain("sample mean must lie in [0, R]"));
        }
        if !(emp_var >= 0.0 && emp_var <= 0.25 * r * r * (1.0 + 1e-12)) {
            return Err(Error::Domain("empirical variance must lie in [0, R²/4]"));
        }
        Ok(Self { n, mean, emp_var: emp_var.min(0.25 * r * r) })
    }

    /// Summary of `data`, rejecting values outside `[0, R]`.
    pub fn from_data(data: &[f64], r: f64) -> Result<Self> {
        if data.iter().any(|&x| !(0.0..=r).contains(&x)) {
            return Err(Error::Domain("data must lie in [0, R]"));
        }
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let var = data.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Self::new(data.len() as u64, mean.clamp(0.0, r), var, r)
    }

    #[inline]
    pub fn emp_sd(&self) -> f64 {
        sqrt(self.emp_var)
    }
}

/// Upper `α` quantiles of the one- and two-sided Kolmogorov statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsQuantiles {
    pub one_sided: f64,
    pub two_sided: f64,
}

/// `[σ̂_ℓ, σ̂_u]` with the confidence `a` it spends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceBracket {
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub a: f64,
}

/// DKW bound on the upper `α` quantile of the Kolmogorov statistic:
/// `√(log(2/α)/(2n))` two-sided and `√(log(1/α)/(2n))` one-sided.
pub fn ks_quantile(n: u64, alpha: f64, sided: Sided) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("sample must be nonempty"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain("alpha must lie in (0, 1)"));
    }
    let l = match sided {
        Sided::One => log(1.0 / alpha),
        Sided::Two => log(2.0 / alpha),
    };
    Ok(sqrt(l / (2.0 * n as f64)))
}

/// Both Kolmogorov quantiles at level `a/2`.
pub fn ks_quantiles(n: u64, a: f64) -> Result<KsQuantiles> {
    Ok(KsQuantiles { one_sided: ks_quantile(n, 0.5 * a, Sided::One)?, two_sided: ks_quantile(n, 0.5 * a, Sided::Two)? })
}

/// `σ̂_ℓ = √max(0, ¼R² − ¼((Rq + √(R² − 4(1−q)σ̂²))/(1−q))²)`.
pub fn sigma_lower(r: f64, emp_var: f64, ks_two: f64) -> f64 {
    if !(ks_two < 1.0) {
        return 0.0;
    }
    let q = ks_two.max(0.0);
    let root = sqrt((r * r - 4.0 * (1.0 - q) * emp_var).max(0.0));
    let t = (r * q + root) / (1.0 - q);
    sqrt((0.25 * r * r - 0.25 * t * t).max(0.0))
}

/// `σ̂_u = min(σ̂_{u,1}, σ̂_{u,2})`, clamped at `R/2`.
pub fn sigma_upper(r: f64, summary: &SampleSummary, ks: &KsQuantiles, a: f64, sided: Sided) -> Result<f64> {
    if summary.n < 2 {
        return Err(Error::Domain("variance upper bound requires n >= 2"));
    }
    let n = summary.n as f64;
    let sd = summary.emp_sd();
    let upper1 = sqrt(n / (n - 1.0)) * sd + r * sqrt(2.0 * log(2.0 / a) / (n - 1.0));
    let lo = sigma_lower(r, summary.emp_var, ks.two_sided);
    let rs = rsig(r, lo.max(f64::MIN_POSITIVE).min(0.5 * r))?;
    let extra = match sided {
        Sided::One => r * ks.one_sided,
        Sided::Two => r * ks.two_sided,
    };
    let upper2 = sqrt(summary.emp_var + rs * rs * ks.two_sided + extra * extra);
    Ok(upper1.min(upper2).min(0.5 * r))
}

pub fn variance_bracket(summary: &SampleSummary, r: f64, a: f64, sided: Sided) -> Result<VarianceBracket> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain("a must lie in (0, 1)"));
    }
    let ks = ks_quantiles(summary.n, a)?;
    let sigma_lo = sigma_lower(r, summary.emp_var, ks.two_sided).min(0.5 * r);
    let sigma_hi = sigma_upper(r, summary, &ks, a, sided)?;
    Ok(VarianceBracket { sigma_lo, sigma_hi, a })
}

/// `a = (δ/√n)Φ^{-1}(1−δ)` one-sided or `(δ/√n)Φ^{-1}(1−δ/2)` two-sided.
///
/// Returns `δ/2` with the flag set when the formula would reach `δ`.
pub fn default_a(delta: f64, n: u64, sided: Sided) -> Result<(f64, bool)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain("delta must lie in (0, 1)"));
    }
    if n == 0 {
        return Err(Error::Domain("sample must be nonempty"));
    }
    let z = match sided {
        Sided::One => std_normal_quantile_upper(delta)?,
        Sided::Two => std_normal_quantile_upper(0.5 * delta)?,
    };
    let a = delta / sqrt(n as f64) * z;
    if a > 0.0 && a < delta {
        Ok((a, false))
    } else {
        Ok((0.5 * delta, true))
    }
}

// Smallest σ̃ handed to a known-variance bound; a σ̃ of exactly zero is not
// an admissible problem.
const SIGMA_FLOOR_REL: f64 = 1e-6;

/// How the supremum over `σ̃` is searched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaSearch {
    /// A 65-point grid on the bracket, golden-section refinement around the
    /// best grid point, and the endpoints and `σ̂`.
    Continuous,
    /// The same kind of search restricted to the lattice `σ̃ = R·ratio^i`,
    /// with the bracket widened outward to lattice points: a coarse pass on
    /// lattice indices that are multiples of a power-of-two stride plus both
    /// ends, then dyadic refinement around the best point, plus `σ̂`. Every
    /// `σ̃` handed out is a lattice value and nearby brackets share most of
    /// them, so callers can memoize `base_q` across samples.
    Lattice { ratio: f64 },
}

/// `sup_{σ̃ ∈ [σ̂_ℓ, σ̂_u]} base_q(σ̃, δ − a)` with the continuous search.
///
/// `base_q` receives the problem `(n, R, σ̃)` and the level.
pub fn empirical_quantile<F>(
    summary: &SampleSummary,
    r: f64,
    delta: f64,
    a: f64,
    sided: Sided,
    base_q: F,
) -> Result<BoundResult>
where
    F: FnMut(&Problem, f64) -> Result<BoundResult>,
{
    empirical_quantile_with(summary, r, delta, a, sided, SigmaSearch::Continuous, base_q)
}

/// [`empirical_quantile`] with an explicit [`SigmaSearch`].
pub fn empirical_quantile_with<F>(
    summary: &SampleSummary,
    r: f64,
    delta: f64,
    a: f64,
    sided: Sided,
    search: SigmaSearch,
    mut base_q: F,
) -> Result<BoundResult>
where
    F: FnMut(&Problem, f64) -> Result<BoundResult>,
{
    if !(a > 0.0 && a < delta && delta < 1.0) {
        return Err(Error::Domain("need 0 < a < delta < 1"));
    }
    let bracket = variance_bracket(summary, r, a, sided)?;
    let floor = SIGMA_FLOOR_REL * r;
    let hi = bracket.sigma_hi.max(floor);
    let lo = bracket.sigma_lo.max(floor).min(hi);
    let level = delta - a;

    let mut best: Option<BoundResult> = None;
    let mut first_err = None;
    let mut eval = |sigma: f64, best: &mut Option<BoundResult>| -> f64 {
        let res = Problem::new(summary.n, r, sigma).and_then(|p| base_q(&p, level));
        match res {
            Ok(b) => {
                if best.is_none_or(|cur| b.value > cur.value) {
                    *best = Some(b);
                }
                b.value
            }
            Err(e) => {
                first_err.get_or_insert(e);
                f64::INFINITY
            }
        }
    };

    match search {
        SigmaSearch::Continuous => {
            if hi - lo <= 1e-12 * hi {
                eval(hi, &mut best);
            } else {
                let tol = Tolerance { abs_tol: 1e-9 * r, rel_tol: 1e-7, max_iter: 100 };
                // Maximize by minimizing the negation; errors count as +∞ so they win.
                minimize_scalar(|s| -eval(s, &mut best), lo, hi, tol)?;
                for s in [lo, hi, summary.emp_sd().clamp(lo, hi)] {
                    eval(s, &mut best);
                }
            }
        }
        SigmaSearch::Lattice { ratio } => {
            if !(ratio > 1.0 && ratio.is_finite()) {
                return Err(Error::Domain("lattice ratio must exceed 1"));
            }
            let step = log(ratio);
            let cap = 0.5 * r;
            let at = |i: i64| (r * exp(i as f64 * step)).clamp(floor, cap);
            let i_lo = floor_f(log(lo / r) / step) as i64;
            let i_hi = ceil_f(log(hi / r) / step) as i64;
            let span = (i_hi - i_lo) as usize;
            let mut vals = alloc::vec![f64::NAN; span + 1];
            let mut eval_i = |i: i64, vals: &mut [f64], best: &mut Option<BoundResult>| -> f64 {
                let slot = &mut vals[(i - i_lo) as usize];
                if slot.is_nan() {
                    *slot = eval(at(i), best);
                }
                *slot
            };
            // Coarse pass on multiples of a power-of-two stride, so samples with
            // similar brackets share their evaluation points.
            let grid = (GRID_POINTS - 1) as i64;
            let stride = (((i_hi - i_lo) + grid - 1) / grid).max(1).unsigned_abs().next_power_of_two() as i64;
            let mut points = alloc::vec![i_lo];
            let mut i = (i_lo.div_euclid(stride) + 1) * stride;
            while i < i_hi {
                points.push(i);
                i += stride;
            }
            points.push(i_hi);
            let mut best_i = i_lo;
            let mut best_v = f64::NEG_INFINITY;
            for &i in &points {
                let v = eval_i(i, &mut vals, &mut best);
                if v > best_v {
                    best_v = v;
                    best_i = i;
                }
            }
            // Dyadic refinement around the best point, on aligned indices.
            let mut half = stride / 2;
            while half >= 1 {
                let centre = best_i;
                for i in [centre - half, centre + half] {
                    if (i_lo..=i_hi).contains(&i) {
                        let v = eval_i(i, &mut vals, &mut best);
                        if v > best_v {
                            best_v = v;
                            best_i = i;
                        }
                    }
                }
                half /= 2;
            }
            let i_hat = round_f(log(summary.emp_sd().clamp(lo, hi) / r) / step) as i64;
            eval_i(i_hat.clamp(i_lo, i_hi), &mut vals, &mut best);
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    best.ok_or(Error::Domain("empty variance bracket"))
}

/// The empirical Berry-Esseen quantile: [`empirical_quantile`] over the
/// efficient known-variance quantile with default auxiliaries, at the
/// default `a`.
pub fn efficient_ebe_quantile<O: OmegaProvider>(
    summary: &SampleSummary,
    r: f64,
    delta: f64,
    sided: Sided,
    provider: &O,
) -> Result<BoundResult> {
    efficient_ebe_quantile_with(summary, r, delta, sided, SigmaSearch::Continuous, provider)
}

/// [`efficient_ebe_quantile`] with an explicit [`SigmaSearch`].
pub fn efficient_ebe_quantile_with<O: OmegaProvider>(
    summary: &SampleSummary,
    r: f64,
    delta: f64,
    sided: Sided,
    search: SigmaSearch,
    provider: &O,
) -> Result<BoundResult> {
    ebe_quantile_with(summary, r, delta, sided, search, |p, level| provider.quantile(p, level, sided))
}

/// The empirical Berry-Esseen quantile at the default `a` over a caller-supplied
/// known-variance quantile `base_q`.
pub fn ebe_quantile_with<F>(
    summary: &SampleSummary,
    r: f64,
    delta: f64,
    sided: Sided,
    search: SigmaSearch,
    base_q: F,
) -> Result<BoundResult>
where
    F: FnMut(&Problem, f64) -> Result<BoundResult>,
{
    let (a, flagged) = default_a(delta, summary.n, sided)?;
    let mut res = empirical_quantile_with(summary, r, delta, a, sided, search, base_q)?;
    res.winner = "ebe";
    if flagged {
        res.flag = Some("default a clamped to delta/2");
    }
    Ok(res)
}

/// One-sided empirical Bernstein quantile
/// `σ̂√(log(2/δ)·n/(n−1)) + (7/3)R log(2/δ)·√n/(n−1)`.
pub fn empirical_bernstein_quantile(summary: &SampleSummary, r: f64, delta: f64) -> Result<f64> {
    if summary.n < 2 {
        return Err(Error::Domain("empirical Bernstein requires n >= 2"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain("delta must lie in (0, 1)"));
    }
    let n = summary.n as f64;
    let l = log(2.0 / delta);
    Ok(summary.emp_sd() * sqrt(l * n / (n - 1.0)) + 7.0 / 3.0 * r * l * sqrt(n) / (n - 1.0))
}
