use libm::{erfc, exp, fabs, lgamma, log, log1p, round, sqrt};

use crate::error::{Error, Result};

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const SQRT_FRAC_PI_2: f64 = 1.253_314_137_315_500_3;
const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density φ(x).
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * exp(-0.5 * x * x)
}

/// Φ(x).
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Φ^c(x) = 1 − Φ(x), accurate to full relative precision in the upper tail.
#[inline]
pub fn std_normal_cdf_c(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Scaled complementary error function `exp(x²)·erfc(x)`.
///
/// Direct product below 4, a Laplace continued fraction above; the
/// continued fraction never forms `exp(x²)`, so large arguments are safe.
pub fn erfcx(x: f64) -> f64 {
    if x < 4.0 {
        if x < -26.0 {
            return f64::INFINITY;
        }
        return exp(x * x) * erfc(x);
    }
    // erfc(x) = exp(-x²)/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    // evaluated with the modified Lentz algorithm.
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d == 0.0 {
            d = tiny;
        }
        c = x + a / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if fabs(delta - 1.0) < 1e-16 {
            break;
        }
    }
    FRAC_1_SQRT_PI / f
}

/// Mills ratio `Φ^c(x)/φ(x)`, finite for every `x ≥ -26`.
#[inline]
pub fn mills_ratio(x: f64) -> f64 {
    SQRT_FRAC_PI_2 * erfcx(x * FRAC_1_SQRT_2)
}

/// `log Φ^c(x)` without underflow for large `x`.
pub fn log_std_normal_cdf_c(x: f64) -> f64 {
    if x < 5.0 {
        log(std_normal_cdf_c(x))
    } else {
        log(0.5 * erfcx(x * FRAC_1_SQRT_2)) - 0.5 * x * x
    }
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    lgamma(x)
}

// Acklam's rational approximation; refined below with Halley steps.
fn acklam_lower(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    if p < 0.02425 {
        let q = sqrt(-2.0 * log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Solves Φ(x) = p for p ≤ 1/2, where Φ(x) is evaluated without cancellation.
fn quantile_lower(p: f64) -> f64 {
    let mut x = acklam_lower(p);
    for _ in 0..3 {
        let pdf = std_normal_pdf(x);
        if pdf == 0.0 {
            break;
        }
        let e = (std_normal_cdf(x) - p) / pdf;
        let step = e / (1.0 + 0.5 * x * e);
        x -= step;
        if fabs(step) <= 1e-16 * fabs(x) {
            break;
        }
    }
    x
}

/// Φ⁻¹(p) for p ∈ (0, 1).
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain("normal quantile requires p in (0, 1)"));
    }
    Ok(if p <= 0.5 { quantile_lower(p) } else { -quantile_lower(1.0 - p) })
}

/// Φ⁻¹(1 − q), accurate when `q` is tiny (no `1 − q` rounding).
pub fn std_normal_quantile_upper(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain("upper normal quantile requires q in (0, 1)"));
    }
    Ok(if q <= 0.5 { -quantile_lower(q) } else { quantile_lower(1.0 - q) })
}

/// ‖Z‖_p = √2 (Γ((p+1)/2)/√π)^{1/p} for a standard normal Z.
pub fn normal_pnorm(p: f64) -> f64 {
    let log_moment = lgamma(0.5 * (p + 1.0)) - 0.5 * log(core::f64::consts::PI);
    core::f64::consts::SQRT_2 * exp(log_moment / p)
}

/// Upper bound √(k!)·(p−1)^{k/2} on the p-norm of the k-th Hermite polynomial
/// of a standard normal.
pub fn hermite_moment_bound(k: u32, p: f64) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::Domain("hermite moment bound requires p >= 1"));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let log_value = 0.5 * lgamma(k as f64 + 1.0) + 0.5 * k as f64 * log(p - 1.0);
    let value = exp(log_value);
    if value.is_infinite() {
        return Err(Error::Overflow("hermite moment bound"));
    }
    Ok(value)
}

// Loader's saddle-point pieces for an accurate binomial log-pmf at large n.
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return lgamma(n + 1.0) - (n + 0.5) * log(n) + n - LN_SQRT_2PI;
    }
    let nn = n * n;
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
}

fn bd0(x: f64, np: f64) -> f64 {
    if fabs(x - np) < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * log(x / np) + np - x
    }
}

fn binomial_log_pmf(k: u64, n: u64, q: f64) -> f64 {
    let (kf, nf) = (k as f64, n as f64);
    if k == 0 {
        return nf * log1p(-q);
    }
    if k == n {
        return nf * log(q);
    }
    let lc = stirlerr(nf) - stirlerr(kf) - stirlerr(nf - kf) - bd0(kf, nf * q) - bd0(nf - kf, nf * (1.0 - q));
    lc - 0.5 * (2.0 * LN_SQRT_2PI + log(kf) + log1p(-kf / nf))
}

/// ‖Binomial(n, q)‖_p = (E V^p)^{1/p}.
///
/// The summands `P(V = k)·k^p` are log-concave in `k`, so the sum is
/// accumulated outward from its largest term and each side is closed with the
/// geometric bound `t·r/(1−r)` once terms fall below `1e-20` of the running
/// total. The result is therefore never below the exact norm.
pub fn binomial_pnorm(n: u64, q: f64, p: f64) -> f64 {
    if n == 0 || q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return n as f64;
    }
    let log_term = |k: u64| binomial_log_pmf(k, n, q) + p * log(k as f64);

    // Locate the peak of k ↦ P(V = k)·k^p by hill climbing from the mean.
    let mut peak = (round(n as f64 * q) as u64).clamp(1, n);
    let mut peak_val = log_term(peak);
    while peak < n {
        let next = log_term(peak + 1);
        if next <= peak_val {
            break;
        }
        peak += 1;
        peak_val = next;
    }
    while peak > 1 {
        let prev = log_term(peak - 1);
        if prev <= peak_val {
            break;
        }
        peak -= 1;
        peak_val = prev;
    }

    // Relative sums, scaled by exp(peak_val).
    let mut total = 1.0;
    const CUTOFF: f64 = 1e-20;

    let mut prev_rel = 1.0;
    let mut k = peak;
    while k < n {
        k += 1;
        let rel = exp(log_term(k) - peak_val);
        total += rel;
        if rel < CUTOFF * total {
            let ratio = rel / prev_rel;
            if ratio < 1.0 {
                total += rel * ratio / (1.0 - ratio);
                break;
            }
        }
        prev_rel = rel;
    }

    let mut prev_rel = 1.0;
    let mut k = peak;
    while k > 1 {
        k -= 1;
        let rel = exp(log_term(k) - peak_val);
        total += rel;
        if rel < CUTOFF * total {
            let ratio = rel / prev_rel;
            if ratio < 1.0 {
                total += rel * ratio / (1.0 - ratio);
                break;
            }
        }
        prev_rel = rel;
    }

    exp((peak_val + log(total)) / p)
}
