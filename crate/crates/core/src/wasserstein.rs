//! A computable bound `ω_p^R(σ)` on `W_p(S_n, N(0, σ²))/σ` and the tail and
//! quantile bounds built on it.
//!
//! For `p ≥ 2`, `ω_p^R` is an infimum over a time cutoff `κ > R̃²/n` and a
//! series truncation index `K_p`. Every `(κ, K_p)` gives a valid bound, so the
//! search below affects tightness only.

use alloc::vec::Vec;

use libm::{acos, exp, expm1, lgamma, log, pow, round, sqrt};

use crate::classical::{default_onetail, default_quantile, default_twotail, BoundResult, Settings, Sided};
use crate::error::{Error, Result};
use crate::model::Problem;
use crate::numerics::{
    binomial_pnorm, hermite_moment_bound, integrate_vec, minimize_scalar, minimize_scalar_grid, normal_pnorm,
    std_normal_cdf_c, std_normal_pdf, std_normal_quantile_upper, Tolerance,
};

/// Grid size of the coarse scan over `log κ`.
pub const KAPPA_GRID_POINTS: usize = 17;

/// Largest series truncation index tried.
pub const K_MAX: u32 = 40;

/// Exponents tried in the tail and quantile infima (those above `n + 1` are
/// dropped).
pub const P_CANDIDATES: [u32; 12] = [1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64];

const E_19_300: f64 = 1.065_361_846_235_423_6; // e^{19/300}
const PI_QUARTER_ROOT: f64 = 1.331_335_363_800_389_7; // π^{1/4}
const SQRT_E: f64 = 1.648_721_270_700_128_1;
const SQRT_3: f64 = 1.732_050_807_568_877_2;
const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// The constant family entering `ω_p^{R,κ}` for one `(n, p, κ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WassersteinConstants {
    pub a_p: f64,
    pub a_star: f64,
    pub a_tilde: f64,
    pub u_np: f64,
    pub u_tilde: f64,
    pub c_np: f64,
    /// Which candidate achieved `C_{n,p}`: 1, 2 or 3.
    pub c_branch: u8,
    pub d_np: f64,
    /// Which candidate achieved `D_{n,p}`: 1 to 4.
    pub d_branch: u8,
    pub b_pn: f64,
    pub m_nk: f64,
}

/// Value of `ω_p^R` with the `(κ, K_p)` that achieved it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaValue {
    pub value: f64,
    pub kappa: Option<f64>,
    pub k_p: Option<u32>,
}

// The κ-independent part of the constants.
#[derive(Debug, Clone)]
struct PConstants {
    p: u32,
    pf: f64,
    n: f64,
    sqrt_n: f64,
    tilde_r: f64,
    // R̃_σ² − 1.
    xm1: f64,
    z_norm: f64,
    a_p: f64,
    a_star: f64,
    a_tilde: f64,
    u_np: f64,
    u_tilde: f64,
    c_np: f64,
    c_branch: u8,
    d_np: f64,
    d_branch: u8,
    b_pn: f64,
}

fn argmin(values: &[f64]) -> (f64, u8) {
    let mut best = (f64::INFINITY, 0u8);
    for (i, &v) in values.iter().enumerate() {
        if v < best.0 {
            best = (v, i as u8 + 1);
        }
    }
    best
}

impl PConstants {
    fn new(prob: &Problem, p: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::Domain("constants require p >= 2"));
        }
        let pf = p as f64;
        let nn = prob.n();
        let n = nn as f64;
        let sqrt_n = sqrt(n);
        let d = prob.derived();
        let tilde_r = d.tilde_r;
        let x = d.tilde_rsig * d.tilde_rsig;
        let xm1 = (x - 1.0).max(0.0);
        let z_norm = normal_pnorm(pf);
        let inv_p = 1.0 / pf;
        let two_inv_p = pow(2.0, inv_p);

        let a_p = SQRT_E * sqrt(pf + 2.0) * pow(2.0 * core::f64::consts::E, inv_p) / SQRT_2;
        let a_star = (pf + 2.0) * pow(n, inv_p) / (2.0 * sqrt_n);
        let a_tilde = a_star * pow(tilde_r, -2.0 * inv_p);
        let u_np = a_p + tilde_r * a_tilde;
        let u_tilde = SQRT_2 * a_p + two_inv_p * tilde_r * a_tilde;

        let mut c_cands = Vec::with_capacity(3);
        c_cands.push(a_tilde * tilde_r * two_inv_p + SQRT_2 * a_p);
        c_cands.push(z_norm * two_inv_p * pow(tilde_r, 1.0 - 2.0 * inv_p));
        if p >= 4 {
            let bin = binomial_pnorm(nn, 2.0 / (tilde_r * tilde_r), 0.5 * pf);
            c_cands.push(z_norm * tilde_r / sqrt_n * sqrt(bin));
        }
        let (c_np, c_branch) = argmin(&c_cands);

        let d_np;
        let d_branch;
        if xm1 == 0.0 {
            d_np = 0.0;
            d_branch = 1;
        } else {
            let m = pow(xm1, 1.0 - inv_p).max(pow((pow(xm1, pf) + xm1) / x, inv_p));
            let mut d_cands = Vec::with_capacity(4);
            d_cands.push(sqrt(pf - 1.0) * m);
            d_cands.push(m * a_star + sqrt(xm1) * a_p);
            d_cands.push(z_norm * pow(d.tilde_rsig, 2.0 * (1.0 - 2.0 * inv_p)) * pow(xm1, inv_p));
            if p >= 4 {
                let bin = binomial_pnorm(nn, (2.0 * xm1 / (x * x)).min(1.0), 0.5 * pf);
                d_cands.push(z_norm / two_inv_p * tilde_r * tilde_r / sqrt_n * sqrt(bin));
            }
            let (v, b) = argmin(&d_cands);
            d_np = v / (2.0 * sqrt_n);
            d_branch = b;
        }

        let b_bin = tilde_r * tilde_r / n * binomial_pnorm(nn, 2.0 / (tilde_r * tilde_r), pf);
        let b_pn = b_bin.min(1.0 + u_tilde * tilde_r / sqrt_n);

        Ok(Self {
            p,
            pf,
            n,
            sqrt_n,
            tilde_r,
            xm1,
            z_norm,
            a_p,
            a_star,
            a_tilde,
            u_np,
            u_tilde,
            c_np,
            c_branch,
            d_np,
            d_branch,
            b_pn,
        })
    }

    fn check_kappa(&self, kappa: f64) -> Result<f64> {
        let floor = self.tilde_r * self.tilde_r / self.n;
        if !(kappa > floor && kappa.is_finite()) {
            return Err(Error::Domain("kappa must exceed R̃²/n"));
        }
        Ok(sqrt(1.0 - floor / kappa))
    }

    fn b21(&self, m: f64) -> f64 {
        self.z_norm * self.d_np * m * m
    }

    fn b22(&self) -> f64 {
        sqrt(self.pf - 1.0) / (2.0 * self.sqrt_n)
            * (pow(self.xm1.max(1.0), 1.0 - 1.0 / self.pf) * self.a_star + sqrt(self.xm1) * self.a_p)
    }

    fn b32(&self, kappa: f64, m: f64) -> f64 {
        let e = expm1(0.5 * (self.pf - 1.0) * kappa * m * m);
        let tr = self.tilde_r;
        let first = tr * (1.0 + tr * self.u_tilde / self.sqrt_n) / sqrt(self.n * kappa)
            * PI_QUARTER_ROOT
            * E_19_300
            * sqrt(self.pf - 1.0)
            / (4.0 * SQRT_3)
            * e;
        let second =
            self.c_np * tr * tr / (3.0 * self.n * kappa) * E_19_300 * PI_QUARTER_ROOT * e * log((1.0 + m) / (1.0 - m));
        first + second
    }

    /// `[G_1..G_{K−1}, H_1..H_{K−1}, J_B, J_C]` with `K = K_MAX`, where
    /// `G_k = 2∫g^k w`, `H_k = 2∫g^k`, `J_B = 2∫w(e^z − 1)`, `J_C = 2∫(e^z − 1)`
    /// over `x ∈ [0, M]`, `g = R̃²x²/(n(1−x²))`, `w = x/√(1−x²)`, `z = (p−1)g/2`.
    ///
    /// Evaluated in `τ = log(1 − x²) ∈ [log(1 − M²), 0]`, where every
    /// integrand is smooth even when `M` is within `1e-8` of one.
    fn b31_integrals(&self, m: f64, tol: Tolerance) -> Result<Vec<f64>> {
        let kk = (K_MAX - 1) as usize;
        let dim = 2 * kk + 2;
        let scale = self.tilde_r * self.tilde_r / self.n;
        let half_pm1 = 0.5 * (self.pf - 1.0);
        let tau_lo = log((1.0 - m) * (1.0 + m));
        integrate_vec(
            |tau, out| {
                let v = exp(tau);
                let omv = -expm1(tau);
                let g = scale * omv / v;
                let (sv, h_weight) = (sqrt(v), v / sqrt(omv));
                let mut gk = 1.0;
                for k in 0..kk {
                    gk *= g;
                    out[k] = gk * sv;
                    out[kk + k] = gk * h_weight;
                }
                let ez = expm1(half_pm1 * g);
                out[2 * kk] = ez * sv;
                out[2 * kk + 1] = ez * h_weight;
            },
            dim,
            tau_lo,
            0.0,
            tol,
        )
    }

    /// `b_{3,1}` for every `K_p ∈ 1..=K_MAX`, given the integrals.
    fn b31_all(&self, ints: &[f64]) -> Result<Vec<f64>> {
        let kk = (K_MAX - 1) as usize;
        let pm1 = self.pf - 1.0;
        let log_pm1 = log(pm1);
        let sqrt_pm1 = sqrt(pm1);
        let (jb, jc) = (ints[2 * kk], ints[2 * kk + 1]);
        let mut hb = Vec::with_capacity(kk);
        let mut hc = Vec::with_capacity(kk);
        let mut sub_b = Vec::with_capacity(kk);
        let mut sub_c = Vec::with_capacity(kk);
        for k in 1..=kk as u32 {
            let kf = k as f64;
            hb.push(hermite_moment_bound(2 * k + 1, self.pf)? * exp(-lgamma(2.0 * kf + 3.0)));
            hc.push(hermite_moment_bound(2 * k, self.pf)? * exp(-lgamma(2.0 * kf + 2.0)));
            // Series terms of the exponential remainders, without the K-dependent factor.
            let common = -kf * core::f64::consts::LN_2 + kf * log_pm1 - lgamma(kf + 1.0);
            sub_b.push(0.5 * sqrt_pm1 * exp(common));
            sub_c.push(exp(common));
        }
        let mut out = Vec::with_capacity(K_MAX as usize);
        for big_k in 1..=K_MAX {
            let kf = big_k as f64;
            let base = E_19_300 * PI_QUARTER_ROOT * pow(kf, 0.25);
            let c_b = base / ((kf + 1.0) * sqrt(2.0 * kf + 1.0));
            let c_c = base / (2.0 * kf + 1.0);
            let mut sum_b = 0.0;
            let mut sum_c = 0.0;
            for k in 0..(big_k as usize - 1) {
                sum_b += (hb[k] - c_b * sub_b[k]) * ints[k];
                sum_c += (hc[k] - c_c * sub_c[k]) * ints[kk + k];
            }
            let value =
                0.5 * self.b_pn * sum_b + 0.25 * self.b_pn * c_b * sqrt_pm1 * jb + 0.5 * self.c_np * (sum_c + c_c * jc);
            out.push(if value.is_nan() { f64::INFINITY } else { value.max(0.0) });
        }
        Ok(out)
    }

    // (‖Z‖_p acos(M) + b2 + b3)·(1/M if p > 2).
    fn assemble(&self, m: f64, b2: f64, b3: f64) -> f64 {
        let core = self.z_norm * acos(m) + b2 + b3;
        if self.p > 2 {
            core / m
        } else {
            core
        }
    }

    /// Tight bound at `κ`, minimized over `K_p`.
    fn omega_kappa_best(&self, kappa: f64, tol: Tolerance) -> Result<(f64, u32)> {
        let m = self.check_kappa(kappa)?;
        let ints = self.b31_integrals(m, tol)?;
        let all = self.b31_all(&ints)?;
        let (b3, k) =
            all.iter()
                .enumerate()
                .fold((f64::INFINITY, 1u32), |acc, (i, &v)| if v < acc.0 { (v, i as u32 + 1) } else { acc });
        Ok((self.assemble(m, self.b21(m), b3), k))
    }
}

/// Quadrature settings for the `b_{3,1}` integrals.
pub fn default_quad_tolerance() -> Tolerance {
    Tolerance { abs_tol: 1e-300, rel_tol: 1e-9, max_iter: 400 }
}

/// The constant family at `(p, κ)`.
pub fn constants(prob: &Problem, p: u32, kappa: f64) -> Result<WassersteinConstants> {
    let pc = PConstants::new(prob, p)?;
    let m = pc.check_kappa(kappa)?;
    Ok(WassersteinConstants {
        a_p: pc.a_p,
        a_star: pc.a_star,
        a_tilde: pc.a_tilde,
        u_np: pc.u_np,
        u_tilde: pc.u_tilde,
        c_np: pc.c_np,
        c_branch: pc.c_branch,
        d_np: pc.d_np,
        d_branch: pc.d_branch,
        b_pn: pc.b_pn,
        m_nk: m,
    })
}

pub fn b21(prob: &Problem, p: u32, kappa: f64) -> Result<f64> {
    let pc = PConstants::new(prob, p)?;
    let m = pc.check_kappa(kappa)?;
    Ok(pc.b21(m))
}

pub fn b22(prob: &Problem, p: u32) -> Result<f64> {
    Ok(PConstants::new(prob, p)?.b22())
}

pub fn b31(prob: &Problem, p: u32, kappa: f64, k_p: u32) -> Result<f64> {
    if !(1..=K_MAX).contains(&k_p) {
        return Err(Error::Domain("truncation index must lie in 1..=40"));
    }
    let pc = PConstants::new(prob, p)?;
    let m = pc.check_kappa(kappa)?;
    let ints = pc.b31_integrals(m, default_quad_tolerance())?;
    Ok(pc.b31_all(&ints)?[k_p as usize - 1])
}

pub fn b32(prob: &Problem, p: u32, kappa: f64) -> Result<f64> {
    let pc = PConstants::new(prob, p)?;
    let m = pc.check_kappa(kappa)?;
    Ok(pc.b32(kappa, m))
}

/// `ω_p^{R,κ}` at a fixed `K_p`, or the looser `ω_p^{R,κ,2}` when `loose`.
pub fn omega_kappa(prob: &Problem, p: u32, kappa: f64, k_p: u32, loose: bool) -> Result<f64> {
    let pc = PConstants::new(prob, p)?;
    let m = pc.check_kappa(kappa)?;
    if loose {
        return Ok(pc.assemble(m, pc.b22(), pc.b32(kappa, m)));
    }
    Ok(pc.assemble(m, pc.b21(m), b31(prob, p, kappa, k_p)?))
}

/// `ω_p^R`: exact for `p = 1`, otherwise minimized over `κ` and `K_p`.
pub fn omega(prob: &Problem, p: u32) -> Result<OmegaValue> {
    omega_with(prob, p, default_quad_tolerance())
}

pub fn omega_with(prob: &Problem, p: u32, tol: Tolerance) -> Result<OmegaValue> {
    if p == 0 {
        return Err(Error::Domain("p must be at least 1"));
    }
    if p == 1 {
        return Ok(OmegaValue { value: prob.derived().tilde_rsig / prob.sqrt_n(), kappa: None, k_p: None });
    }
    if p as u64 > prob.n() + 1 {
        return Err(Error::Domain("p must not exceed n + 1"));
    }
    let pc = PConstants::new(prob, p)?;
    let tr2 = pc.tilde_r * pc.tilde_r;
    let kappa0 = tr2 / (pc.pf - 1.0).max(1.0);
    let lo = log(1.0001 * tr2 / pc.n);
    let hi = log(100.0 * kappa0.max(tr2));
    let mut eval = |log_kappa: f64| match pc.omega_kappa_best(exp(log_kappa), tol) {
        Ok((v, _)) if v.is_finite() => v,
        _ => f64::INFINITY,
    };
    // ω is flat near its minimum in log κ; a coarse scan suffices.
    let search = Tolerance { abs_tol: 1e-4, rel_tol: 1e-4, max_iter: 100 };
    let mut best = minimize_scalar_grid(&mut eval, lo, hi, KAPPA_GRID_POINTS, search)?;
    let at_kappa0 = eval(log(kappa0));
    if at_kappa0 < best.value {
        best.x = log(kappa0);
        best.value = at_kappa0;
    }
    if !best.value.is_finite() {
        return Err(Error::Overflow("omega"));
    }
    let kappa = exp(best.x);
    let (value, k_p) = pc.omega_kappa_best(kappa, tol)?;
    Ok(OmegaValue { value, kappa: Some(kappa), k_p: Some(k_p) })
}

/// The growth constant `K_{R,σ}` with `ω_p^R ≤ K_{R,σ} p/√n` for `p ≤ n + 1`.
pub fn k_rsig(prob: &Problem, p: u32) -> f64 {
    let pf = p as f64;
    let sigma = prob.sigma();
    let d = prob.derived();
    let tr = d.tilde_r;
    let xm1 = (d.tilde_rsig * d.tilde_rsig - 1.0).max(0.0);
    let c = PI_QUARTER_ROOT * E_19_300 / (4.0 * SQRT_3);
    let e2 = expm1(0.5 * tr * tr);
    let ap2 = SQRT_E * sqrt(2.0 * core::f64::consts::E) / SQRT_2;
    let sqrt_8pi_half = sqrt(sqrt(8.0 * core::f64::consts::PI));
    let inner = 0.75 * sigma * (sqrt(xm1) * ap2 + c * e2)
        + sigma
            * SQRT_2
            * (1.0 + log(4.0))
            * (pow(tr, 1.0 - 2.0 / pf) * sqrt_8pi_half / (3.0 * SQRT_E) * E_19_300 * PI_QUARTER_ROOT * e2)
        + 2.0 * sigma * sqrt(xm1.max(1.0)) / SQRT_2
        + sigma * tr * SQRT_E * sqrt(2.0 * core::f64::consts::E) * c * e2
        + 4.0 * sigma * pow(tr, 2.0 - 2.0 / pf) / sqrt(2.0 * prob.n() as f64) * c * e2
        + 1.0;
    tr.max(inner)
}

/// Source of `ω_p^R` values, so callers can plug in a cache.
pub trait OmegaProvider: Sized {
    fn omega(&self, prob: &Problem, p: u32) -> Result<OmegaValue>;

    /// The efficient known-variance quantile with default auxiliaries;
    /// caching providers may memoize it as a whole.
    fn quantile(&self, prob: &Problem, delta: f64, sided: Sided) -> Result<BoundResult> {
        wass_quantile_default(prob, delta, sided, self)
    }
}

/// Computes `ω_p^R` afresh on every call.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectOmega;

impl OmegaProvider for DirectOmega {
    fn omega(&self, prob: &Problem, p: u32) -> Result<OmegaValue> {
        omega(prob, p)
    }
}

fn admissible_p(prob: &Problem, extra: Option<u32>) -> Vec<u32> {
    let cap = prob.n().saturating_add(1);
    let mut ps: Vec<u32> = P_CANDIDATES.iter().copied().filter(|&p| p as u64 <= cap).collect();
    if let Some(p) = extra {
        if p >= 1 && p as u64 <= cap && !ps.contains(&p) {
            ps.push(p);
        }
    }
    ps.sort_unstable();
    ps
}

/// Consecutive exponents allowed to worsen the objective before the scan over
/// `p` stops; the objective is unimodal in `p` in every case observed.
const P_PATIENCE: u32 = 2;

struct PScan {
    best: f64,
    worse: u32,
}

impl PScan {
    fn new() -> Self {
        PScan { best: f64::INFINITY, worse: 0 }
    }

    /// Records the objective at the next `p`; returns `false` once the scan should stop.
    fn record(&mut self, value: f64) -> bool {
        if value < self.best {
            self.best = value;
            self.worse = 0;
        } else {
            self.worse += 1;
        }
        self.worse < P_PATIENCE
    }
}

/// Exponent suggested by the efficiency heuristic at standardized level `u`:
/// `p = log(√n/(K φ(u) log(√n/φ(u))))`, rounded to an admissible integer.
pub fn heuristic_p(prob: &Problem, u: f64) -> Option<u32> {
    let sqrt_n = prob.sqrt_n();
    let phi = std_normal_pdf(u);
    if !(phi > 0.0) {
        return None;
    }
    let inner_log = log(sqrt_n / phi);
    if !(inner_log > 0.0) {
        return None;
    }
    // K depends weakly on p; one fixed-point step starting from p = 2.
    let mut p = 2u32;
    for _ in 0..2 {
        let arg = sqrt_n / (k_rsig(prob, p) * phi * inner_log);
        let real = log(arg);
        if !(real.is_finite() && real >= 0.5) {
            return None;
        }
        p = (round(real) as u32).clamp(1, 64);
    }
    Some(p)
}

fn log_rho_grid_objective<F: FnMut(f64) -> f64>(mut f: F, extra_rho: Option<f64>) -> (f64, f64) {
    // Search over s = log(1 − ρ), which resolves optima with ρ close to 1.
    let lo = log(1e-12);
    let hi = log(1.0 - 1e-9);
    let mut obj = |s: f64| f(1.0 - exp(s));
    let search = Tolerance { abs_tol: 1e-9, rel_tol: 1e-9, max_iter: 200 };
    let mut best = match minimize_scalar(&mut obj, lo, hi, search) {
        Ok(m) => (m.value, 1.0 - exp(m.x)),
        Err(_) => (f64::INFINITY, 0.5),
    };
    if let Some(rho) = extra_rho {
        if rho > 0.0 && rho < 1.0 {
            let v = f(rho);
            if v < best.0 {
                best = (v, rho);
            }
        }
    }
    best
}

fn tail_with<O: OmegaProvider>(prob: &Problem, u: f64, sided: Sided, aux: BoundResult, provider: &O) -> BoundResult {
    let mut best = aux;
    best.value = best.value.min(1.0);
    if !(u > 0.0) {
        return best;
    }
    let factor = match sided {
        Sided::One => 1.0,
        Sided::Two => 2.0,
    };
    let mut scan = PScan::new();
    for p in admissible_p(prob, heuristic_p(prob, u)) {
        let om = match provider.omega(prob, p) {
            Ok(o) if o.value.is_finite() && o.value > 0.0 => o,
            _ => continue,
        };
        let pf = p as f64;
        let log_om = log(om.value);
        let log_u = log(u);
        let objective = |rho: f64| factor * std_normal_cdf_c(rho * u) + exp(pf * (log_om - log(1.0 - rho) - log_u));
        let heuristic_rho = 1.0 - core::f64::consts::E * om.value / u;
        let (value, rho) = log_rho_grid_objective(objective, Some(heuristic_rho));
        let keep_going = scan.record(value);
        if value < best.value {
            best = BoundResult::new(value.min(1.0), "wasserstein").with_settings(Settings {
                p: Some(p),
                rho: Some(rho),
                kappa: om.kappa,
                lambda: None,
            });
        }
        if !keep_going {
            break;
        }
    }
    best
}

/// One-sided tail bound on `P(S_n > σu)`, capped by the auxiliary tail `aux`.
pub fn wass_tail<O: OmegaProvider>(prob: &Problem, u: f64, aux: BoundResult, provider: &O) -> BoundResult {
    tail_with(prob, u, Sided::One, aux, provider)
}

/// Two-sided tail bound on `P(|S_n| > σu)`, capped by the auxiliary tail `aux`.
pub fn wass_tail_two<O: OmegaProvider>(prob: &Problem, u: f64, aux: BoundResult, provider: &O) -> BoundResult {
    tail_with(prob, u, Sided::Two, aux, provider)
}

/// [`wass_tail`] or [`wass_tail_two`] with the default auxiliary tail.
pub fn wass_tail_default<O: OmegaProvider>(prob: &Problem, u: f64, sided: Sided, provider: &O) -> BoundResult {
    match sided {
        Sided::One => wass_tail(prob, u, default_onetail(prob, u), provider),
        Sided::Two => wass_tail_two(prob, u, default_twotail(prob, u), provider),
    }
}

/// Quantile bound for `S_n` (or `|S_n|`) at level `δ`, capped by `aux`.
pub fn wass_quantile<O: OmegaProvider>(
    prob: &Problem,
    delta: f64,
    aux: BoundResult,
    sided: Sided,
    provider: &O,
) -> Result<BoundResult> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain("delta must lie in (0, 1)"));
    }
    let sigma = prob.sigma();
    let split = match sided {
        Sided::One => 1.0,
        Sided::Two => 0.5,
    };
    let mut best = aux;
    let u_ref = std_normal_quantile_upper(delta * split)?;
    let mut scan = PScan::new();
    for p in admissible_p(prob, heuristic_p(prob, u_ref)) {
        let om = match provider.omega(prob, p) {
            Ok(o) if o.value.is_finite() && o.value > 0.0 => o,
            _ => continue,
        };
        let inv_p = 1.0 / p as f64;
        let objective = |rho: f64| {
            let gauss = match std_normal_quantile_upper(delta * rho * split) {
                Ok(z) => z,
                Err(_) => return f64::INFINITY,
            };
            sigma * om.value * exp(-inv_p * (log(delta) + log(1.0 - rho))) + sigma * gauss
        };
        let (value, rho) = log_rho_grid_objective(objective, None);
        let keep_going = scan.record(value);
        if value < best.value {
            best = BoundResult::new(value.max(0.0), "wasserstein").with_settings(Settings {
                p: Some(p),
                rho: Some(rho),
                kappa: om.kappa,
                lambda: None,
            });
        }
        if !keep_going {
            break;
        }
    }
    Ok(best)
}

/// [`wass_quantile`] with the default auxiliary quantile.
pub fn wass_quantile_default<O: OmegaProvider>(
    prob: &Problem,
    delta: f64,
    sided: Sided,
    provider: &O,
) -> Result<BoundResult> {
    let aux = default_quantile(prob, delta, sided)?;
    wass_quantile(prob, delta, aux, sided, provider)
}
