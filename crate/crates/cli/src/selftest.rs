//! Reduced-size invariant and Monte Carlo checks, grouped into suites.

use std::time::{Duration, Instant};

use effconc_core::classical::{berry_esseen_tail, hoeffding_tail, Sided};
use effconc_core::empirical::{
    default_a, efficient_ebe_quantile, empirical_bernstein_quantile, ks_quantile, variance_bracket, SampleSummary,
};
use effconc_core::model::rsig;
use effconc_core::numerics::{
    binomial_pnorm, integrate, normal_pnorm, std_normal_cdf, std_normal_cdf_c, std_normal_quantile, Tolerance,
};
use effconc_core::stopping::{hoeffding_stop_n, Rule, StoppingConfig};
use effconc_core::wasserstein::{b21, b22, k_rsig, omega, omega_kappa};
use effconc_core::zero_bias::{h_u, zero_bias_tail_opt};
use effconc_core::Problem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mc::{quantile_validity, rng_for, tail_validity, BernoulliMixture, QuantileKind, VALIDITY_TAIL_BOUNDS};
use crate::memo::MemoOmega;
use crate::stop::{error_frequency, stop_experiment};

pub const SUITES: [&str; 8] =
    ["special", "quadrature", "classical", "zero_bias", "wasserstein", "empirical", "stopping", "validity"];

/// Deliberate corruption of one computed quantity, to confirm the suite
/// that guards it fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    B21,
}

#[derive(Debug, Clone)]
pub struct Options {
    pub suites: Vec<&'static str>,
    pub fault: Option<Fault>,
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options { suites: SUITES.to_vec(), fault: None, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run(opts: &Options) -> Vec<SuiteReport> {
    let memo = MemoOmega::new();
    opts.suites
        .iter()
        .map(|&suite| {
            let start = Instant::now();
            let checks = match suite {
                "special" => special(),
                "quadrature" => quadrature(),
                "classical" => classical(),
                "zero_bias" => zero_bias(),
                "wasserstein" => wasserstein(opts),
                "empirical" => empirical(opts, &memo),
                "stopping" => stopping(opts, &memo),
                "validity" => validity(opts, &memo),
                _ => vec![check("unknown_suite", false, format!("no suite named {suite}"))],
            };
            SuiteReport { suite, checks, elapsed: start.elapsed() }
        })
        .collect()
}

// Taylor series of erf; 1 − erf keeps about 13 digits for x ≤ √2.
fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    for k in 1..200 {
        term *= -x * x / k as f64;
        let add = term / (2 * k + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

fn special() -> Vec<Check> {
    let mut out = vec![check("phi_c_zero", std_normal_cdf_c(0.0) == 0.5, format!("{}", std_normal_cdf_c(0.0)))];

    let worst = (0..=60)
        .map(|i| -4.0 + 0.1 * i as f64)
        .map(|x| {
            let oracle = 0.5 * (1.0 - erf_series(x / std::f64::consts::SQRT_2));
            ((std_normal_cdf_c(x) - oracle) / oracle).abs()
        })
        .fold(0.0, f64::max);
    out.push(check("phi_c_vs_series", worst < 1e-12, format!("max rel err {worst:.2e}")));

    let refl = (0..=100)
        .map(|i| -10.0 + 0.2 * i as f64)
        .map(|x| (std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs())
        .fold(0.0, f64::max);
    out.push(check("reflection", refl < 1e-15, format!("max err {refl:.2e}")));

    let rt = [1e-12, 1e-6, 0.01, 0.3, 0.5, 0.9, 0.999]
        .iter()
        .map(|&p| ((std_normal_cdf(std_normal_quantile(p).unwrap_or(f64::NAN)) - p) / p).abs())
        .fold(0.0, f64::max);
    out.push(check("quantile_roundtrip", rt < 1e-12, format!("max rel err {rt:.2e}")));

    let norms_ok = (normal_pnorm(2.0) - 1.0).abs() < 1e-14
        && (normal_pnorm(4.0) - 3f64.powf(0.25)).abs() < 1e-14
        && (2..40).all(|p| normal_pnorm(p as f64) <= (p as f64 - 1.0).sqrt() + 1e-12);
    out.push(check("normal_pnorm", norms_ok, "E|Z|^2, E|Z|^4 and <= sqrt(p-1)".into()));

    // Direct enumeration of E[V^3] for V ~ Binomial(30, 0.2).
    let (n, q) = (30u64, 0.2f64);
    let mut pmf = (1.0 - q).powi(n as i32);
    let mut m3 = 0.0;
    for k in 0..=n {
        m3 += pmf * (k as f64).powi(3);
        pmf *= (n - k) as f64 / (k + 1) as f64 * q / (1.0 - q);
    }
    let got = binomial_pnorm(n, q, 3.0);
    let expect = m3.cbrt();
    out.push(check(
        "binomial_pnorm",
        got >= expect * (1.0 - 1e-12) && got <= expect * (1.0 + 1e-9),
        format!("{got} vs {expect}"),
    ));
    out
}

fn quadrature() -> Vec<Check> {
    let tol = Tolerance::new(1e-14, 1e-10, 2000).expect("valid tolerance");
    // Midpoint rule in t = log y, where the integrand is bounded.
    let f = |y: f64| y.powf(-0.5) * (1.0 / y - 0.01).max(0.0).sqrt();
    let (a, b) = (0.01f64.ln(), 100f64.ln());
    let m = 2_000_000;
    let h = (b - a) / m as f64;
    let oracle: f64 = (0..m).map(|i| a + (i as f64 + 0.5) * h).map(|t| f(t.exp()) * t.exp()).sum::<f64>() * h;
    let got = integrate(f, 0.01, 100.0, tol);
    let ok = matches!(got, Ok(v) if ((v - oracle) / oracle).abs() < 1e-6);
    let mut out = vec![check("endpoint_singularity", ok, format!("{got:?} vs midpoint {oracle}"))];

    let mass = integrate(|x| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(), -8.0, 8.0, tol);
    let expect = 1.0 - 2.0 * std_normal_cdf_c(8.0);
    let ok = matches!(mass, Ok(v) if (v - expect).abs() < 1e-12);
    out.push(check("gaussian_mass", ok, format!("{mass:?}")));
    out
}

fn classical() -> Vec<Check> {
    let mut out = Vec::new();
    let r = rsig(1.0, 0.3);
    out.push(check("rsig", matches!(r, Ok(v) if (v - 0.9).abs() < 1e-12), format!("{r:?}")));
    let h = hoeffding_stop_n(1.0, 0.01, 0.1);
    out.push(check("hoeffding_stop_n", matches!(h, Ok(14979)), format!("{h:?}")));
    let k = ks_quantile(100, 0.05, Sided::Two);
    let expect = (40f64.ln() / 200.0).sqrt();
    out.push(check("dkw", matches!(k, Ok(v) if (v - expect).abs() < 1e-12), format!("{k:?}")));

    let mut clipped = true;
    for n in [10u64, 100, 10_000] {
        for sigma in [0.05, 0.25, 0.5] {
            let prob = Problem::new(n, 1.0, sigma).expect("admissible");
            for i in 0..=40 {
                let u = 0.25 * i as f64;
                clipped &= berry_esseen_tail(&prob, u) <= hoeffding_tail(&prob, u);
            }
        }
    }
    out.push(check("be_below_hoeffding", clipped, "grid n x sigma x u".into()));
    out
}

/// Least-squares slope and coefficient of determination of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    (slope, sxy * sxy / (sxx * syy))
}

/// Regression of `log(zero_bias − Φ^c(u))` on `u²` over `u ∈ [1, 6]`; `None`
/// if some correction is not positive.
pub fn sub_gaussian_fit(prob: &Problem) -> Option<(f64, f64)> {
    let us: Vec<f64> = (0..=50).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for &u in &us {
        let gap = zero_bias_tail_opt(prob, u).value - std_normal_cdf_c(u);
        if !(gap > 0.0) {
            return None;
        }
        x.push(u * u);
        y.push(gap.ln());
    }
    Some(linear_fit(&x, &y))
}

fn zero_bias() -> Vec<Check> {
    let mut ok = true;
    for &w in &[-3.0, -1.0, 0.0, 0.5, 2.0, 5.0] {
        for i in 0..=60 {
            let v = h_u(w, 0.1 * i as f64);
            ok &= v >= 0.0 && v.is_finite();
        }
    }
    let mut mono = true;
    for i in 0..=60 {
        let u = 0.1 * i as f64;
        let mut prev = 0.0;
        for j in 0..=40 {
            let w = -4.0 + 0.25 * j as f64;
            if w > u {
                break;
            }
            let v = h_u(w, u);
            mono &= v >= prev;
            prev = v;
        }
    }
    let mut out = vec![check("h_u_nonnegative", ok, "finite and >= 0".into())];
    out.push(check("h_u_nondecreasing_in_w", mono, "grid -4 <= w <= u".into()));

    let prob = Problem::new(10_000, 1.0, 0.25).expect("admissible");
    let fit = sub_gaussian_fit(&prob);
    let ok = matches!(fit, Some((slope, r2)) if slope < 0.0 && r2 >= 0.95);
    out.push(check("sub_gaussian_decay", ok, format!("(slope, R^2) = {fit:?}")));
    out
}

fn wasserstein(opts: &Options) -> Vec<Check> {
    let scale = if opts.fault == Some(Fault::B21) { 1e3 } else { 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut b_ok = true;
    let mut chain_ok = true;
    let mut worst = String::new();
    let mut chain_detail = String::from("30 random settings");
    for _ in 0..30 {
        let n = 10u64.pow(rng.random_range(1..=6));
        let sigma = rng.random_range(0.05..=0.5);
        let p = [2u32, 3, 4, 8][rng.random_range(0..4)];
        let prob = Problem::new(n, 1.0, sigma).expect("admissible");
        let floor = prob.derived().tilde_r.powi(2) / n as f64;
        let kappa = floor * (1.0 + rng.random_range(0.01..100.0));
        let (Ok(lo), Ok(hi)) = (b21(&prob, p, kappa), b22(&prob, p)) else {
            b_ok = false;
            continue;
        };
        if lo * scale > hi * (1.0 + 1e-12) {
            b_ok = false;
            worst = format!("n={n} sigma={sigma:.3} p={p}: b21={} > b22={hi}", lo * scale);
        }
        let k = rng.random_range(1..=40);
        match (omega_kappa(&prob, p, kappa, k, false), omega_kappa(&prob, p, kappa, k, true)) {
            (Ok(t), Ok(l)) if t <= l * (1.0 + 1e-12) => {}
            (_, Ok(l)) if l == f64::INFINITY => {}
            (t, l) => {
                chain_ok = false;
                chain_detail =
                    format!("n={n} sigma={sigma:.3} p={p} kappa={kappa:.3e} k={k}: tight {t:?}, loose {l:?}");
            }
        }
    }
    let mut out = vec![check("b21", b_ok, if b_ok { "b21 <= b22 at 30 random settings".into() } else { worst })];
    out.push(check("tight_le_loose", chain_ok, chain_detail));

    let mut growth = true;
    let mut detail =
        String::from("omega_p <= p K_rsig / sqrt(n) for n in {1e2, 1e4}, sigma in {0.1, 0.5}, p in {2, 4}");
    for n in [100u64, 10_000] {
        for sigma in [0.1, 0.5] {
            let prob = Problem::new(n, 1.0, sigma).expect("admissible");
            for p in [2u32, 4] {
                let w = omega(&prob, p).map(|o| o.value).unwrap_or(f64::INFINITY);
                let cap = k_rsig(&prob, p) * p as f64 / (n as f64).sqrt();
                if w > cap {
                    growth = false;
                    detail = format!("n={n} sigma={sigma} p={p}: {w} > {cap}");
                }
            }
        }
    }
    out.push(check("growth", growth, detail));

    let prob = Problem::new(400, 1.0, 0.3).expect("admissible");
    let w1 = omega(&prob, 1).map(|o| o.value);
    let expect = 0.9 / 0.3 / 20.0;
    out.push(check("p1_closed_form", matches!(w1, Ok(v) if (v - expect).abs() < 1e-14), format!("{w1:?}")));
    out
}

fn empirical(opts: &Options, memo: &MemoOmega) -> Vec<Check> {
    // Bracket coverage on Bernoulli(0.3) data.
    let (n, q, a) = (1000u64, 0.3f64, 0.01);
    let sigma = (q * (1.0 - q)).sqrt();
    let mix = BernoulliMixture { n, r: 1.0, q };
    let reps = 4000;
    let hist = mix.sample_counts(reps, &mut rng_for(opts.seed, 1 << 40));
    let mut misses = 0;
    for (&k, &c) in &hist {
        let covered = mix
            .summary(k)
            .and_then(|s| variance_bracket(&s, 1.0, a, Sided::Two))
            .map(|b| b.sigma_lo <= sigma && sigma <= b.sigma_hi)
            .unwrap_or(false);
        if !covered {
            misses += c;
        }
    }
    let freq = misses as f64 / reps as f64;
    let slack = 3.0 * (a * (1.0 - a) / reps as f64).sqrt();
    let mut out = vec![check("bracket_coverage", freq <= a + slack, format!("miss rate {freq} vs a = {a}"))];

    let da = default_a(0.1, 100, Sided::One);
    let expect = 0.01 * 1.281_551_565_544_600_5;
    out.push(check("default_a", matches!(da, Ok((v, false)) if (v - expect).abs() < 1e-12), format!("{da:?}")));

    let s = SampleSummary::new(100_000, 0.5, 0.0625, 1.0).expect("valid summary");
    let ebe = efficient_ebe_quantile(&s, 1.0, 0.05, Sided::One, memo).map(|b| b.value);
    let eb = empirical_bernstein_quantile(&s, 1.0, 0.05);
    let ok = matches!((ebe.clone(), eb.clone()), (Ok(x), Ok(y)) if x < y);
    out.push(check("ebe_below_eb", ok, format!("EBE {ebe:?} vs EB {eb:?} at n = 1e5")));
    out
}

fn stopping(opts: &Options, memo: &MemoOmega) -> Vec<Check> {
    let config = StoppingConfig::default();
    let spent: f64 = (0..1000).map(|k| config.budget(k)).sum();
    let mut out = vec![check("budget", spent <= config.delta, format!("{spent} <= {}", config.delta))];

    let runs = stop_experiment(&[10], 20, &[Rule::Hoeffding, Rule::EmpBernstein], opts.seed, &config, memo);
    match runs {
        Ok(runs) => {
            let h = runs.iter().filter(|r| r.rule == Rule::Hoeffding).all(|r| r.trace.final_n == 14979);
            out.push(check("hoeffding_constant", h, "all Hoeffding runs stop at 14979".into()));
            let once = runs.iter().all(|r| {
                let s: Vec<_> = r.trace.checks.iter().map(|c| c.stopped).collect();
                s.iter().filter(|&&x| x).count() == 1 && s.last() == Some(&true)
            });
            out.push(check("stopped_once_at_end", once, "trace invariant".into()));
            let (freq, m) = error_frequency(&runs, Rule::EmpBernstein, 10).unwrap_or((1.0, 1));
            let slack = 3.0 * (config.delta * (1.0 - config.delta) / m as f64).sqrt();
            out.push(check("eb_error_rate", freq <= config.delta + slack, format!("{freq} over {m} runs")));
        }
        Err(e) => out.push(check("stop_experiment", false, e.to_string())),
    }
    out
}

fn validity(opts: &Options, memo: &MemoOmega) -> Vec<Check> {
    let ns = [50u64, 200, 1000];
    let sigmas = [0.1, 0.25, 0.5];
    let us = [0.0, 0.5, 1.0, 2.0, 3.0];
    let mut out = Vec::new();
    match tail_validity(&ns, &sigmas, &us, &VALIDITY_TAIL_BOUNDS, 10_000, opts.seed, memo) {
        Ok(cells) => {
            let bad: Vec<String> = cells
                .iter()
                .filter(|c| !c.passed())
                .map(|c| {
                    format!("{} n={} sigma={} u={}: {} > {}", c.bound, c.n, c.sigma, c.u, c.exceed.freq(), c.value)
                })
                .collect();
            out.push(check("tail_exceedance", bad.is_empty(), format!("{} cells; {}", cells.len(), bad.join("; "))));
        }
        Err(e) => out.push(check("tail_exceedance", false, e.to_string())),
    }
    let deltas = [0.01, 0.05, 0.1];
    let search = effconc_core::empirical::SigmaSearch::Continuous;
    match quantile_validity(&ns, &sigmas, &deltas, Sided::Two, QuantileKind::Efficient, search, 2000, opts.seed, memo) {
        Ok(cells) => {
            let bad = cells.iter().filter(|c| !c.passed()).count();
            out.push(check("efficient_quantile_exceedance", bad == 0, format!("{} cells, {bad} failing", cells.len())));
        }
        Err(e) => out.push(check("efficient_quantile_exceedance", false, e.to_string())),
    }
    out
}
