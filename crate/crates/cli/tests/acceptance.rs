//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the report is printed even when every
//! criterion passes. Exits nonzero if any criterion fails other than those in
//! `DOCUMENTED_UNMET`, whose failure is expected and still reported.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;
use std::time::Instant;

use effconc::mc::{
    binomial_stderr, quantile_validity, rng_for, tail_validity, BernoulliMixture, QuantileKind, VALIDITY_TAIL_BOUNDS,
};
use effconc::selftest::sub_gaussian_fit;
use effconc::stop::{error_frequency, mean_stop, stop_experiment};
use effconc::MemoOmega;
use effconc_core::classical::{bernstein_quantile, hoeffding_quantile, Sided};
use effconc_core::empirical::{
    efficient_ebe_quantile, empirical_bernstein_quantile, ks_quantile, SampleSummary, SigmaSearch,
};
use effconc_core::model::rsig;
use effconc_core::numerics::{std_normal_cdf, std_normal_cdf_c, std_normal_pdf, std_normal_quantile_upper};
use effconc_core::stopping::{hoeffding_stop_n, Rule, StoppingConfig};
use effconc_core::wasserstein::{k_rsig, omega, omega_kappa, wass_quantile_default, DirectOmega};
use effconc_core::Problem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

const SEED: u64 = 20_240_601;

/// Criteria that fail with the specified constructions; see the README.
const DOCUMENTED_UNMET: [&str; 1] = ["stopping"];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

const NS: [u64; 3] = [50, 200, 1000];
const SIGMAS: [f64; 3] = [0.1, 0.25, 0.5];
const US: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 3.0];
const DELTAS: [f64; 3] = [0.01, 0.05, 0.1];

fn tail_validity_criterion(memo: &MemoOmega) -> Outcome {
    let reps = 100_000;
    let cells = match tail_validity(&NS, &SIGMAS, &US, &VALIDITY_TAIL_BOUNDS, reps, SEED, memo) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("error: {e}")),
    };
    let failing: Vec<String> = cells
        .iter()
        .filter(|c| !c.passed())
        .map(|c| format!("{} n={} sigma={} u={}: freq {} > {}", c.bound, c.n, c.sigma, c.u, c.exceed.freq(), c.value))
        .collect();
    let grid = cells.len() / VALIDITY_TAIL_BOUNDS.len();
    outcome(
        failing.is_empty(),
        format!(
            "{grid} cells x {} bounds, {reps} reps, {} failing {:?}",
            VALIDITY_TAIL_BOUNDS.len(),
            failing.len(),
            failing
        ),
    )
}

fn quantile_validity_criterion(memo: &MemoOmega) -> Outcome {
    let reps = 10_000;
    let search = SigmaSearch::Lattice { ratio: 1.01 };
    let mut total = 0;
    let mut failing = Vec::new();
    for kind in [QuantileKind::Efficient, QuantileKind::Ebe] {
        for sided in [Sided::One, Sided::Two] {
            let cells = match quantile_validity(&NS, &SIGMAS, &DELTAS, sided, kind, search, reps, SEED, memo) {
                Ok(c) => c,
                Err(e) => return outcome(false, format!("{} {}: error: {e}", kind.as_str(), sided.as_str())),
            };
            total += cells.len();
            for c in cells.iter().filter(|c| !c.passed()) {
                failing.push(format!(
                    "{} {} n={} sigma={} delta={}: freq {}",
                    kind.as_str(),
                    sided.as_str(),
                    c.n,
                    c.sigma,
                    c.delta,
                    c.exceed.freq()
                ));
            }
        }
    }
    outcome(
        failing.is_empty(),
        format!("{total} cells (efficient and EBE, one- and two-sided), {reps} reps, failing {failing:?}"),
    )
}

fn efficiency_criterion(memo: &MemoOmega) -> Outcome {
    let (sigma, delta) = (0.25, 0.05);
    let reference = sigma * std_normal_quantile_upper(0.5 * delta).expect("valid level");
    let mut ratios = Vec::new();
    let mut baselines_ok = true;
    for e in 2..=8 {
        let prob = Problem::new(10u64.pow(e), 1.0, sigma).expect("admissible");
        let eff = match effconc_core::wasserstein::OmegaProvider::quantile(memo, &prob, delta, Sided::Two) {
            Ok(b) => b.value,
            Err(err) => return outcome(false, format!("n=1e{e}: {err}")),
        };
        let bern = bernstein_quantile(&prob, delta).expect("valid level") / reference;
        let hoef = hoeffding_quantile(1.0, delta, Sided::Two).expect("valid level") / reference;
        baselines_ok &= bern >= 1.2 && hoef >= 1.2;
        ratios.push((e, eff / reference, bern, hoef));
    }
    let decreasing = ratios.windows(2).all(|w| w[1].1 < w[0].1);
    let last = ratios.last().map_or(f64::INFINITY, |r| r.1);
    let detail = ratios
        .iter()
        .map(|(e, r, b, h)| format!("1e{e}: {r:.4} (bern {b:.3}, hoef {h:.3})"))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(decreasing && last <= 1.10 && baselines_ok, detail)
}

fn sub_gaussian_criterion() -> Outcome {
    let prob = Problem::new(10_000, 1.0, 0.25).expect("admissible");
    match sub_gaussian_fit(&prob) {
        Some((slope, r2)) => outcome(slope < 0.0 && r2 >= 0.95, format!("slope {slope:.4}, R^2 {r2:.4}")),
        None => outcome(false, "nonpositive correction on [1, 6]"),
    }
}

/// `∫_{z1}^{z2} |s − σz|^p φ(z) dz` for `p ∈ {1, 2}`.
fn gaussian_segment(s: f64, sigma: f64, z1: f64, z2: f64, p: u32) -> f64 {
    let mass = |a: f64, b: f64| std_normal_cdf(b) - std_normal_cdf(a);
    let pdf = |z: f64| if z.is_infinite() { 0.0 } else { std_normal_pdf(z) };
    let zpdf = |z: f64| if z.is_infinite() { 0.0 } else { z * std_normal_pdf(z) };
    // ∫(s − σz)φ over [a, b].
    let first = |a: f64, b: f64| s * mass(a, b) - sigma * (pdf(a) - pdf(b));
    match p {
        1 => {
            let c = (s / sigma).clamp(z1, z2);
            first(z1, c) - first(c, z2)
        }
        2 => {
            s * s * mass(z1, z2) - 2.0 * s * sigma * (pdf(z1) - pdf(z2))
                + sigma * sigma * (mass(z1, z2) + zpdf(z1) - zpdf(z2))
        }
        _ => unreachable!("only p = 1, 2"),
    }
}

/// `W_p` between the empirical law of `S_n` given by `counts` and `N(0, σ²)`,
/// through the quantile coupling.
fn empirical_wp(mix: &BernoulliMixture, counts: &[u64], sigma: f64, p: u32) -> f64 {
    let total: u64 = counts.iter().sum();
    let mut cum = 0u64;
    let mut z_lo = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for (k, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        cum += c;
        let z_hi = if cum == total {
            f64::INFINITY
        } else {
            -std_normal_quantile_upper(cum as f64 / total as f64).expect("interior level")
        };
        acc += gaussian_segment(mix.s_n(k as u64), sigma, z_lo, z_hi, p);
        z_lo = z_hi;
    }
    acc.max(0.0).powf(1.0 / p as f64)
}

fn wasserstein_criterion(memo: &MemoOmega) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut chain_ok = true;
    let mut chain_detail = String::new();
    let mut tested = 0;
    for _ in 0..100 {
        let n = 10u64.pow(rng.random_range(1..=6));
        let sigma = rng.random_range(0.05..=0.5);
        let p = rng.random_range(2..=16);
        let prob = Problem::new(n, 1.0, sigma).expect("admissible");
        let floor = prob.derived().tilde_r.powi(2) / n as f64;
        let kappa = floor * (1.0 + rng.random_range(0.01..50.0));
        let k = rng.random_range(1..=40);
        match (omega_kappa(&prob, p, kappa, k, false), omega_kappa(&prob, p, kappa, k, true)) {
            (Ok(t), Ok(l)) if t <= l * (1.0 + 1e-12) => tested += 1,
            (_, Ok(l)) if l == f64::INFINITY => tested += 1,
            (t, l) => {
                chain_ok = false;
                chain_detail = format!("n={n} sigma={sigma:.3} p={p} k={k}: {t:?} vs {l:?}");
            }
        }
    }

    let mut growth_ok = true;
    let mut growth_detail = Vec::new();
    for n in [100u64, 10_000] {
        for sigma in [0.1, 0.5] {
            let prob = Problem::new(n, 1.0, sigma).expect("admissible");
            for p in [2u32, 4, 8, 16] {
                let w = omega(&prob, p).map(|o| o.value).unwrap_or(f64::INFINITY);
                let cap = k_rsig(&prob, p) * p as f64 / (n as f64).sqrt();
                if !(w <= cap) {
                    growth_ok = false;
                    growth_detail.push(format!("n={n} sigma={sigma} p={p}: {w} > {cap}"));
                }
            }
        }
    }

    // Empirical coupling with a multinomial bootstrap over the count histogram.
    let mut coupling_ok = true;
    let mut coupling_detail = Vec::new();
    let (samples, boots) = (1_000_000u64, 200);
    for n in [4u64, 16] {
        let prob = Problem::new(n, 1.0, 0.5).expect("admissible");
        let mix = BernoulliMixture::matching(&prob);
        let hist = mix.sample_counts(samples, &mut rng_for(SEED, 1 << 44 | n));
        let counts: Vec<u64> = (0..=n).map(|k| hist.get(&k).copied().unwrap_or(0)).collect();
        for p in [1u32, 2] {
            let w_hat = empirical_wp(&mix, &counts, 0.5, p);
            let mut brng = rng_for(SEED, 1 << 45 | n << 4 | p as u64);
            let reps: Vec<f64> = (0..boots)
                .map(|_| {
                    let mut left = samples;
                    let mut mass_left = 1.0;
                    let resampled: Vec<u64> = counts
                        .iter()
                        .map(|&c| {
                            let pk = c as f64 / samples as f64;
                            let draw = if left == 0 || mass_left <= 0.0 {
                                0
                            } else {
                                Binomial::new(left, (pk / mass_left).clamp(0.0, 1.0)).expect("valid").sample(&mut brng)
                            };
                            left -= draw;
                            mass_left -= pk;
                            draw
                        })
                        .collect();
                    empirical_wp(&mix, &resampled, 0.5, p)
                })
                .collect();
            let mean = reps.iter().sum::<f64>() / boots as f64;
            let se = (reps.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / (boots - 1) as f64).sqrt();
            let bound = match effconc_core::wasserstein::OmegaProvider::omega(memo, &prob, p) {
                Ok(o) => 0.5 * o.value,
                Err(e) => return outcome(false, format!("omega n={n} p={p}: {e}")),
            };
            let ok = w_hat <= bound + 3.0 * se;
            coupling_ok &= ok;
            coupling_detail.push(format!("n={n} p={p}: W_p {w_hat:.4} (se {se:.1e}) vs sigma*omega {bound:.4}"));
        }
    }

    outcome(
        chain_ok && tested == 100 && growth_ok && coupling_ok,
        format!(
            "chain {tested}/100 {chain_detail}; growth 16 cases {}; coupling {}",
            if growth_ok { "ok".into() } else { growth_detail.join(", ") },
            coupling_detail.join(", ")
        ),
    )
}

fn ebe_vs_eb_criterion(memo: &MemoOmega) -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for e in 5..=8 {
        let n = 10u64.pow(e);
        let s = SampleSummary::new(n, 0.5, 0.0625, 1.0).expect("valid summary");
        let ebe = efficient_ebe_quantile(&s, 1.0, 0.05, Sided::One, memo);
        let eb = empirical_bernstein_quantile(&s, 1.0, 0.05);
        match (ebe, eb) {
            (Ok(a), Ok(b)) => {
                ok &= a.value < b;
                detail.push(format!("1e{e}: EBE {:.4} vs EB {b:.4}", a.value));
            }
            (a, b) => {
                ok = false;
                detail.push(format!("1e{e}: {a:?} / {b:?}"));
            }
        }
    }
    outcome(ok, format!("one-sided, {}", detail.join("; ")))
}

fn stopping_criterion(memo: &MemoOmega) -> Outcome {
    let config = StoppingConfig::default().with_sigma_search(SigmaSearch::Lattice { ratio: 1.01 });
    let rules = [Rule::Hoeffding, Rule::EmpBernstein, Rule::Ebe];
    let ells = [1u32, 10, 100];
    let runs = match stop_experiment(&ells, 200, &rules, SEED, &config, memo) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("error: {e}")),
    };
    let first10: Vec<_> = runs.iter().filter(|r| r.replication < 10).cloned().collect();
    let mut order_ok = true;
    let mut detail = Vec::new();
    for &ell in &ells {
        let eb = mean_stop(&first10, Rule::EmpBernstein, ell).unwrap_or(f64::NAN);
        let ebe = mean_stop(&first10, Rule::Ebe, ell).unwrap_or(f64::NAN);
        if ell >= 10 {
            order_ok &= ebe <= eb;
        }
        detail.push(format!("ell={ell}: mean stop EBE {ebe:.0}, EB {eb:.0}"));
    }
    let delta = config.delta;
    let mut errors_ok = true;
    for &ell in &ells {
        for &rule in &rules {
            match error_frequency(&runs, rule, ell) {
                Some((f, m)) => {
                    let ok = f <= delta + 3.0 * binomial_stderr(delta, m);
                    errors_ok &= ok;
                    if !ok {
                        detail.push(format!("ell={ell} {}: error rate {f}", rule.as_str()));
                    }
                }
                None => errors_ok = false,
            }
        }
    }
    let hoeffding_ok = hoeffding_stop_n(1.0, 0.01, 0.1) == Ok(14979);
    detail.push(format!(
        "ordering EBE <= EB at ell 10, 100 (10 reps): {}; error rates over 200 reps: {}; Hoeffding n = 14979: {}",
        if order_ok { "holds" } else { "violated" },
        if errors_ok { "all <= delta + 3 se" } else { "violated" },
        hoeffding_ok
    ));
    outcome(order_ok && errors_ok && hoeffding_ok, detail.join("; "))
}

fn closed_form_criterion() -> Outcome {
    let checks = [
        ("rsig(1, 0.3)", rsig(1.0, 0.3).unwrap_or(f64::NAN), 0.9),
        ("Phi^c(0)", std_normal_cdf_c(0.0), 0.5),
        ("DKW(100, 0.05)", ks_quantile(100, 0.05, Sided::Two).unwrap_or(f64::NAN), (40f64.ln() / 200.0).sqrt()),
        ("hoeffding_stop_n", hoeffding_stop_n(1.0, 0.01, 0.1).map_or(f64::NAN, |n| n as f64), 14979.0),
    ];
    let bad: Vec<_> = checks.iter().filter(|(_, got, want)| !((got - want).abs() <= 1e-12)).collect();
    outcome(bad.is_empty(), format!("{} checks, mismatches {bad:?}", checks.len()))
}

fn main() -> ExitCode {
    let memo = MemoOmega::new();
    // Sanity check that the memo agrees with direct evaluation before relying on it.
    let probe = Problem::new(1000, 1.0, 0.25).expect("admissible");
    let direct = wass_quantile_default(&probe, 0.05, Sided::Two, &DirectOmega).map(|b| b.value);
    let cached = effconc_core::wasserstein::OmegaProvider::quantile(&memo, &probe, 0.05, Sided::Two).map(|b| b.value);
    assert_eq!(direct, cached);

    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("tail_validity", Box::new(|| tail_validity_criterion(&memo))),
        ("quantile_validity", Box::new(|| quantile_validity_criterion(&memo))),
        ("efficiency_convergence", Box::new(|| efficiency_criterion(&memo))),
        ("sub_gaussian_decay", Box::new(sub_gaussian_criterion)),
        ("wasserstein_chain", Box::new(|| wasserstein_criterion(&memo))),
        ("ebe_below_eb", Box::new(|| ebe_vs_eb_criterion(&memo))),
        ("stopping", Box::new(|| stopping_criterion(&memo))),
        ("closed_forms", Box::new(closed_form_criterion)),
    ];
    let mut unexpected = Vec::new();
    for (name, run) in &criteria {
        let start = Instant::now();
        let o = run();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        let note = if !o.passed && DOCUMENTED_UNMET.contains(name) { " [documented unmet]" } else { "" };
        println!("{tag} {name}{note} ({:.1?}): {}", start.elapsed(), o.detail);
        if !o.passed && note.is_empty() {
            unexpected.push(*name);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria pass except documented unmet {DOCUMENTED_UNMET:?}");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures {unexpected:?}");
        ExitCode::FAILURE
    }
}
