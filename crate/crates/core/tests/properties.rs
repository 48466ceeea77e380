use effconc_core::classical::{
    bernstein_tail, berry_esseen_tail, default_quantile, hoeffding_quantile, hoeffding_tail, Sided,
};
use effconc_core::empirical::{default_a, sigma_lower, variance_bracket, SampleSummary};
use effconc_core::model::rsig;
use effconc_core::numerics::{
    binomial_pnorm, integrate, normal_pnorm, std_normal_cdf, std_normal_cdf_c, std_normal_quantile,
    std_normal_quantile_upper, Tolerance,
};
use effconc_core::stopping::hoeffding_stop_n;
use effconc_core::wasserstein::{b21, b22, omega_kappa, wass_quantile_default, DirectOmega};
use effconc_core::zero_bias::h_u;
use effconc_core::Problem;
use proptest::prelude::*;

fn ln_choose(n: u64, k: u64) -> f64 {
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

// (E V^p)^{1/p} by direct enumeration of the binomial pmf.
fn binomial_pnorm_oracle(n: u64, q: f64, p: f64) -> f64 {
    let m: f64 = (0..=n)
        .map(|k| (ln_choose(n, k) + k as f64 * q.ln() + (n - k) as f64 * (1.0 - q).ln()).exp() * (k as f64).powf(p))
        .sum();
    m.powf(1.0 / p)
}

fn riemann(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    (0..m).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn phi_reflection(x in -30.0f64..30.0) {
        prop_assert!((std_normal_cdf_c(x) + std_normal_cdf_c(-x) - 1.0).abs() < 1e-15);
        prop_assert!((std_normal_cdf(x) - std_normal_cdf_c(-x)).abs() < 1e-15);
    }

    #[test]
    fn quantile_inverts_cdf(x in -30.0f64..30.0) {
        // Invert through whichever tail keeps full relative precision.
        let back = if x <= 0.0 {
            std_normal_quantile(std_normal_cdf(x)).unwrap()
        } else {
            std_normal_quantile_upper(std_normal_cdf_c(x)).unwrap()
        };
        prop_assert!((back - x).abs() < 1e-9 * (1.0 + x.abs()), "{x} -> {back}");
    }

    #[test]
    fn binomial_pnorm_nondecreasing_in_p(n in 1u64..2000, q in 0.01f64..0.99, p in 1.0f64..12.0, dp in 0.1f64..4.0) {
        let lo = binomial_pnorm(n, q, p);
        let hi = binomial_pnorm(n, q, p + dp);
        prop_assert!(lo <= hi * (1.0 + 1e-12), "{lo} > {hi}");
    }

    #[test]
    fn binomial_pnorm_matches_enumeration(n in 1u64..200, q in 0.02f64..0.98, p in 1.0f64..8.0) {
        let got = binomial_pnorm(n, q, p);
        let oracle = binomial_pnorm_oracle(n, q, p);
        prop_assert!(got >= oracle * (1.0 - 1e-12) && got <= oracle * (1.0 + 1e-10), "{got} vs {oracle}");
    }

    #[test]
    fn normal_pnorm_hypercontractive(p in 2.0f64..64.0) {
        prop_assert!(normal_pnorm(p) <= (p - 1.0).sqrt() * (1.0 + 1e-14));
    }

    #[test]
    fn integrate_matches_riemann(c in 0.1f64..3.0, s in -2.0f64..2.0, b in 0.5f64..5.0) {
        let f = |x: f64| (-c * x).exp() * (1.0 + s * x * x).abs().sqrt();
        let tol = Tolerance::new(1e-14, 1e-11, 2000).unwrap();
        let got = integrate(f, 0.0, b, tol).unwrap();
        let oracle = riemann(f, 0.0, b, 400_000);
        prop_assert!((got - oracle).abs() < 1e-7 * oracle.abs().max(1e-3), "{got} vs {oracle}");
    }

    #[test]
    fn rsig_bracket_and_scaling(r in 0.01f64..100.0, frac in 1e-6f64..0.5, c in 0.01f64..100.0) {
        let sigma = frac * r;
        let rs = rsig(r, sigma).unwrap();
        prop_assert!(r - rs <= 0.5 * r * (1.0 + 1e-15));
        prop_assert!(0.5 * r <= rs * (1.0 + 1e-15));
        prop_assert!(rs <= r * (1.0 + 1e-15));
        let scaled = rsig(c * r, c * sigma).unwrap();
        prop_assert!((scaled - c * rs).abs() <= 1e-12 * c * rs);
    }

    #[test]
    fn h_u_nonnegative_and_monotone(u in -3.0f64..8.0, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
        let (a, b) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let lo = u - 10.0;
        let (w1, w2) = (lo + a * (u - lo), lo + b * (u - lo));
        let (h1, h2) = (h_u(w1, u), h_u(w2, u));
        prop_assert!(h1.is_finite() && h1 >= 0.0);
        prop_assert!(h1 <= h2 * (1.0 + 1e-12) + 1e-300, "h({w1}) = {h1} > h({w2}) = {h2}");
    }

    #[test]
    fn classical_tails_are_probabilities_and_ordered(n in 1u64..100_000, frac in 0.01f64..0.5, u in 0.0f64..20.0) {
        let prob = Problem::new(n, 1.0, frac).unwrap();
        for t in [hoeffding_tail(&prob, u), bernstein_tail(&prob, u), berry_esseen_tail(&prob, u)] {
            prop_assert!((0.0..=1.0).contains(&t));
        }
        let u2 = u + 0.5;
        prop_assert!(hoeffding_tail(&prob, u2) <= hoeffding_tail(&prob, u));
    }

    #[test]
    fn empirical_bracket_contains_estimate(n in 2u64..1_000_000, var_frac in 0.0f64..1.0, delta in 0.001f64..0.5) {
        let emp_var = 0.25 * var_frac;
        let s = SampleSummary::new(n, 0.5, emp_var, 1.0).unwrap();
        let (a, _) = default_a(delta, n, Sided::Two).unwrap();
        prop_assert!(a > 0.0 && a < delta);
        let b = variance_bracket(&s, 1.0, a, Sided::Two).unwrap();
        prop_assert!(b.sigma_lo <= s.emp_sd() * (1.0 + 1e-12));
        prop_assert!(s.emp_sd().min(0.5) <= b.sigma_hi * (1.0 + 1e-12));
        prop_assert!((sigma_lower(1.0, emp_var, 0.0) - emp_var.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hoeffding_stop_n_scales_with_inverse_square_epsilon(eps in 0.001f64..0.1, delta in 0.001f64..0.5) {
        let n1 = hoeffding_stop_n(1.0, eps, delta).unwrap() as f64;
        let n2 = hoeffding_stop_n(1.0, 0.5 * eps, delta).unwrap() as f64;
        prop_assert!((n2 - 4.0 * n1).abs() <= 4.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn tight_chain_below_loose(e in 1u32..6, frac in 0.05f64..0.5, p in 2u32..12, t in 0.01f64..50.0, k in 1u32..=40) {
        let n = 10u64.pow(e);
        let prob = Problem::new(n, 1.0, frac).unwrap();
        let floor = prob.derived().tilde_r.powi(2) / n as f64;
        let kappa = floor * (1.0 + t);
        let loose = omega_kappa(&prob, p, kappa, k, true).unwrap();
        prop_assume!(loose.is_finite());
        let tight = omega_kappa(&prob, p, kappa, k, false).unwrap();
        prop_assert!(tight <= loose * (1.0 + 1e-12), "{tight} > {loose}");
        prop_assert!(b21(&prob, p, kappa).unwrap() <= b22(&prob, p).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn efficient_quantile_never_exceeds_auxiliaries(e in 1u32..7, frac in 0.05f64..0.5, delta in 0.001f64..0.5, two in any::<bool>()) {
        let sided = if two { Sided::Two } else { Sided::One };
        let prob = Problem::new(10u64.pow(e), 1.0, frac).unwrap();
        let q = wass_quantile_default(&prob, delta, sided, &DirectOmega).unwrap().value;
        prop_assert!(q <= default_quantile(&prob, delta, sided).unwrap().value * (1.0 + 1e-12));
        prop_assert!(q <= hoeffding_quantile(1.0, delta, sided).unwrap() * (1.0 + 1e-9));
    }
}
