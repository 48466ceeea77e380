//! Bounds addressable by name from the command line.

use effconc_core::classical::{
    bernstein_quantile, bernstein_tail, berry_esseen_tail, default_onetail, default_quantile, hoeffding_quantile,
    hoeffding_tail, invert_tail, nonuniform_be_tail, BoundResult, Sided,
};
use effconc_core::empirical::{efficient_ebe_quantile_with, empirical_bernstein_quantile, SampleSummary, SigmaSearch};
use effconc_core::numerics::std_normal_quantile_upper;
use effconc_core::wasserstein::{wass_tail_default, OmegaProvider};
use effconc_core::zero_bias::zero_bias_tail_at_threshold;
use effconc_core::{Error, Problem, Result};

/// Tail bounds, in output order. `default` is the smallest classical or
/// zero-bias tail; `wasserstein` is the efficient bound capped by it.
pub const TAIL_BOUNDS: [&str; 7] =
    ["hoeffding", "bernstein", "berry_esseen", "nonuniform_be", "zero_bias", "default", "wasserstein"];

/// Known-variance quantile bounds, in output order.
pub const QUANTILE_BOUNDS: [&str; 7] = TAIL_BOUNDS;

/// Unknown-variance quantile bounds, in output order.
pub const EMPIRICAL_BOUNDS: [&str; 3] = ["ebe", "eb", "hoeffding"];

/// Expands `all` and checks every name against `known`.
pub fn resolve(list: &[String], known: &[&'static str]) -> std::result::Result<Vec<&'static str>, String> {
    let mut out = Vec::new();
    for name in list {
        if name == "all" {
            out.extend_from_slice(known);
            continue;
        }
        match known.iter().find(|k| **k == name.as_str()) {
            Some(k) => out.push(*k),
            None => return Err(format!("unknown bound '{name}' (expected one of: all, {})", known.join(", "))),
        }
    }
    out.dedup();
    Ok(out)
}

fn one_sided_tail<O: OmegaProvider>(name: &str, prob: &Problem, u: f64, provider: &O) -> Option<BoundResult> {
    let plain = |value: f64, name: &'static str| BoundResult::new(value.min(1.0), name);
    Some(match name {
        "hoeffding" => plain(hoeffding_tail(prob, u), "hoeffding"),
        "bernstein" => plain(bernstein_tail(prob, u), "bernstein"),
        "berry_esseen" => plain(berry_esseen_tail(prob, u), "berry_esseen"),
        "nonuniform_be" => plain(nonuniform_be_tail(prob, u), "nonuniform_be"),
        "zero_bias" => zero_bias_tail_at_threshold(prob, prob.sigma() * u),
        "default" => default_onetail(prob, u),
        "wasserstein" => wass_tail_default(prob, u, Sided::One, provider),
        _ => return None,
    })
}

/// Bound on `P(S_n ≥ σu)`, or on `P(|S_n| ≥ σu)` when two-sided. Two-sided
/// classical bounds double the one-sided value.
pub fn tail_named<O: OmegaProvider>(
    name: &str,
    prob: &Problem,
    u: f64,
    sided: Sided,
    provider: &O,
) -> Result<BoundResult> {
    if name == "wasserstein" {
        return Ok(wass_tail_default(prob, u, sided, provider));
    }
    let mut b = one_sided_tail(name, prob, u, provider).ok_or(Error::Domain("unknown tail bound"))?;
    if sided == Sided::Two {
        b.value = (2.0 * b.value).min(1.0);
    }
    Ok(b)
}

/// Quantile of `S_n` (or `|S_n|`) at level `δ`.
pub fn quantile_named<O: OmegaProvider>(
    name: &str,
    prob: &Problem,
    delta: f64,
    sided: Sided,
    provider: &O,
) -> Result<BoundResult> {
    let inverted = |tail: fn(&Problem, f64) -> f64, name: &'static str| -> Result<BoundResult> {
        Ok(BoundResult::new(invert_tail(prob, delta, sided, tail)?, name))
    };
    match name {
        "hoeffding" => Ok(BoundResult::new(hoeffding_quantile(prob.r(), delta, sided)?, "hoeffding")),
        "bernstein" => {
            // The closed form is two-sided; one side at δ is the two-sided form at 2δ.
            let level = match sided {
                Sided::One => 2.0 * delta,
                Sided::Two => delta,
            };
            if level >= 1.0 {
                return inverted(bernstein_tail, "bernstein");
            }
            Ok(BoundResult::new(bernstein_quantile(prob, level)?, "bernstein"))
        }
        "berry_esseen" => inverted(berry_esseen_tail, "berry_esseen"),
        "nonuniform_be" => inverted(nonuniform_be_tail, "nonuniform_be"),
        "zero_bias" => inverted(|p, u| zero_bias_tail_at_threshold(p, p.sigma() * u).value, "zero_bias"),
        "default" => default_quantile(prob, delta, sided),
        "wasserstein" => provider.quantile(prob, delta, sided),
        _ => Err(Error::Domain("unknown quantile bound")),
    }
}

/// Unknown-variance quantile of `S_n` (or `|S_n|`) at level `δ`.
pub fn empirical_named<O: OmegaProvider>(
    name: &str,
    summary: &SampleSummary,
    r: f64,
    delta: f64,
    sided: Sided,
    search: SigmaSearch,
    provider: &O,
) -> Result<BoundResult> {
    match name {
        "ebe" => efficient_ebe_quantile_with(summary, r, delta, sided, search, provider),
        "eb" => {
            let level = match sided {
                Sided::One => delta,
                Sided::Two => 0.5 * delta,
            };
            Ok(BoundResult::new(empirical_bernstein_quantile(summary, r, level)?, "eb"))
        }
        "hoeffding" => Ok(BoundResult::new(hoeffding_quantile(r, delta, sided)?, "hoeffding")),
        _ => Err(Error::Domain("unknown empirical bound")),
    }
}

/// `σΦ^{-1}(1 − δ)` or `σΦ^{-1}(1 − δ/2)`: the Gaussian quantile every
/// efficient bound approaches.
pub fn gaussian_reference(sigma: f64, delta: f64, sided: Sided) -> Result<f64> {
    let level = match sided {
        Sided::One => delta,
        Sided::Two => 0.5 * delta,
    };
    Ok(sigma * std_normal_quantile_upper(level)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use effconc_core::wasserstein::DirectOmega;

    #[test]
    fn resolve_expands_all_and_rejects_unknown() {
        let all = resolve(&["all".into()], &TAIL_BOUNDS).unwrap();
        assert_eq!(all, TAIL_BOUNDS.to_vec());
        assert!(resolve(&["nope".into()], &TAIL_BOUNDS).is_err());
    }

    #[test]
    fn hoeffding_tail_at_zero_is_one() {
        let prob = Problem::new(100, 1.0, 0.5).unwrap();
        let b = tail_named("hoeffding", &prob, 0.0, Sided::One, &DirectOmega).unwrap();
        assert_eq!(b.value, 1.0);
    }

    #[test]
    fn efficient_quantile_at_most_hoeffding() {
        let prob = Problem::new(1000, 1.0, 0.25).unwrap();
        for sided in [Sided::One, Sided::Two] {
            let w = quantile_named("wasserstein", &prob, 0.05, sided, &DirectOmega).unwrap();
            let h = quantile_named("hoeffding", &prob, 0.05, sided, &DirectOmega).unwrap();
            assert!(w.value <= h.value);
        }
    }

    #[test]
    fn one_sided_bernstein_uses_doubled_level() {
        let prob = Problem::new(1000, 1.0, 0.25).unwrap();
        let one = quantile_named("bernstein", &prob, 0.025, Sided::One, &DirectOmega).unwrap();
        let two = quantile_named("bernstein", &prob, 0.05, Sided::Two, &DirectOmega).unwrap();
        assert_eq!(one.value, two.value);
    }
}
