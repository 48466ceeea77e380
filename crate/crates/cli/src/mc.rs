//! Monte Carlo harness: Bernoulli-mixture sums, exceedance counting and the
//! validity suites shared by `selftest` and the acceptance tests.
//!
//! Randomness: every independent unit of work (a grid cell, a replication)
//! draws from `ChaCha8Rng::seed_from_u64(seed)` with its own stream id, so
//! units are independent and reproducible regardless of evaluation order.

use std::collections::BTreeMap;

use effconc_core::classical::Sided;
use effconc_core::empirical::{efficient_ebe_quantile_with, SampleSummary, SigmaSearch};
use effconc_core::wasserstein::OmegaProvider;
use effconc_core::{Problem, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::bounds::tail_named;

/// The generator for stream `stream` under `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Summands `R·Bernoulli(q)` with variance `σ²`, `q ≤ 1/2`, so that
/// `W̄_n` is `R/n` times a Binomial(n, q) count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliMixture {
    pub n: u64,
    pub r: f64,
    pub q: f64,
}

impl BernoulliMixture {
    pub fn matching(prob: &Problem) -> Self {
        let ratio = prob.sigma() / prob.r();
        let disc = (1.0 - 4.0 * ratio * ratio).max(0.0);
        // (1 − √disc)/2 without cancellation.
        let q = 2.0 * ratio * ratio / (1.0 + disc.sqrt());
        Self { n: prob.n(), r: prob.r(), q }
    }

    pub fn mean(&self) -> f64 {
        self.r * self.q
    }

    /// `S_n = √n(W̄_n − E W_1)` for a success count.
    pub fn s_n(&self, count: u64) -> f64 {
        let n = self.n as f64;
        self.r * (count as f64 - n * self.q) / n.sqrt()
    }

    pub fn summary(&self, count: u64) -> Result<SampleSummary> {
        let f = count as f64 / self.n as f64;
        SampleSummary::new(self.n, self.r * f, self.r * self.r * f * (1.0 - f), self.r)
    }

    /// `reps` independent success counts, tallied.
    pub fn sample_counts(&self, reps: u64, rng: &mut ChaCha8Rng) -> BTreeMap<u64, u64> {
        let dist = Binomial::new(self.n, self.q).expect("q lies in [0, 1/2]");
        let mut hist = BTreeMap::new();
        for _ in 0..reps {
            *hist.entry(dist.sample(rng)).or_insert(0) += 1;
        }
        hist
    }
}

/// `√(b(1 − b)/reps)` with `b` clipped to `[0, 1]`: the standard error of an
/// exceedance frequency whose true probability sits exactly at the bound.
pub fn binomial_stderr(bound: f64, reps: u64) -> f64 {
    let b = bound.clamp(0.0, 1.0);
    (b * (1.0 - b) / reps as f64).sqrt()
}

/// Observed exceedances out of `reps` draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exceedance {
    pub hits: u64,
    pub reps: u64,
}

impl Exceedance {
    pub fn freq(&self) -> f64 {
        self.hits as f64 / self.reps as f64
    }

    /// `freq ≤ bound + 3·stderr(bound)`.
    pub fn within(&self, bound: f64) -> bool {
        self.freq() <= bound + 3.0 * binomial_stderr(bound, self.reps)
    }
}

/// Tail bounds covered by the validity suite.
pub const VALIDITY_TAIL_BOUNDS: [&str; 6] =
    ["hoeffding", "bernstein", "berry_esseen", "nonuniform_be", "zero_bias", "wasserstein"];

#[derive(Debug, Clone, PartialEq)]
pub struct TailCell {
    pub n: u64,
    pub sigma: f64,
    pub u: f64,
    pub bound: &'static str,
    pub value: f64,
    pub exceed: Exceedance,
}

impl TailCell {
    pub fn passed(&self) -> bool {
        self.exceed.within(self.value)
    }
}

/// Empirical `P(S_n ≥ σu)` against every bound in `bounds` on the grid.
/// Counts are drawn once per `(n, σ)` and shared across `u` and bounds.
pub fn tail_validity<O: OmegaProvider>(
    ns: &[u64],
    sigmas: &[f64],
    us: &[f64],
    bounds: &[&'static str],
    reps: u64,
    seed: u64,
    provider: &O,
) -> Result<Vec<TailCell>> {
    let mut cells = Vec::new();
    let mut stream = 0;
    for &sigma in sigmas {
        for &n in ns {
            let prob = Problem::new(n, 1.0, sigma)?;
            let mix = BernoulliMixture::matching(&prob);
            let hist = mix.sample_counts(reps, &mut rng_for(seed, stream));
            stream += 1;
            for &u in us {
                let hits = hist.iter().filter(|(&k, _)| mix.s_n(k) >= sigma * u).map(|(_, &c)| c).sum();
                let exceed = Exceedance { hits, reps };
                for &bound in bounds {
                    let b = tail_named(bound, &prob, u, Sided::One, provider)?;
                    cells.push(TailCell { n, sigma, u, bound, value: b.value, exceed });
                }
            }
        }
    }
    Ok(cells)
}

/// Which quantile bound a [`QuantileCell`] checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantileKind {
    /// Known-variance efficient quantile with default auxiliaries.
    Efficient,
    /// Empirical Berry-Esseen quantile from each sample's own mean and variance.
    Ebe,
}

impl QuantileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            QuantileKind::Efficient => "efficient",
            QuantileKind::Ebe => "ebe",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileCell {
    pub n: u64,
    pub sigma: f64,
    pub delta: f64,
    pub sided: Sided,
    pub kind: QuantileKind,
    /// The bound for the known-variance kind; the mean bound over samples for EBE.
    pub value: f64,
    pub exceed: Exceedance,
}

impl QuantileCell {
    pub fn passed(&self) -> bool {
        self.exceed.within(self.delta)
    }
}

fn exceeds(s: f64, q: f64, sided: Sided) -> bool {
    match sided {
        Sided::One => s >= q,
        Sided::Two => s.abs() >= q,
    }
}

/// Empirical `P(S_n ≥ q)` (or `P(|S_n| ≥ q)`) for the requested quantile kind.
///
/// The EBE bound depends on a sample only through its success count, so it
/// is computed once per distinct count.
#[allow(clippy::too_many_arguments)]
pub fn quantile_validity<O: OmegaProvider>(
    ns: &[u64],
    sigmas: &[f64],
    deltas: &[f64],
    sided: Sided,
    kind: QuantileKind,
    search: SigmaSearch,
    reps: u64,
    seed: u64,
    provider: &O,
) -> Result<Vec<QuantileCell>> {
    let mut cells = Vec::new();
    let mut stream = 1 << 32;
    for &sigma in sigmas {
        for &n in ns {
            let prob = Problem::new(n, 1.0, sigma)?;
            let mix = BernoulliMixture::matching(&prob);
            let hist = mix.sample_counts(reps, &mut rng_for(seed, stream));
            stream += 1;
            for &delta in deltas {
                let (hits, total) = match kind {
                    QuantileKind::Efficient => {
                        let q = provider.quantile(&prob, delta, sided)?.value;
                        let hits = hist.iter().filter(|(&k, _)| exceeds(mix.s_n(k), q, sided)).map(|(_, &c)| c).sum();
                        (hits, q * reps as f64)
                    }
                    QuantileKind::Ebe => {
                        let mut hits = 0;
                        let mut total = 0.0;
                        for (&k, &c) in &hist {
                            let q = efficient_ebe_quantile_with(&mix.summary(k)?, 1.0, delta, sided, search, provider)?
                                .value;
                            if exceeds(mix.s_n(k), q, sided) {
                                hits += c;
                            }
                            total += q * c as f64;
                        }
                        (hits, total)
                    }
                };
                cells.push(QuantileCell {
                    n,
                    sigma,
                    delta,
                    sided,
                    kind,
                    value: total / reps as f64,
                    exceed: Exceedance { hits, reps },
                });
            }
        }
    }
    Ok(cells)
}
