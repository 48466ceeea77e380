//! (ε, δ)-stopping: sample until `|W̄_n − E W_1| ≤ ε` holds with probability
//! at least `1 − δ`.
//!
//! Adaptive rules check a two-sided confidence half-width on a geometric
//! schedule `n_k = ⌈n₁γ^k⌉`, spending `δ·6/(π²(k+1)²)` at check `k` so the
//! total spent never exceeds `δ`.

use alloc::vec::Vec;

use libm::{ceil, log, pow, sqrt};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::Sided;
use crate::empirical::{efficient_ebe_quantile_with, empirical_bernstein_quantile, SampleSummary, SigmaSearch};
use crate::error::{Error, Result};
use crate::wasserstein::OmegaProvider;

/// Stopping rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Stop at the fixed sample size implied by Hoeffding's inequality.
    Hoeffding,
    /// Geometric checks with the empirical Bernstein half-width.
    EmpBernstein,
    /// Geometric checks with the empirical Berry-Esseen half-width.
    Ebe,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Hoeffding => "hoeffding",
            Rule::EmpBernstein => "eb",
            Rule::Ebe => "ebe",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// First check `n₁`.
    pub schedule_base: u64,
    /// Growth factor `γ > 1` between checks.
    pub schedule_ratio: f64,
    /// Search over `σ̃` inside the empirical Berry-Esseen half-width.
    pub sigma_search: SigmaSearch,
}

impl StoppingConfig {
    pub fn new(epsilon: f64, delta: f64, schedule_base: u64, schedule_ratio: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain("epsilon must be positive"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain("delta must lie in (0, 1)"));
        }
        if schedule_base < 2 {
            return Err(Error::Domain("first check must use at least 2 samples"));
        }
        if !(schedule_ratio > 1.0 && schedule_ratio.is_finite()) {
            return Err(Error::Domain("schedule ratio must exceed 1"));
        }
        Ok(Self { epsilon, delta, schedule_base, schedule_ratio, sigma_search: SigmaSearch::Continuous })
    }

    pub fn with_sigma_search(mut self, search: SigmaSearch) -> Self {
        self.sigma_search = search;
        self
    }

    /// `δ` spent at check `k` (zero-based).
    pub fn budget(&self, k: usize) -> f64 {
        let kp1 = (k + 1) as f64;
        self.delta * 6.0 / (core::f64::consts::PI * core::f64::consts::PI * kp1 * kp1)
    }

    /// Sample size at check `k`, strictly increasing in `k`.
    pub fn check_n(&self, k: usize) -> u64 {
        let mut prev = 0u64;
        let mut n = 0u64;
        for j in 0..=k {
            n = (ceil(self.schedule_base as f64 * pow(self.schedule_ratio, j as f64)) as u64).max(prev + 1);
            prev = n;
        }
        n
    }
}

impl Default for StoppingConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            delta: 0.1,
            schedule_base: 32,
            schedule_ratio: 1.5,
            sigma_search: SigmaSearch::Continuous,
        }
    }
}

/// One check of a stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckRecord {
    pub n: u64,
    pub half_width: f64,
    pub budget: f64,
    pub stopped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingTrace {
    pub checks: Vec<CheckRecord>,
    pub final_n: u64,
    pub final_mean: f64,
    /// `|final_mean − E W_1| ≤ ε`, when the source knows its mean.
    pub correct: Option<bool>,
}

/// A sequence of observations in `[0, R]`.
pub trait DataSource {
    fn next_value(&mut self) -> Option<f64>;

    /// The population mean, if known (simulation sources).
    fn true_mean(&self) -> Option<f64> {
        None
    }
}

/// I.i.d. draws, each the average of `ℓ` independent `Uniform[0, 1]` values.
#[derive(Debug, Clone)]
pub struct UniformAverageStream {
    ell: u32,
    rng: ChaCha8Rng,
}

impl UniformAverageStream {
    /// A stream drawing from an already seeded generator, e.g. one ChaCha
    /// stream per replication.
    pub fn from_rng(ell: u32, rng: ChaCha8Rng) -> Result<Self> {
        if ell == 0 {
            return Err(Error::Domain("ell must be at least 1"));
        }
        Ok(Self { ell, rng })
    }

    pub fn variance(&self) -> f64 {
        1.0 / (12.0 * self.ell as f64)
    }
}

/// A seeded [`UniformAverageStream`] with mean 1/2 and variance `1/(12ℓ)`.
pub fn uniform_average_stream(ell: u32, seed: u64) -> Result<UniformAverageStream> {
    UniformAverageStream::from_rng(ell, ChaCha8Rng::seed_from_u64(seed))
}

impl DataSource for UniformAverageStream {
    fn next_value(&mut self) -> Option<f64> {
        let mut sum = 0.0;
        for _ in 0..self.ell {
            sum += (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        }
        Some(sum / self.ell as f64)
    }

    fn true_mean(&self) -> Option<f64> {
        Some(0.5)
    }
}

impl<I: Iterator<Item = f64>> DataSource for core::iter::Fuse<I> {
    fn next_value(&mut self) -> Option<f64> {
        self.next()
    }
}

/// `⌈R² log(2/δ)/(2ε²)⌉`.
pub fn hoeffding_stop_n(r: f64, epsilon: f64, delta: f64) -> Result<u64> {
    if !(r > 0.0 && epsilon > 0.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain("need R > 0, epsilon > 0 and delta in (0, 1)"));
    }
    Ok(ceil(r * r * log(2.0 / delta) / (2.0 * epsilon * epsilon)) as u64)
}

// Running mean and sum of squared deviations (Welford).
#[derive(Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }
}

fn consume<S: DataSource>(stream: &mut S, moments: &mut Moments, target: u64, r: f64) -> Result<()> {
    while moments.n < target {
        match stream.next_value() {
            Some(x) if (0.0..=r).contains(&x) => moments.push(x),
            Some(_) => return Err(Error::Domain("stream value outside [0, R]")),
            None => return Err(Error::StreamExhausted { consumed: moments.n }),
        }
    }
    Ok(())
}

/// Two-sided half-width on `W̄_n` for an adaptive rule at level `budget`.
pub fn half_width<O: OmegaProvider>(
    rule: Rule,
    summary: &SampleSummary,
    r: f64,
    budget: f64,
    provider: &O,
) -> Result<f64> {
    half_width_with(rule, summary, r, budget, SigmaSearch::Continuous, provider)
}

/// [`half_width`] with an explicit [`SigmaSearch`] for the empirical Berry-Esseen rule.
pub fn half_width_with<O: OmegaProvider>(
    rule: Rule,
    summary: &SampleSummary,
    r: f64,
    budget: f64,
    search: SigmaSearch,
    provider: &O,
) -> Result<f64> {
    let sqrt_n = sqrt(summary.n as f64);
    match rule {
        Rule::Hoeffding => Ok(r * sqrt(log(2.0 / budget) / (2.0 * summary.n as f64))),
        Rule::EmpBernstein => Ok(empirical_bernstein_quantile(summary, r, 0.5 * budget)? / sqrt_n),
        Rule::Ebe => Ok(efficient_ebe_quantile_with(summary, r, budget, Sided::Two, search, provider)?.value / sqrt_n),
    }
}

/// Runs one stopping rule on `stream`.
pub fn run_stopping<S: DataSource, O: OmegaProvider>(
    stream: &mut S,
    rule: Rule,
    config: &StoppingConfig,
    r: f64,
    provider: &O,
) -> Result<StoppingTrace> {
    let mut moments = Moments::default();
    let mut checks = Vec::new();
    let finish = |moments: &Moments, checks: Vec<CheckRecord>, stream: &S| StoppingTrace {
        final_n: moments.n,
        final_mean: moments.mean,
        correct: stream.true_mean().map(|mu| libm::fabs(moments.mean - mu) <= config.epsilon),
        checks,
    };
    if rule == Rule::Hoeffding {
        let n = hoeffding_stop_n(r, config.epsilon, config.delta)?;
        consume(stream, &mut moments, n, r)?;
        checks.push(CheckRecord {
            n,
            half_width: r * sqrt(log(2.0 / config.delta) / (2.0 * n as f64)),
            budget: config.delta,
            stopped: true,
        });
        return Ok(finish(&moments, checks, stream));
    }
    for k in 0.. {
        let n = config.check_n(k);
        consume(stream, &mut moments, n, r)?;
        let emp_var = (moments.m2 / n as f64).clamp(0.0, 0.25 * r * r);
        let summary = SampleSummary::new(n, moments.mean.clamp(0.0, r), emp_var, r)?;
        let budget = config.budget(k);
        let hw = half_width_with(rule, &summary, r, budget, config.sigma_search, provider)?;
        let stopped = hw <= config.epsilon;
        checks.push(CheckRecord { n, half_width: hw, budget, stopped });
        if stopped {
            break;
        }
    }
    Ok(finish(&moments, checks, stream))
}
