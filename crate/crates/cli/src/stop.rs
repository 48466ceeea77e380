//! Replicated (ε, δ)-stopping runs on uniform-average streams.

use effconc_core::stopping::{run_stopping, Rule, StoppingConfig, StoppingTrace, UniformAverageStream};
use effconc_core::wasserstein::OmegaProvider;
use effconc_core::Result;

use crate::mc::rng_for;

/// Stream id for replication `rep` at `ℓ`. Every rule sees the same data for
/// a given `(ℓ, rep)`, so rule comparisons are paired.
pub fn stream_id(ell: u32, rep: u32) -> u64 {
    (1 << 48) | ((ell as u64) << 24) | rep as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct StopRun {
    pub ell: u32,
    pub replication: u32,
    pub rule: Rule,
    pub trace: StoppingTrace,
}

/// Runs every rule on `reps` seeded streams for each `ℓ`, in the order
/// `ℓ`, replication, rule.
pub fn stop_experiment<O: OmegaProvider>(
    ells: &[u32],
    reps: u32,
    rules: &[Rule],
    seed: u64,
    config: &StoppingConfig,
    provider: &O,
) -> Result<Vec<StopRun>> {
    let mut runs = Vec::new();
    for &ell in ells {
        for rep in 0..reps {
            for &rule in rules {
                let mut stream = UniformAverageStream::from_rng(ell, rng_for(seed, stream_id(ell, rep)))?;
                let trace = run_stopping(&mut stream, rule, config, 1.0, provider)?;
                runs.push(StopRun { ell, replication: rep, rule, trace });
            }
        }
    }
    Ok(runs)
}

/// Mean stop time of `rule` at `ℓ`.
pub fn mean_stop(runs: &[StopRun], rule: Rule, ell: u32) -> Option<f64> {
    let ns: Vec<f64> = runs.iter().filter(|r| r.rule == rule && r.ell == ell).map(|r| r.trace.final_n as f64).collect();
    (!ns.is_empty()).then(|| ns.iter().sum::<f64>() / ns.len() as f64)
}

/// Fraction of `rule`'s runs at `ℓ` whose final mean misses by more than ε.
pub fn error_frequency(runs: &[StopRun], rule: Rule, ell: u32) -> Option<(f64, u64)> {
    let sel: Vec<bool> =
        runs.iter().filter(|r| r.rule == rule && r.ell == ell).filter_map(|r| r.trace.correct).collect();
    (!sel.is_empty()).then(|| (sel.iter().filter(|&&c| !c).count() as f64 / sel.len() as f64, sel.len() as u64))
}
