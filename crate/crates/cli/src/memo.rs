//! Memoized `ω_p^R` and known-variance quantiles.

use std::collections::HashMap;
use std::sync::RwLock;

use effconc_core::classical::{BoundResult, Sided};
use effconc_core::wasserstein::{omega, wass_quantile_default, OmegaProvider, OmegaValue};
use effconc_core::{Problem, Result};

type ProblemKey = (u64, u64, u64);

fn problem_key(prob: &Problem) -> ProblemKey {
    (prob.n(), prob.r().to_bits(), prob.sigma().to_bits())
}

/// An [`OmegaProvider`] that caches every `ω_p^R` by `(n, R, σ, p)` and every
/// efficient quantile by `(n, R, σ, δ, sided)`.
///
/// Keys use exact bit patterns, so cached values equal fresh ones.
#[derive(Debug, Default)]
pub struct MemoOmega {
    omega: RwLock<HashMap<(ProblemKey, u32), Result<OmegaValue>>>,
    quantile: RwLock<HashMap<(ProblemKey, u64, Sided), Result<BoundResult>>>,
}

impl MemoOmega {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of cached `ω` and quantile entries.
    pub fn len(&self) -> (usize, usize) {
        (
            self.omega.read().expect("omega cache poisoned").len(),
            self.quantile.read().expect("quantile cache poisoned").len(),
        )
    }

    pub fn is_empty(&self) -> bool {
        self.len() == (0, 0)
    }
}

impl OmegaProvider for MemoOmega {
    fn omega(&self, prob: &Problem, p: u32) -> Result<OmegaValue> {
        let key = (problem_key(prob), p);
        if let Some(v) = self.omega.read().expect("omega cache poisoned").get(&key) {
            return v.clone();
        }
        let v = omega(prob, p);
        self.omega.write().expect("omega cache poisoned").insert(key, v.clone());
        v
    }

    fn quantile(&self, prob: &Problem, delta: f64, sided: Sided) -> Result<BoundResult> {
        let key = (problem_key(prob), delta.to_bits(), sided);
        if let Some(v) = self.quantile.read().expect("quantile cache poisoned").get(&key) {
            return v.clone();
        }
        let v = wass_quantile_default(prob, delta, sided, self);
        self.quantile.write().expect("quantile cache poisoned").insert(key, v.clone());
        v
    }
}
