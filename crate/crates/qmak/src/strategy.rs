use qmak_core::merlin::{
    adversary_concentrated, adversary_nonidentical, adversary_phased, honest_bundle, random_support, WitnessBundle,
};
use qmak_core::sat::Assignment;
use qmak_core::state::proper_state;
use rand::Rng;
use serde_json::json;

use crate::config::Strategy;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyParams {
    pub support_fraction: f64,
    pub sigma: f64,
    pub delta: f64,
}

impl StrategyParams {
    pub fn describe(&self, s: Strategy) -> serde_json::Value {
        match s {
            Strategy::Honest => json!({}),
            Strategy::Concentrated => json!({ "support_fraction": self.support_fraction }),
            Strategy::Phased => json!({ "sigma": self.sigma }),
            Strategy::Nonidentical => json!({ "delta": self.delta }),
        }
    }
}

/// Witnesses for `strategy`, built around the proper state of `base`
/// where the strategy uses one.
pub fn build_bundle<R: Rng + ?Sized>(
    strategy: Strategy,
    base: &Assignment,
    k: usize,
    params: &StrategyParams,
    rng: &mut R,
) -> Result<WitnessBundle> {
    let n = base.len();
    Ok(match strategy {
        Strategy::Honest => honest_bundle(base, k)?,
        Strategy::Concentrated => {
            let size = ((params.support_fraction * n as f64).round() as usize).clamp(1, n);
            let support = random_support(n, size, rng)?;
            adversary_concentrated(n, &support, k, rng)?
        }
        Strategy::Phased => adversary_phased(base, params.sigma, k, rng)?,
        Strategy::Nonidentical => adversary_nonidentical(&proper_state(base, n)?, params.delta, k, rng)?,
    })
}
