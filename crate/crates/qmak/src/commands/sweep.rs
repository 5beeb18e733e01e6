use qmak_core::merlin::WitnessBundle;
use qmak_core::rng::{prover_rng, trial_rng};
use qmak_core::sat::Assignment;
use qmak_core::stats::{wilson_interval, Z95};
use qmak_core::verifier::{default_k, uniformity_test, Detail};
use rand::Rng;
use serde::Serialize;

use super::{create_dir, write_json, write_meta};
use crate::config::{config_hash, SweepConfig};
use crate::error::{CliError, Result};
use crate::harness::run_trials;
use crate::strategy::{build_bundle, StrategyParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub beta: f64,
    pub k: usize,
    pub strategy: &'static str,
    pub trials: u64,
    pub rejections: u64,
    pub rejection_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub collision_frequency: f64,
    /// Empty when no trial collided.
    pub disagreement_given_collision: Option<f64>,
}

/// Uniformity Test rejection rates over the `(N, beta, strategy)` grid.
///
/// For a given `(N, strategy)` every beta shares one bundle (the first `K`
/// witnesses of the largest) and trial `t` uses the same stream, so a larger
/// `K` only adds measurements to each trial: collision frequency is
/// monotone in beta by construction.
pub fn cmd_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let params = StrategyParams {
        support_fraction: cfg.support_fraction,
        sigma: cfg.sigma,
        delta: cfg.delta,
    };
    let mut rows = Vec::new();
    for (ni, &n) in cfg.ns.iter().enumerate() {
        let k_max = cfg.betas.iter().map(|&b| default_k(n, b)).max().unwrap_or(2).max(2);
        for (si, &strategy) in cfg.strategies.iter().enumerate() {
            let mut rng = prover_rng(cfg.seed, ((ni as u64) << 16) | si as u64);
            let base = Assignment::new((0..n).map(|_| rng.random()).collect());
            let full = build_bundle(strategy, &base, k_max, &params, &mut rng)?;
            for &beta in &cfg.betas {
                let k = default_k(n, beta).max(2);
                let bundle = WitnessBundle::new(full.witnesses()[..k].to_vec())?;
                let outcomes = run_trials(cfg.trials, |t| {
                    let r = uniformity_test(&bundle, &mut trial_rng(cfg.seed, t))?;
                    let collided = matches!(&r.detail, Detail::Uniformity { collisions, .. } if !collisions.is_empty());
                    Ok((r.accepted(), collided))
                })?;
                let rejections = outcomes.iter().filter(|o| !o.0).count() as u64;
                let collisions = outcomes.iter().filter(|o| o.1).count() as u64;
                let (lo, hi) = wilson_interval(rejections, cfg.trials, Z95);
                rows.push(SweepRow {
                    n,
                    beta,
                    k,
                    strategy: strategy.name(),
                    trials: cfg.trials,
                    rejections,
                    rejection_rate: rejections as f64 / cfg.trials as f64,
                    wilson_low: lo,
                    wilson_high: hi,
                    collision_frequency: collisions as f64 / cfg.trials as f64,
                    disagreement_given_collision: (collisions > 0).then(|| rejections as f64 / collisions as f64),
                });
            }
        }
    }
    create_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path)?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    let hash = config_hash(cfg);
    write_json(
        &cfg.out_dir.join("summary.json"),
        &serde_json::json!({ "config": cfg, "config_hash": hash, "rows": rows.len() }),
    )?;
    write_meta(&cfg.out_dir, "sweep", &hash)?;
    Ok(rows)
}
