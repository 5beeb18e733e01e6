use std::collections::BTreeMap;

use qmak_core::rng::{prover_rng, trial_rng};
use qmak_core::sat::{brute_force_max_sat, Assignment};
use qmak_core::stats::{wilson_interval, Z95};
use qmak_core::verifier::{partition_blocks, run_protocol, Branch, Detail};
use serde::Serialize;

use super::{create_dir, write_json, write_jsonl, write_meta};
use crate::config::{config_hash, SimulateConfig};
use crate::error::Result;
use crate::formats::certificate::read_certificate;
use crate::formats::state::write_bundle;
use crate::harness::run_trials;
use crate::strategy::{build_bundle, StrategyParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub branch: &'static str,
    pub accepted: bool,
    pub detail: Detail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchStats {
    pub runs: u64,
    pub accepted: u64,
    pub acceptance: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl BranchStats {
    pub fn new(runs: u64, accepted: u64) -> Self {
        let (lo, hi) = if runs == 0 {
            (0.0, 1.0)
        } else {
            wilson_interval(accepted, runs, Z95)
        };
        let acceptance = if runs == 0 {
            f64::NAN
        } else {
            accepted as f64 / runs as f64
        };
        BranchStats {
            runs,
            accepted,
            acceptance,
            wilson_low: lo,
            wilson_high: hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateSummary {
    pub config: SimulateConfig,
    pub config_hash: String,
    pub n: usize,
    pub k: usize,
    /// Satisfied fraction of the assignment the witnesses are built from.
    pub base_assignment_fraction: f64,
    pub overall: BranchStats,
    pub branches: BTreeMap<&'static str, BranchStats>,
}

/// Runs the three-test protocol `trials` times against one witness bundle
/// and writes `trials.jsonl`, `summary.json` and the bundle itself.
pub fn cmd_simulate(cfg: &SimulateConfig) -> Result<SimulateSummary> {
    let cert = read_certificate(&cfg.certificate)?;
    let n = cert.target.num_vars();
    // Witnesses are built on the lift of the best source assignment, which
    // is what an honest prover would send.
    let best = brute_force_max_sat(&cert.source, cfg.cap)?;
    let base: Assignment = cert.lift(&best.assignment)?;
    let params = StrategyParams {
        support_fraction: cfg.support_fraction,
        sigma: cfg.sigma,
        delta: cfg.delta,
    };
    let bundle = build_bundle(cfg.strategy, &base, cfg.k, &params, &mut prover_rng(cfg.seed, 0))?;
    let part = partition_blocks(&cert.target);

    let records = run_trials(cfg.trials, |t| {
        let r = run_protocol(&bundle, &cert.target, &part, &mut trial_rng(cfg.seed, t))?;
        Ok(TrialRecord {
            trial: t,
            branch: r.branch().name(),
            accepted: r.accepted(),
            detail: r.detail,
        })
    })?;

    let mut branches = BTreeMap::new();
    for b in Branch::ALL {
        let runs = records.iter().filter(|r| r.branch == b.name()).count() as u64;
        let acc = records.iter().filter(|r| r.branch == b.name() && r.accepted).count() as u64;
        branches.insert(b.name(), BranchStats::new(runs, acc));
    }
    let accepted = records.iter().filter(|r| r.accepted).count() as u64;
    let hash = config_hash(cfg);
    let summary = SimulateSummary {
        config: cfg.clone(),
        config_hash: hash.clone(),
        n,
        k: cfg.k,
        base_assignment_fraction: qmak_core::sat::eval_2in4(&cert.target, &base)?,
        overall: BranchStats::new(cfg.trials, accepted),
        branches,
    };
    create_dir(&cfg.out_dir)?;
    write_jsonl(&cfg.out_dir.join("trials.jsonl"), &records)?;
    write_json(&cfg.out_dir.join("summary.json"), &summary)?;
    write_bundle(
        &cfg.out_dir.join("bundle"),
        &bundle,
        cfg.strategy.name(),
        params.describe(cfg.strategy),
        cfg.seed,
    )?;
    write_meta(&cfg.out_dir, "simulate", &hash)?;
    Ok(summary)
}
