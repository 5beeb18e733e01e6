use qmak_core::reduction::{measure_gap, reduce_full, ReductionOptions};
use serde::Serialize;

use super::{create_dir, write_json, write_meta};
use crate::config::{config_hash, ReduceConfig};
use crate::error::{CliError, Result};
use crate::formats::certificate::write_certificate;
use crate::formats::dimacs::{format_2in4, read_3sat};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReduceReport {
    pub config: ReduceConfig,
    pub config_hash: String,
    pub source_vars: usize,
    pub source_clauses: usize,
    pub target_vars: usize,
    pub target_clauses: usize,
    pub max_occurrence: usize,
    pub observed_max_occurrence: usize,
    /// `1 - max satisfiable fraction` of the target; absent when skipped or
    /// refused.
    pub gap: Option<f64>,
    pub gap_status: String,
}

/// Writes `certificate.json`, `target.2in4` and `report.json`. A gap
/// measurement refused by the brute-force cap is still reported, then
/// surfaced as an error.
pub fn cmd_reduce(cfg: &ReduceConfig) -> Result<ReduceReport> {
    let inst = read_3sat(&cfg.input)?;
    let cert = reduce_full(
        &inst,
        &ReductionOptions {
            max_occurrence: cfg.max_occurrence,
            pad_to: cfg.pad_to,
        },
    )?;
    create_dir(&cfg.out_dir)?;
    write_certificate(&cfg.out_dir.join("certificate.json"), &cert)?;
    let target_path = cfg.out_dir.join("target.2in4");
    std::fs::write(&target_path, format_2in4(&cert.target, cfg.max_occurrence))
        .map_err(|e| CliError::io(&target_path, e))?;

    let (gap, gap_status, refusal) = if !cfg.measure_gap {
        (None, "skipped".to_string(), None)
    } else {
        match measure_gap(&cert, cfg.cap) {
            Ok(g) => (Some(g), "measured".to_string(), None),
            Err(e) if e.is_precondition() => (None, format!("refused: {e}"), Some(e)),
            Err(e) => return Err(e.into()),
        }
    };
    let hash = config_hash(cfg);
    let report = ReduceReport {
        config: cfg.clone(),
        config_hash: hash.clone(),
        source_vars: inst.num_vars(),
        source_clauses: inst.num_clauses(),
        target_vars: cert.target.num_vars(),
        target_clauses: cert.target.num_clauses(),
        max_occurrence: cfg.max_occurrence,
        observed_max_occurrence: cert.target.max_occurrence(),
        gap,
        gap_status,
    };
    write_json(&cfg.out_dir.join("report.json"), &report)?;
    write_meta(&cfg.out_dir, "reduce", &hash)?;
    match refusal {
        Some(e) => Err(e.into()),
        None => Ok(report),
    }
}
