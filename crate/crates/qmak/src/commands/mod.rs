mod lemmas;
mod reduce;
mod simulate;
mod sweep;

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, Result};

pub use lemmas::{
    cmd_lemmas, low_ef_state, matching_families, random_balanced_pair, random_distribution, run_battery,
    werner_threshold, CheckRecord, CheckStatus, LemmasReport,
};
pub use reduce::{cmd_reduce, ReduceReport};
pub use simulate::{cmd_simulate, BranchStats, SimulateSummary, TrialRecord};
pub use sweep::{cmd_sweep, SweepRow};

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub(crate) fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for r in rows {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Wall-clock metadata, kept out of the science outputs so reruns are
/// byte-identical.
pub(crate) fn write_meta(dir: &Path, command: &str, config_hash: &str) -> Result<()> {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    write_json(
        &dir.join("meta.json"),
        &serde_json::json!({
            "command": command,
            "config_hash": config_hash,
            "version": env!("CARGO_PKG_VERSION"),
            "generated_unix": now,
        }),
    )
}
