//! State vectors as text (`qmak-state 1 <dim>` then one `re im` pair per
//! line, 17 significant digits) or binary (`QMKS`, u32 version, u64 dim,
//! then little-endian f64 pairs). Bundles are a JSON manifest plus one
//! text file per witness.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qmak_core::linalg::C64;
use qmak_core::merlin::WitnessBundle;
use qmak_core::state::StateVector;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

const TEXT_MAGIC: &str = "qmak-state";
const BINARY_MAGIC: &[u8; 4] = b"QMKS";
pub const STATE_FORMAT_VERSION: u32 = 1;

pub fn state_to_text(s: &StateVector) -> String {
    let mut out = format!("{TEXT_MAGIC} {STATE_FORMAT_VERSION} {}\n", s.dim());
    for a in s.amps() {
        let _ = writeln!(out, "{:.16e} {:.16e}", a.re, a.im);
    }
    out
}

pub fn state_from_text(path: &Path, text: &str) -> Result<StateVector> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines
        .next()
        .ok_or_else(|| CliError::parse(path, 1, "empty state file"))?;
    let h: Vec<&str> = head.split_whitespace().collect();
    if h.len() != 3 || h[0] != TEXT_MAGIC {
        return Err(CliError::parse(path, 1, "expected `qmak-state <version> <dim>` header"));
    }
    if h[1] != STATE_FORMAT_VERSION.to_string() {
        return Err(CliError::parse(
            path,
            1,
            format!("unsupported state format version {}", h[1]),
        ));
    }
    let dim: usize = h[2].parse().map_err(|_| CliError::parse(path, 1, "bad dimension"))?;
    let mut amps = Vec::with_capacity(dim);
    for (i, l) in lines {
        let f: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| CliError::parse(path, i + 1, "bad amplitude"))?;
        if f.len() != 2 {
            return Err(CliError::parse(path, i + 1, "expected `re im`"));
        }
        amps.push(C64::new(f[0], f[1]));
    }
    if amps.len() != dim {
        return Err(CliError::parse(
            path,
            1,
            format!("header declares {dim} amplitudes, found {}", amps.len()),
        ));
    }
    StateVector::from_stored(amps).map_err(|e| CliError::parse(path, 1, e.to_string()))
}

pub fn state_to_binary(s: &StateVector) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 16 * s.dim());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&STATE_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(s.dim() as u64).to_le_bytes());
    for a in s.amps() {
        out.extend_from_slice(&a.re.to_le_bytes());
        out.extend_from_slice(&a.im.to_le_bytes());
    }
    out
}

pub fn state_from_binary(path: &Path, bytes: &[u8]) -> Result<StateVector> {
    let bad = |msg: &str| CliError::parse(path, 0, msg);
    if bytes.len() < 16 || &bytes[..4] != BINARY_MAGIC {
        return Err(bad("missing QMKS header"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != STATE_FORMAT_VERSION {
        return Err(bad("unsupported state format version"));
    }
    let dim = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body = &bytes[16..];
    if body.len() != dim.checked_mul(16).ok_or_else(|| bad("dimension overflow"))? {
        return Err(bad("length does not match dimension"));
    }
    let amps = body
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    StateVector::from_stored(amps).map_err(|e| CliError::parse(path, 0, e.to_string()))
}

pub fn write_state(path: &Path, s: &StateVector) -> Result<()> {
    let data = if path.extension().is_some_and(|e| e == "bin") {
        state_to_binary(s)
    } else {
        state_to_text(s).into_bytes()
    };
    std::fs::write(path, data).map_err(|e| CliError::io(path, e))
}

pub fn read_state(path: &Path) -> Result<StateVector> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    if bytes.starts_with(BINARY_MAGIC) {
        state_from_binary(path, &bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| CliError::parse(path, 0, "not UTF-8"))?;
        state_from_text(path, &text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub format_version: u32,
    pub k: usize,
    pub n: usize,
    pub strategy: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    /// Witness files relative to the manifest.
    pub witnesses: Vec<PathBuf>,
}

/// Writes `manifest.json` and `witness_<i>.txt` into `dir`.
pub fn write_bundle(
    dir: &Path,
    bundle: &WitnessBundle,
    strategy: &str,
    parameters: serde_json::Value,
    seed: u64,
) -> Result<BundleManifest> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut witnesses = Vec::with_capacity(bundle.len());
    for (i, w) in bundle.witnesses().iter().enumerate() {
        let name = PathBuf::from(format!("witness_{i}.txt"));
        write_state(&dir.join(&name), w)?;
        witnesses.push(name);
    }
    let manifest = BundleManifest {
        format_version: STATE_FORMAT_VERSION,
        k: bundle.len(),
        n: bundle.dim(),
        strategy: strategy.to_string(),
        parameters,
        seed,
        witnesses,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

pub fn read_bundle(manifest_path: &Path) -> Result<(BundleManifest, WitnessBundle)> {
    let text = std::fs::read_to_string(manifest_path).map_err(|e| CliError::io(manifest_path, e))?;
    let manifest: BundleManifest =
        serde_json::from_str(&text).map_err(|e| CliError::parse(manifest_path, e.line(), e.to_string()))?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let states = manifest
        .witnesses
        .iter()
        .map(|w| read_state(&dir.join(w)))
        .collect::<Result<Vec<_>>>()?;
    if states.len() != manifest.k || states.iter().any(|s| s.dim() != manifest.n) {
        return Err(CliError::parse(
            manifest_path,
            0,
            "manifest K/N disagree with the witness files",
        ));
    }
    let bundle = WitnessBundle::new(states).map_err(|e| CliError::parse(manifest_path, 0, e.to_string()))?;
    Ok((manifest, bundle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use qmak_core::rng::seeded;

    proptest! {
        #[test]
        fn text_round_trip_is_bit_exact(seed in any::<u64>(), dim in 1usize..64) {
            let s = StateVector::random(dim, &mut seeded(seed));
            let back = state_from_text(Path::new("s"), &state_to_text(&s)).unwrap();
            prop_assert_eq!(back.amps(), s.amps());
        }

        #[test]
        fn binary_round_trip_is_bit_exact(seed in any::<u64>(), dim in 1usize..64) {
            let s = StateVector::random(dim, &mut seeded(seed));
            let back = state_from_binary(Path::new("s"), &state_to_binary(&s)).unwrap();
            prop_assert_eq!(back.amps(), s.amps());
        }
    }

    #[test]
    fn rejects_bad_states() {
        let p = Path::new("s");
        assert!(state_from_text(p, "qmak-state 1 2\n1 0\n").is_err());
        assert!(state_from_text(p, "qmak-state 2 1\n1 0\n").is_err());
        assert!(state_from_text(p, "qmak-state 1 2\n1 0\n1 0\n").is_err());
        assert!(state_from_binary(p, b"QMKS").is_err());
    }

    #[test]
    fn bundle_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = seeded(1);
        let b = WitnessBundle::new((0..3).map(|_| StateVector::random(8, &mut rng)).collect()).unwrap();
        let m = write_bundle(dir.path(), &b, "random", serde_json::json!({"x": 1}), 7).unwrap();
        let (m2, b2) = read_bundle(&dir.path().join("manifest.json")).unwrap();
        assert_eq!(m, m2);
        assert_eq!(b, b2);
    }
}
