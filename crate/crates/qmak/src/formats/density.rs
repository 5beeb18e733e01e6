//! Two-qubit densities as text: `qmak-density 1 4`, then four rows of four
//! `re im` pairs, row-major.

use std::fmt::Write as _;
use std::path::Path;

use qmak_core::amplification::TwoQubitDensity;
use qmak_core::linalg::{CMatrix, C64};

use crate::error::{CliError, Result};

pub fn density_to_text(rho: &TwoQubitDensity) -> String {
    let m = rho.matrix();
    let mut out = format!("qmak-density 1 {}\n", m.dim());
    for i in 0..m.dim() {
        let row: Vec<String> = (0..m.dim())
            .map(|j| format!("{:.16e} {:.16e}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        let _ = writeln!(out, "{}", row.join("  "));
    }
    out
}

pub fn density_from_text(path: &Path, text: &str) -> Result<TwoQubitDensity> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines
        .next()
        .ok_or_else(|| CliError::parse(path, 1, "empty density file"))?;
    let h: Vec<&str> = head.split_whitespace().collect();
    if h.len() != 3 || h[0] != "qmak-density" || h[1] != "1" {
        return Err(CliError::parse(path, 1, "expected `qmak-density 1 <dim>` header"));
    }
    let dim: usize = h[2].parse().map_err(|_| CliError::parse(path, 1, "bad dimension"))?;
    let mut data = Vec::with_capacity(dim * dim);
    for (i, l) in lines {
        let f: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| CliError::parse(path, i + 1, "bad entry"))?;
        if f.len() != 2 * dim {
            return Err(CliError::parse(path, i + 1, format!("expected {dim} `re im` pairs")));
        }
        data.extend(f.chunks(2).map(|c| C64::new(c[0], c[1])));
    }
    if data.len() != dim * dim {
        return Err(CliError::parse(path, 1, format!("expected {dim} rows")));
    }
    TwoQubitDensity::new(CMatrix::from_rows(dim, data)).map_err(|e| CliError::parse(path, 1, e.to_string()))
}

pub fn read_density(path: &Path) -> Result<TwoQubitDensity> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    density_from_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qmak_core::rng::seeded;

    #[test]
    fn round_trip() {
        let mut rng = seeded(3);
        for rank in 1..=4 {
            let rho = TwoQubitDensity::random(rank, &mut rng).unwrap();
            let back = density_from_text(Path::new("d"), &density_to_text(&rho)).unwrap();
            assert_eq!(back.matrix().as_slice(), rho.matrix().as_slice());
        }
    }

    #[test]
    fn rejects_non_densities() {
        let p = Path::new("d");
        let eye = "qmak-density 1 4\n".to_string()
            + &(0..4)
                .map(|i| {
                    (0..4)
                        .map(|j| if i == j { "1 0" } else { "0 0" })
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect::<Vec<_>>()
                .join("\n");
        assert!(density_from_text(p, &eye).is_err());
        assert!(density_from_text(p, "qmak-density 1 2\n0.5 0 0 0\n0 0 0.5 0\n").is_err());
    }
}
