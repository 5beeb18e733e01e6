//! DIMACS-like instance text: `p 3sat n m` or `p 2in4 N M c`, then one
//! clause per line as signed 1-based literals (a trailing `0` is allowed).
//! Lines starting with `c` are comments.

use std::fmt::Write as _;
use std::path::Path;

use qmak_core::sat::{Literal, ThreeSatInstance, TwoOutOfFourInstance};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    ThreeSat(ThreeSatInstance),
    TwoInFour(TwoOutOfFourInstance),
}

fn clause<const K: usize>(path: &Path, line: usize, toks: &[i64], n: usize) -> Result<[Literal; K]> {
    let toks = match toks.split_last() {
        Some((0, rest)) => rest,
        _ => toks,
    };
    if toks.len() != K {
        return Err(CliError::parse(
            path,
            line,
            format!("expected {K} literals, found {}", toks.len()),
        ));
    }
    let mut out = [Literal { var: 0, negated: false }; K];
    for (o, &t) in out.iter_mut().zip(toks) {
        let lit = Literal::from_dimacs(t).ok_or_else(|| CliError::parse(path, line, format!("bad literal {t}")))?;
        if lit.var >= n {
            return Err(CliError::parse(
                path,
                line,
                format!("literal {t} exceeds {n} variables"),
            ));
        }
        *o = lit;
    }
    Ok(out)
}

pub fn parse(path: &Path, text: &str) -> Result<Instance> {
    let mut header: Option<(usize, Vec<usize>, String)> = None;
    let mut rows: Vec<(usize, Vec<i64>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('c') {
            continue;
        }
        if let Some(rest) = l.strip_prefix('p') {
            if header.is_some() {
                return Err(CliError::parse(path, line, "duplicate header"));
            }
            let mut it = rest.split_whitespace();
            let kind = it.next().unwrap_or_default().to_string();
            let nums = it
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| CliError::parse(path, line, format!("bad header field {t}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let want = match kind.as_str() {
                "3sat" => 2,
                "2in4" => 3,
                _ => return Err(CliError::parse(path, line, format!("unknown instance kind {kind:?}"))),
            };
            if nums.len() != want {
                return Err(CliError::parse(path, line, format!("header needs {want} numbers")));
            }
            header = Some((line, nums, kind));
            continue;
        }
        if header.is_none() {
            return Err(CliError::parse(path, line, "clause before header"));
        }
        let toks = l
            .split_whitespace()
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|_| CliError::parse(path, line, format!("bad literal {t}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((line, toks));
    }
    let (hline, nums, kind) = header.ok_or_else(|| CliError::parse(path, 0, "missing header"))?;
    let (n, m) = (nums[0], nums[1]);
    if rows.len() != m {
        return Err(CliError::parse(
            path,
            hline,
            format!("header declares {m} clauses, found {}", rows.len()),
        ));
    }
    let invalid = |e: qmak_core::Error| CliError::parse(path, hline, e.to_string());
    if kind == "3sat" {
        let clauses = rows
            .iter()
            .map(|(l, t)| clause::<3>(path, *l, t, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Instance::ThreeSat(ThreeSatInstance::new(n, clauses).map_err(invalid)?))
    } else {
        let clauses = rows
            .iter()
            .map(|(l, t)| clause::<4>(path, *l, t, n))
            .collect::<Result<Vec<_>>>()?;
        let inst = TwoOutOfFourInstance::new(n, clauses).map_err(invalid)?;
        if inst.max_occurrence() > nums[2] {
            return Err(CliError::parse(
                path,
                hline,
                format!(
                    "declared occurrence bound {} but a variable occurs {} times",
                    nums[2],
                    inst.max_occurrence()
                ),
            ));
        }
        Ok(Instance::TwoInFour(inst))
    }
}

pub fn read(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(path, &text)
}

pub fn read_3sat(path: &Path) -> Result<ThreeSatInstance> {
    match read(path)? {
        Instance::ThreeSat(i) => Ok(i),
        Instance::TwoInFour(_) => Err(CliError::parse(path, 0, "expected a 3sat instance")),
    }
}

fn write_clause(out: &mut String, lits: &[Literal]) {
    let line: Vec<String> = lits.iter().map(|l| l.to_dimacs().to_string()).collect();
    let _ = writeln!(out, "{}", line.join(" "));
}

pub fn format_3sat(inst: &ThreeSatInstance) -> String {
    let mut out = format!("p 3sat {} {}\n", inst.num_vars(), inst.num_clauses());
    for c in inst.clauses() {
        write_clause(&mut out, c);
    }
    out
}

pub fn format_2in4(inst: &TwoOutOfFourInstance, bound: usize) -> String {
    let mut out = format!("p 2in4 {} {} {}\n", inst.num_vars(), inst.num_clauses(), bound);
    for c in inst.clauses() {
        write_clause(&mut out, c);
    }
    out
}
