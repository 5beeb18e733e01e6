//! SAT instances, evaluation, generation and the exhaustive max-SAT oracle.

mod brute;
mod generate;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

pub use brute::{brute_force_max_sat, brute_force_max_sat_with_prefix, MaxSat, DEFAULT_BRUTE_FORCE_CAP};
pub use generate::random_3sat;

/// A variable together with a polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub const fn pos(var: usize) -> Self {
        Literal { var, negated: false }
    }

    pub const fn neg(var: usize) -> Self {
        Literal { var, negated: true }
    }

    /// Build from a signed 1-based DIMACS index.
    pub fn from_dimacs(code: i64) -> Option<Self> {
        if code == 0 {
            return None;
        }
        let var = (code.unsigned_abs() - 1) as usize;
        Some(Literal { var, negated: code < 0 })
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }

    #[inline]
    pub fn eval(self, bits: &[bool]) -> bool {
        bits[self.var] != self.negated
    }

    pub fn negate(self) -> Self {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }
}

/// A 0/1 assignment to the variables of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Assignment {
    pub bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    pub fn zeros(n: usize) -> Self {
        Assignment { bits: vec![false; n] }
    }

    /// Bit `i` of `mask` becomes variable `i`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Assignment {
            bits: (0..n).map(|i| (mask >> i) & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn hamming(&self, other: &Assignment) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
    }

    pub fn complement(&self) -> Assignment {
        Assignment {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

fn check_clause<const K: usize>(num_vars: usize, idx: usize, clause: &[Literal; K]) -> Result<()> {
    for (a, lit) in clause.iter().enumerate() {
        if lit.var >= num_vars {
            return Err(Error::InvalidInstance(format!(
                "clause {idx}: variable {} out of range (num_vars = {num_vars})",
                lit.var
            )));
        }
        if clause[..a].iter().any(|other| other.var == lit.var) {
            return Err(Error::InvalidInstance(format!(
                "clause {idx}: variable {} repeated",
                lit.var
            )));
        }
    }
    Ok(())
}

/// CNF formula whose clauses have exactly three literals over distinct
/// variables.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThreeSatInstance {
    num_vars: usize,
    clauses: Vec<[Literal; 3]>,
}

impl ThreeSatInstance {
    pub fn new(num_vars: usize, clauses: Vec<[Literal; 3]>) -> Result<Self> {
        for (i, c) in clauses.iter().enumerate() {
            check_clause(num_vars, i, c)?;
        }
        Ok(ThreeSatInstance { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn satisfied_count(&self, a: &Assignment) -> Result<usize> {
        check_len(self.num_vars, a)?;
        Ok(self
            .clauses
            .iter()
            .filter(|c| c.iter().any(|l| l.eval(&a.bits)))
            .count())
    }
}

/// Formula whose 4-literal clauses are satisfied iff exactly two literals are
/// true. `max_occurrence` is recomputed on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoOutOfFourInstance {
    num_vars: usize,
    clauses: Vec<[Literal; 4]>,
    max_occurrence: usize,
}

impl TwoOutOfFourInstance {
    pub fn new(num_vars: usize, clauses: Vec<[Literal; 4]>) -> Result<Self> {
        for (i, c) in clauses.iter().enumerate() {
            check_clause(num_vars, i, c)?;
        }
        let max_occurrence = occurrence_counts(num_vars, &clauses).into_iter().max().unwrap_or(0);
        Ok(TwoOutOfFourInstance {
            num_vars,
            clauses,
            max_occurrence,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[[Literal; 4]] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn max_occurrence(&self) -> usize {
        self.max_occurrence
    }

    /// Number of clauses each variable occurs in.
    pub fn occurrences(&self) -> Vec<usize> {
        occurrence_counts(self.num_vars, &self.clauses)
    }

    pub fn satisfied_count(&self, a: &Assignment) -> Result<usize> {
        check_len(self.num_vars, a)?;
        Ok(self.clauses.iter().filter(|c| two_of_four(c, &a.bits)).count())
    }
}

#[inline]
pub(crate) fn two_of_four(clause: &[Literal; 4], bits: &[bool]) -> bool {
    clause.iter().filter(|l| l.eval(bits)).count() == 2
}

fn occurrence_counts<const K: usize>(num_vars: usize, clauses: &[[Literal; K]]) -> Vec<usize> {
    let mut occ = vec![0usize; num_vars];
    for c in clauses {
        for l in c {
            occ[l.var] += 1;
        }
    }
    occ
}

fn check_len(num_vars: usize, a: &Assignment) -> Result<()> {
    if a.len() != num_vars {
        return Err(Error::LengthMismatch {
            expected: num_vars,
            found: a.len(),
        });
    }
    Ok(())
}

/// Fraction of clauses with at least one true literal. Empty instances score 1.
pub fn eval_3sat(inst: &ThreeSatInstance, a: &Assignment) -> Result<f64> {
    let sat = inst.satisfied_count(a)?;
    Ok(fraction(sat, inst.num_clauses()))
}

/// Fraction of clauses with exactly two true literals. Empty instances score 1.
pub fn eval_2in4(inst: &TwoOutOfFourInstance, a: &Assignment) -> Result<f64> {
    let sat = inst.satisfied_count(a)?;
    Ok(fraction(sat, inst.num_clauses()))
}

pub(crate) fn fraction(sat: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        sat as f64 / total as f64
    }
}

/// Shared view used by the exhaustive oracle.
pub trait ClauseSystem {
    fn num_vars(&self) -> usize;
    fn literal_clauses(&self) -> Vec<&[Literal]>;
    /// Whether a clause with `true_literals` true literals out of `arity` is
    /// satisfied.
    fn accepts(&self, true_literals: u8) -> bool;
    /// Whether flipping every variable preserves every clause's status.
    fn complement_invariant(&self) -> bool;
}

impl ClauseSystem for ThreeSatInstance {
    fn num_vars(&self) -> usize {
        self.num_vars
    }
    fn literal_clauses(&self) -> Vec<&[Literal]> {
        self.clauses.iter().map(|c| &c[..]).collect()
    }
    fn accepts(&self, true_literals: u8) -> bool {
        true_literals >= 1
    }
    fn complement_invariant(&self) -> bool {
        false
    }
}

impl ClauseSystem for TwoOutOfFourInstance {
    fn num_vars(&self) -> usize {
        self.num_vars
    }
    fn literal_clauses(&self) -> Vec<&[Literal]> {
        self.clauses.iter().map(|c| &c[..]).collect()
    }
    fn accepts(&self, true_literals: u8) -> bool {
        true_literals == 2
    }
    fn complement_invariant(&self) -> bool {
        true
    }
}
