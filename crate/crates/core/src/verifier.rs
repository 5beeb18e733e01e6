//! Arthur's tests and the composed protocol.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::analysis::random_matching;
use crate::merlin::WitnessBundle;
use crate::sat::{Assignment, Literal, TwoOutOfFourInstance};
use crate::state::{swap_test_prob, Matching, MatchingSampler, Sign, StateVector};
use crate::{Error, Result};

/// Default `beta` in `K = ceil(beta sqrt N)`.
pub const DEFAULT_BETA: f64 = 2.0;

pub fn default_k(n: usize, beta: f64) -> usize {
    ((beta * (n as f64).sqrt()).ceil() as usize).max(1)
}

/// Clauses grouped so that no two clauses in a block share a variable.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockPartition {
    blocks: Vec<Vec<usize>>,
}

impl BlockPartition {
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Recount: every clause exactly once, blocks variable-disjoint.
    pub fn validate(&self, inst: &TwoOutOfFourInstance) -> Result<()> {
        let mut seen = vec![false; inst.num_clauses()];
        let mut owner = vec![usize::MAX; inst.num_vars()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &ci in block {
                if ci >= seen.len() || core::mem::replace(&mut seen[ci], true) {
                    return Err(Error::InvalidParameter(format!("clause {ci} misplaced in partition")));
                }
                for l in &inst.clauses()[ci] {
                    if owner[l.var] == b {
                        return Err(Error::InvalidParameter(format!(
                            "block {b} has two clauses on variable {}",
                            l.var
                        )));
                    }
                    owner[l.var] = b;
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidParameter("partition misses a clause".into()));
        }
        Ok(())
    }
}

/// Greedy coloring of the clause conflict graph in clause order.
pub fn partition_blocks(inst: &TwoOutOfFourInstance) -> BlockPartition {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    // Blocks already touching each variable.
    let mut used: Vec<Vec<usize>> = vec![Vec::new(); inst.num_vars()];
    for (ci, c) in inst.clauses().iter().enumerate() {
        let b = (0..)
            .find(|b| c.iter().all(|l| !used[l.var].contains(b)))
            .expect("some block is free");
        if b == blocks.len() {
            blocks.push(Vec::new());
        }
        blocks[b].push(ci);
        for l in c {
            used[l.var].push(b);
        }
    }
    BlockPartition { blocks }
}

/// Sign patterns (+1/-1 per coordinate, before the 1/2 factor) spanning the
/// satisfying subspace of an all-positive clause: exactly two literals true,
/// representatives with the first literal false.
const SAT_PATTERNS: [[i8; 4]; 3] = [[1, -1, -1, 1], [1, -1, 1, -1], [1, 1, -1, -1]];

fn polarity_signs(clause: &[Literal; 4]) -> [i8; 4] {
    clause.map(|l| if l.negated { -1 } else { 1 })
}

/// `(mass, projected mass)` of a 4-amplitude block onto the satisfying
/// subspace of a clause with the given polarities.
pub fn clause_masses(block: &[Complex64; 4], clause: &[Literal; 4]) -> (f64, f64) {
    let pol = polarity_signs(clause);
    let mass: f64 = block.iter().map(|a| a.norm_sqr()).sum();
    let proj: f64 = SAT_PATTERNS
        .iter()
        .map(|p| {
            let ip: Complex64 = (0..4).map(|k| block[k] * (0.5 * (p[k] * pol[k]) as f64)).sum();
            ip.norm_sqr()
        })
        .sum();
    (mass, proj.min(mass))
}

/// Rejection probability given that the measurement landed in the clause's
/// 4-dimensional block. Zero-mass blocks never land, and score 0.
pub fn clause_conditional_rejection(block: &[Complex64; 4], clause: &[Literal; 4]) -> f64 {
    let (mass, proj) = clause_masses(block, clause);
    if mass == 0.0 {
        0.0
    } else {
        (mass - proj) / mass
    }
}

fn clause_block(s: &StateVector, clause: &[Literal; 4]) -> [Complex64; 4] {
    clause.map(|l| s.amps()[l.var])
}

fn check_dims(s: &StateVector, inst: &TwoOutOfFourInstance) -> Result<()> {
    if s.dim() != inst.num_vars() {
        return Err(Error::DimensionMismatch {
            left: s.dim(),
            right: inst.num_vars(),
        });
    }
    Ok(())
}

/// Exact acceptance of the Satisfiability Test: a uniformly random block,
/// then the clause-projector measurement (outcomes outside every clause of
/// the block accept).
pub fn satisfiability_test_exact(s: &StateVector, inst: &TwoOutOfFourInstance, part: &BlockPartition) -> Result<f64> {
    check_dims(s, inst)?;
    if part.is_empty() {
        return Ok(1.0);
    }
    let rejected: f64 = inst
        .clauses()
        .iter()
        .map(|c| {
            let (mass, proj) = clause_masses(&clause_block(s, c), c);
            mass - proj
        })
        .sum();
    Ok((1.0 - rejected / part.len() as f64).clamp(0.0, 1.0))
}

/// Same quantity for a proper state, in integers: returns `(num, den)` with
/// acceptance `num / den`.
pub fn satisfiability_test_exact_proper(
    a: &Assignment,
    inst: &TwoOutOfFourInstance,
    part: &BlockPartition,
) -> Result<(u128, u128)> {
    if a.len() != inst.num_vars() {
        return Err(Error::LengthMismatch {
            expected: inst.num_vars(),
            found: a.len(),
        });
    }
    if part.is_empty() {
        return Ok((1, 1));
    }
    // With amplitudes ±1/sqrt N a clause block is s/sqrt N for s in {±1}^4.
    // mass = 4/N and each projection is (p·s)^2/(4N), so
    // N * (mass - proj) = (16 - sum_p (p·s)^2) / 4, an integer.
    let mut rej_quarters: u128 = 0;
    for c in inst.clauses() {
        let pol = polarity_signs(c);
        let s: [i64; 4] = core::array::from_fn(|k| if a.bits[c[k].var] { -1 } else { 1 });
        let proj: i64 = SAT_PATTERNS
            .iter()
            .map(|p| {
                let ip: i64 = (0..4).map(|k| (p[k] * pol[k]) as i64 * s[k]).sum();
                ip * ip
            })
            .sum();
        rej_quarters += (16 - proj) as u128;
    }
    let den = 4 * part.len() as u128 * inst.num_vars() as u128;
    Ok((den - rej_quarters, den))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    pub fn from_accept(accept: bool) -> Self {
        if accept {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }

    pub fn accepted(self) -> bool {
        self == Verdict::Accept
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Branch {
    Satisfiability,
    Symmetry,
    Uniformity,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::Satisfiability, Branch::Symmetry, Branch::Uniformity];

    pub fn name(self) -> &'static str {
        match self {
            Branch::Satisfiability => "satisfiability",
            Branch::Symmetry => "symmetry",
            Branch::Uniformity => "uniformity",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Detail {
    Satisfiability {
        block: usize,
        /// Clause whose subspace the outcome landed in, if any.
        clause: Option<usize>,
    },
    Symmetry {
        partner: usize,
        overlap: f64,
    },
    Uniformity {
        /// Edges hit by two or more witnesses.
        collisions: Vec<(usize, usize)>,
        /// Edges hit with both signs.
        disagreements: Vec<(usize, usize)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestReport {
    pub verdict: Verdict,
    pub detail: Detail,
}

impl TestReport {
    pub fn branch(&self) -> Branch {
        match self.detail {
            Detail::Satisfiability { .. } => Branch::Satisfiability,
            Detail::Symmetry { .. } => Branch::Symmetry,
            Detail::Uniformity { .. } => Branch::Uniformity,
        }
    }

    pub fn accepted(&self) -> bool {
        self.verdict.accepted()
    }
}

/// One sampled run of the Satisfiability Test.
pub fn satisfiability_test<R: Rng + ?Sized>(
    s: &StateVector,
    inst: &TwoOutOfFourInstance,
    part: &BlockPartition,
    rng: &mut R,
) -> Result<TestReport> {
    check_dims(s, inst)?;
    if part.is_empty() {
        return Ok(TestReport {
            verdict: Verdict::Accept,
            detail: Detail::Satisfiability { block: 0, clause: None },
        });
    }
    let block = rng.random_range(0..part.len());
    let mut u: f64 = rng.random();
    for &ci in &part.blocks[block] {
        let c = &inst.clauses()[ci];
        let (mass, proj) = clause_masses(&clause_block(s, c), c);
        if u < mass {
            // Landed in this clause's block; project onto its satisfying span.
            let accept = rng.random::<f64>() * mass < proj;
            return Ok(TestReport {
                verdict: Verdict::from_accept(accept),
                detail: Detail::Satisfiability {
                    block,
                    clause: Some(ci),
                },
            });
        }
        u -= mass;
    }
    Ok(TestReport {
        verdict: Verdict::Accept,
        detail: Detail::Satisfiability { block, clause: None },
    })
}

/// Swap test between the first witness and a uniformly chosen other one.
pub fn symmetry_test<R: Rng + ?Sized>(b: &WitnessBundle, rng: &mut R) -> Result<TestReport> {
    if b.len() < 2 {
        return Err(Error::InvalidParameter("symmetry test needs K >= 2".into()));
    }
    let partner = rng.random_range(1..b.len());
    let p = swap_test_prob(b.get(0), b.get(partner))?;
    let accept = p >= 1.0 || rng.random::<f64>() < p;
    Ok(TestReport {
        verdict: Verdict::from_accept(accept),
        detail: Detail::Symmetry {
            partner,
            overlap: 2.0 * p - 1.0,
        },
    })
}

/// Uniformity Test with a fresh uniformly random matching.
pub fn uniformity_test<R: Rng + ?Sized>(b: &WitnessBundle, rng: &mut R) -> Result<TestReport> {
    let m = random_matching(b.dim(), rng)?;
    uniformity_test_at(b, &m, rng)
}

/// Uniformity Test at a fixed matching: measure every witness, reject iff
/// some edge shows both signs.
pub fn uniformity_test_at<R: Rng + ?Sized>(b: &WitnessBundle, m: &Matching, rng: &mut R) -> Result<TestReport> {
    if b.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            left: b.dim(),
            right: m.dim(),
        });
    }
    // bit 0: seen once, bit 1: seen with +, bit 2: seen with -, bit 3: collided
    let mut marks = vec![0u8; m.edges().len()];
    let mut sampler: Option<(usize, MatchingSampler)> = None;
    for k in 0..b.len() {
        let reuse = matches!(&sampler, Some((j, _)) if b.get(*j) == b.get(k));
        if !reuse {
            sampler = Some((k, MatchingSampler::new(b.get(k), m)?));
        }
        let o = sampler.as_ref().expect("set above").1.sample(rng);
        let mark = &mut marks[o.edge];
        if *mark & 1 == 1 {
            *mark |= 8;
        }
        *mark |= 1 | if o.sign == Sign::Plus { 2 } else { 4 };
    }
    let edges = m.edges();
    let collisions: Vec<_> = (0..marks.len())
        .filter(|&e| marks[e] & 8 != 0)
        .map(|e| edges[e])
        .collect();
    let disagreements: Vec<_> = (0..marks.len())
        .filter(|&e| marks[e] & 6 == 6)
        .map(|e| edges[e])
        .collect();
    Ok(TestReport {
        verdict: Verdict::from_accept(disagreements.is_empty()),
        detail: Detail::Uniformity {
            collisions,
            disagreements,
        },
    })
}

/// One protocol run: each of the three tests with probability 1/3; the
/// Satisfiability Test uses the first witness.
pub fn run_protocol<R: Rng + ?Sized>(
    b: &WitnessBundle,
    inst: &TwoOutOfFourInstance,
    part: &BlockPartition,
    rng: &mut R,
) -> Result<TestReport> {
    if b.dim() != inst.num_vars() {
        return Err(Error::DimensionMismatch {
            left: b.dim(),
            right: inst.num_vars(),
        });
    }
    match rng.random_range(0..3) {
        0 => satisfiability_test(b.get(0), inst, part, rng),
        1 => symmetry_test(b, rng),
        _ => uniformity_test(b, rng),
    }
}

pub const TINY_MAX_DIM: usize = 16;
pub const TINY_MAX_K: usize = 4;

/// Exact disagreement probability at a fixed matching by enumerating every
/// outcome tuple of the product distribution.
pub fn uniformity_exact_tiny(b: &WitnessBundle, m: &Matching) -> Result<f64> {
    if b.dim() > TINY_MAX_DIM || b.len() > TINY_MAX_K {
        return Err(Error::Precondition(format!(
            "exact uniformity oracle limited to N <= {TINY_MAX_DIM}, K <= {TINY_MAX_K} (got N = {}, K = {})",
            b.dim(),
            b.len()
        )));
    }
    if b.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            left: b.dim(),
            right: m.dim(),
        });
    }
    let dists: Vec<Vec<[f64; 2]>> = b
        .witnesses()
        .iter()
        .map(|w| crate::state::edge_probabilities(w, m))
        .collect::<Result<_>>()?;
    let mut signs = vec![0u8; m.edges().len()];
    Ok(disagreement_recursive(&dists, 0, &mut signs))
}

fn disagreement_recursive(dists: &[Vec<[f64; 2]>], k: usize, signs: &mut [u8]) -> f64 {
    if k == dists.len() {
        return 0.0;
    }
    let mut total = 0.0;
    for (e, p) in dists[k].iter().enumerate() {
        for (bit, &pr) in [1u8, 2].iter().zip(p) {
            if pr == 0.0 {
                continue;
            }
            let before = signs[e];
            let after = before | bit;
            if after == 3 {
                total += pr;
            } else {
                signs[e] = after;
                total += pr * disagreement_recursive(dists, k + 1, signs);
                signs[e] = before;
            }
        }
    }
    total
}
