//! 3SAT to balanced 2-out-of-4-SAT.
//!
//! A pure 2-in-4 gadget cannot separate satisfied from falsified 3-clauses:
//! flipping every variable maps exactly-two to exactly-two, so a gadget that
//! admits the all-false clause assignment's complement admits it too. The
//! reduction therefore shares one *ground* variable `z` across all clause
//! gadgets. Gadgets are checked with `z = 0`; any target assignment with
//! `z = 1` can be complemented without changing any clause, so
//! equisatisfiability is unaffected.
//!
//! Clause gadget for `l0 ∨ l1 ∨ l2` with fresh `y, a, b`:
//!
//! ```text
//! (l0, y, a, z)     with z = 0: exactly two of l0, y, a  => l0 ∨ y
//! (¬y, l1, l2, b)   exactly two of ¬y, l1, l2, b         => ¬y ∨ l1 ∨ l2,
//!                                                            and not all of them
//! ```
//!
//! Equality gadget for `x = w` with fresh `a, b`: `(x, ¬w, a, b)` and
//! `(x, ¬w, ¬a, ¬b)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::sat::{brute_force_max_sat, eval_2in4, Assignment, Literal, ThreeSatInstance, TwoOutOfFourInstance};
use crate::{Error, Result};

pub const DEFAULT_MAX_OCCURRENCE: usize = 16;
/// Smallest bound `balance` accepts: a chained copy spends 4 occurrences on
/// its two equality gadgets and needs room for real occurrences.
pub const MIN_MAX_OCCURRENCE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    /// Literal `k` of the source clause.
    Lit(usize),
    Ground,
    Aux(usize),
}

type Template = [(Slot, bool); 4];

const CLAUSE_AUX: usize = 3;
const CLAUSE_TEMPLATE: [Template; 2] = [
    [
        (Slot::Lit(0), false),
        (Slot::Aux(0), false),
        (Slot::Aux(1), false),
        (Slot::Ground, false),
    ],
    [
        (Slot::Aux(0), true),
        (Slot::Lit(1), false),
        (Slot::Lit(2), false),
        (Slot::Aux(2), false),
    ],
];

// For equality, Lit(0) is x and Lit(1) is w.
const EQUALITY_AUX: usize = 2;
const EQUALITY_TEMPLATE: [Template; 2] = [
    [
        (Slot::Lit(0), false),
        (Slot::Lit(1), true),
        (Slot::Aux(0), false),
        (Slot::Aux(1), false),
    ],
    [
        (Slot::Lit(0), false),
        (Slot::Lit(1), true),
        (Slot::Aux(0), true),
        (Slot::Aux(1), true),
    ],
];

/// Hands out fresh target variables; the ground variable is allocated on
/// first request and shared afterwards.
#[derive(Debug, Clone)]
pub struct VarAllocator {
    next: usize,
    ground: Option<usize>,
}

impl VarAllocator {
    pub fn new(first_free: usize) -> Self {
        VarAllocator {
            next: first_free,
            ground: None,
        }
    }

    pub fn fresh(&mut self) -> usize {
        self.next += 1;
        self.next - 1
    }

    pub fn ground(&mut self) -> usize {
        match self.ground {
            Some(g) => g,
            None => {
                let g = self.fresh();
                self.ground = Some(g);
                g
            }
        }
    }

    pub fn ground_var(&self) -> Option<usize> {
        self.ground
    }

    /// Number of variables handed out so far, counting from 0.
    pub fn watermark(&self) -> usize {
        self.next
    }
}

fn instantiate(templates: &[Template], lits: &[Literal], ground: Option<usize>, aux: &[usize]) -> Vec<[Literal; 4]> {
    templates
        .iter()
        .map(|t| {
            t.map(|(slot, neg)| {
                let base = match slot {
                    Slot::Lit(k) => lits[k],
                    Slot::Ground => Literal::pos(ground.expect("ground allocated for clause gadgets")),
                    Slot::Aux(k) => Literal::pos(aux[k]),
                };
                if neg {
                    base.negate()
                } else {
                    base
                }
            })
        })
        .collect()
}

/// Exhaustive check of a concrete gadget: `premise(bits)` decides whether the
/// source constraint holds on the variables in `inputs`; `fixed` pins
/// variables (the ground); `aux` are quantified.
fn check_gadget(
    clauses: &[[Literal; 4]],
    inputs: &[usize],
    fixed: &[(usize, bool)],
    aux: &[usize],
    premise: impl Fn(&[bool]) -> bool,
    what: &str,
) -> Result<()> {
    let mut vars: Vec<usize> = clauses.iter().flat_map(|c| c.iter().map(|l| l.var)).collect();
    vars.sort_unstable();
    vars.dedup();
    let width = vars.iter().max().map_or(0, |m| m + 1);
    let mut bits = vec![false; width];
    for &(v, b) in fixed {
        bits[v] = b;
    }
    for in_mask in 0..1u32 << inputs.len() {
        let input_vals: Vec<bool> = (0..inputs.len()).map(|k| (in_mask >> k) & 1 == 1).collect();
        for (&v, &b) in inputs.iter().zip(&input_vals) {
            bits[v] = b;
        }
        let mut any_full = false;
        for aux_mask in 0..1u32 << aux.len() {
            for (k, &v) in aux.iter().enumerate() {
                bits[v] = (aux_mask >> k) & 1 == 1;
            }
            if clauses.iter().all(|c| c.iter().filter(|l| l.eval(&bits)).count() == 2) {
                any_full = true;
                break;
            }
        }
        if any_full != premise(&input_vals) {
            return Err(Error::GadgetSelfCheck(format!(
                "{what}: input {input_vals:?} {} but some aux assignment {}",
                if premise(&input_vals) {
                    "satisfies the source"
                } else {
                    "violates the source"
                },
                if any_full {
                    "satisfies every gadget clause"
                } else {
                    "cannot satisfy the gadget"
                },
            )));
        }
    }
    Ok(())
}

/// Expand one 3-clause. The emitted clauses are exhaustively checked against
/// the clause before returning.
pub fn gadget_3clause_to_2in4(
    clause: &[Literal; 3],
    alloc: &mut VarAllocator,
) -> Result<(Vec<[Literal; 4]>, Vec<usize>)> {
    if clause[0].var == clause[1].var || clause[0].var == clause[2].var || clause[1].var == clause[2].var {
        return Err(Error::InvalidInstance("clause repeats a variable".into()));
    }
    let ground = alloc.ground();
    let aux: Vec<usize> = (0..CLAUSE_AUX).map(|_| alloc.fresh()).collect();
    let clauses = instantiate(&CLAUSE_TEMPLATE, clause, Some(ground), &aux);
    let inputs: Vec<usize> = clause.iter().map(|l| l.var).collect();
    let negs: Vec<bool> = clause.iter().map(|l| l.negated).collect();
    check_gadget(
        &clauses,
        &inputs,
        &[(ground, false)],
        &aux,
        |vals| vals.iter().zip(&negs).any(|(v, n)| v != n),
        "clause gadget",
    )?;
    Ok((clauses, aux))
}

/// Clauses forcing `x = w`, exhaustively checked.
pub fn equality_gadget(x: usize, w: usize, alloc: &mut VarAllocator) -> Result<(Vec<[Literal; 4]>, Vec<usize>)> {
    if x == w {
        return Err(Error::InvalidParameter("equality gadget needs two variables".into()));
    }
    let aux: Vec<usize> = (0..EQUALITY_AUX).map(|_| alloc.fresh()).collect();
    let clauses = instantiate(&EQUALITY_TEMPLATE, &[Literal::pos(x), Literal::pos(w)], None, &aux);
    check_gadget(&clauses, &[x, w], &[], &aux, |v| v[0] == v[1], "equality gadget")?;
    Ok((clauses, aux))
}

/// Sizes of the two gadget schemas: (clauses, aux variables).
pub fn gadget_sizes() -> [(usize, usize); 2] {
    [
        (CLAUSE_TEMPLATE.len(), CLAUSE_AUX),
        (EQUALITY_TEMPLATE.len(), EQUALITY_AUX),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum VarRole {
    /// Copy of a source variable.
    Source(usize),
    /// Copy of the shared ground variable.
    Ground,
    Aux,
    /// Unconstrained filler used to reach an even (or requested) dimension.
    Padding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GadgetKind {
    Clause { source_clause: usize },
    Equality { left: usize, right: usize },
}

/// Target clauses and aux variables contributed by one gadget.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GadgetRecord {
    pub kind: GadgetKind,
    pub clauses: Vec<usize>,
    pub aux: Vec<usize>,
}

/// Output of [`balance`]: the balanced instance, where each input variable
/// went, and the equality gadgets added.
#[derive(Debug, Clone)]
pub struct Balanced {
    pub instance: TwoOutOfFourInstance,
    pub copies: Vec<Vec<usize>>,
    pub equalities: Vec<GadgetRecord>,
}

/// Split every variable occurring more than `c` times into a cycle of copies
/// tied by equality gadgets. Variable `v` keeps index `v` for its first copy;
/// new copies and aux variables are appended. Equality clauses follow the
/// original clauses.
pub fn balance(inst: &TwoOutOfFourInstance, c: usize) -> Result<Balanced> {
    if c < MIN_MAX_OCCURRENCE {
        return Err(Error::InvalidParameter(format!(
            "max occurrence bound {c} is below {MIN_MAX_OCCURRENCE}"
        )));
    }
    let n = inst.num_vars();
    let identity = || (0..n).map(|v| vec![v]).collect::<Vec<_>>();
    if inst.max_occurrence() <= c {
        return Ok(Balanced {
            instance: inst.clone(),
            copies: identity(),
            equalities: Vec::new(),
        });
    }

    let occ = inst.occurrences();
    let capacity = c - 2 * EQUALITY_TEMPLATE.len();
    let mut alloc = VarAllocator::new(n);
    let mut copies = identity();
    for v in 0..n {
        if occ[v] > c {
            let t = occ[v].div_ceil(capacity);
            for _ in 1..t {
                let fresh = alloc.fresh();
                copies[v].push(fresh);
            }
        }
    }

    let mut seen = vec![0usize; n];
    let mut clauses: Vec<[Literal; 4]> = inst
        .clauses()
        .iter()
        .map(|cl| {
            cl.map(|l| {
                let k = seen[l.var];
                seen[l.var] += 1;
                let cs = &copies[l.var];
                let var = if cs.len() == 1 { cs[0] } else { cs[k / capacity] };
                Literal {
                    var,
                    negated: l.negated,
                }
            })
        })
        .collect();

    let mut equalities = Vec::new();
    for cs in &copies {
        let t = cs.len();
        if t < 2 {
            continue;
        }
        for k in 0..t {
            let (x, w) = (cs[k], cs[(k + 1) % t]);
            let (eq, aux) = equality_gadget(x, w, &mut alloc)?;
            let start = clauses.len();
            clauses.extend(eq);
            equalities.push(GadgetRecord {
                kind: GadgetKind::Equality { left: x, right: w },
                clauses: (start..clauses.len()).collect(),
                aux,
            });
        }
    }

    let instance = TwoOutOfFourInstance::new(alloc.watermark(), clauses)?;
    if instance.max_occurrence() > c {
        return Err(Error::InvalidInstance(format!(
            "balancing left max occurrence {} > {c}",
            instance.max_occurrence()
        )));
    }
    Ok(Balanced {
        instance,
        copies,
        equalities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReductionOptions {
    /// Bound on occurrences per target variable.
    pub max_occurrence: usize,
    /// Pad the target to exactly this many variables (must be even and at
    /// least the unpadded size). Without it the target is padded to even.
    pub pad_to: Option<usize>,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        ReductionOptions {
            max_occurrence: DEFAULT_MAX_OCCURRENCE,
            pad_to: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReductionCertificate {
    pub source: ThreeSatInstance,
    pub target: TwoOutOfFourInstance,
    pub max_occurrence: usize,
    pub roles: Vec<VarRole>,
    /// Target copies of each source variable.
    pub var_map: Vec<Vec<usize>>,
    pub ground: Vec<usize>,
    pub aux_vars: Vec<usize>,
    pub padding: Vec<usize>,
    pub gadgets: Vec<GadgetRecord>,
}

/// Gadget expansion, balancing and padding, with the bookkeeping needed to
/// lift source assignments.
pub fn reduce_full(inst: &ThreeSatInstance, opts: &ReductionOptions) -> Result<ReductionCertificate> {
    let n = inst.num_vars();
    let mut alloc = VarAllocator::new(n);
    let mut clauses = Vec::new();
    let mut gadgets = Vec::new();
    for (ci, cl) in inst.clauses().iter().enumerate() {
        let (g, aux) = gadget_3clause_to_2in4(cl, &mut alloc)?;
        let start = clauses.len();
        clauses.extend(g);
        gadgets.push(GadgetRecord {
            kind: GadgetKind::Clause { source_clause: ci },
            clauses: (start..clauses.len()).collect(),
            aux,
        });
    }
    let ground = alloc.ground_var();
    let unbalanced = TwoOutOfFourInstance::new(alloc.watermark(), clauses)?;
    let balanced = balance(&unbalanced, opts.max_occurrence)?;
    gadgets.extend(balanced.equalities.iter().cloned());

    let inner = balanced.instance.num_vars();
    let total = match opts.pad_to {
        Some(p) if p % 2 != 0 => return Err(Error::OddDimension(p)),
        Some(p) if p < inner => {
            return Err(Error::InvalidParameter(format!(
                "pad_to = {p} is below the reduced size {inner}"
            )))
        }
        Some(p) => p,
        None => inner + inner % 2,
    };
    let target = TwoOutOfFourInstance::new(total, balanced.instance.clauses().to_vec())?;

    let mut roles = vec![VarRole::Aux; total];
    let var_map: Vec<Vec<usize>> = balanced.copies[..n].to_vec();
    for (v, cs) in var_map.iter().enumerate() {
        for &t in cs {
            roles[t] = VarRole::Source(v);
        }
    }
    let ground_copies = ground.map(|g| balanced.copies[g].clone()).unwrap_or_default();
    for &t in &ground_copies {
        roles[t] = VarRole::Ground;
    }
    let padding: Vec<usize> = (inner..total).collect();
    for &t in &padding {
        roles[t] = VarRole::Padding;
    }
    let aux_vars: Vec<usize> = (0..total).filter(|&t| roles[t] == VarRole::Aux).collect();

    let cert = ReductionCertificate {
        source: inst.clone(),
        target,
        max_occurrence: opts.max_occurrence,
        roles,
        var_map,
        ground: ground_copies,
        aux_vars,
        padding,
        gadgets,
    };
    cert.validate()?;
    Ok(cert)
}

impl ReductionCertificate {
    /// Structural invariants: roles partition the target, every aux variable
    /// belongs to exactly one gadget, the occurrence bound holds.
    pub fn validate(&self) -> Result<()> {
        let n = self.target.num_vars();
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if self.roles.len() != n {
            return bad(format!("{} roles for {n} target variables", self.roles.len()));
        }
        if self.var_map.len() != self.source.num_vars() {
            return bad("var_map does not cover the source".into());
        }
        let mut owner = vec![0u8; n];
        for (v, cs) in self.var_map.iter().enumerate() {
            for &t in cs {
                if t >= n || self.roles[t] != VarRole::Source(v) {
                    return bad(format!("copy {t} of source variable {v} has the wrong role"));
                }
                owner[t] += 1;
            }
        }
        for &t in self.ground.iter().chain(&self.aux_vars).chain(&self.padding) {
            if t >= n {
                return bad(format!("variable {t} out of range"));
            }
            owner[t] += 1;
        }
        if let Some(t) = owner.iter().position(|&k| k != 1) {
            return bad(format!("target variable {t} is claimed {} times", owner[t]));
        }
        let mut aux_owner = vec![0u8; n];
        for g in &self.gadgets {
            for &a in &g.aux {
                if self.roles.get(a) != Some(&VarRole::Aux) {
                    return bad(format!("gadget aux {a} is not an aux variable"));
                }
                aux_owner[a] += 1;
            }
        }
        if let Some(&a) = self.aux_vars.iter().find(|&&a| aux_owner[a] != 1) {
            return bad(format!("aux variable {a} is not owned by exactly one gadget"));
        }
        if self.target.max_occurrence() > self.max_occurrence {
            return bad(format!(
                "target max occurrence {} exceeds {}",
                self.target.max_occurrence(),
                self.max_occurrence
            ));
        }
        Ok(())
    }

    /// Map a source assignment to the target: copies inherit the source value,
    /// ground and padding are 0, and each gadget's aux variables take the
    /// lexicographically first assignment maximizing that gadget's satisfied
    /// clauses.
    pub fn lift(&self, a: &Assignment) -> Result<Assignment> {
        if a.len() != self.source.num_vars() {
            return Err(Error::LengthMismatch {
                expected: self.source.num_vars(),
                found: a.len(),
            });
        }
        let mut bits = vec![false; self.target.num_vars()];
        for (v, cs) in self.var_map.iter().enumerate() {
            for &t in cs {
                bits[t] = a.bits[v];
            }
        }
        let clauses = self.target.clauses();
        for g in &self.gadgets {
            let k = g.aux.len();
            let mut best = (0usize, 0u32);
            for mask in 0..1u32 << k {
                for (j, &v) in g.aux.iter().enumerate() {
                    bits[v] = (mask >> (k - 1 - j)) & 1 == 1;
                }
                let sat = g
                    .clauses
                    .iter()
                    .filter(|&&ci| clauses[ci].iter().filter(|l| l.eval(&bits)).count() == 2)
                    .count();
                if mask == 0 || sat > best.0 {
                    best = (sat, mask);
                }
            }
            for (j, &v) in g.aux.iter().enumerate() {
                bits[v] = (best.1 >> (k - 1 - j)) & 1 == 1;
            }
        }
        Ok(Assignment::new(bits))
    }

    /// Clause and variable counts of the target.
    pub fn size(&self) -> (usize, usize) {
        (self.target.num_vars(), self.target.num_clauses())
    }
}

/// `1 - max fraction` of the target, by exhaustive search. A satisfiable
/// source short-circuits to 0 after checking that its lift is satisfying.
pub fn measure_gap(cert: &ReductionCertificate, cap: usize) -> Result<f64> {
    let src = brute_force_max_sat(&cert.source, cap)?;
    if src.satisfied == src.total {
        let lifted = cert.lift(&src.assignment)?;
        let v = eval_2in4(&cert.target, &lifted)?;
        if v != 1.0 {
            return Err(Error::GadgetSelfCheck(format!(
                "lift of a satisfying assignment scores {v}"
            )));
        }
        return Ok(0.0);
    }
    let tgt = brute_force_max_sat(&cert.target, cap)?;
    Ok(1.0 - tgt.fraction())
}
