use alloc::vec;
use alloc::vec::Vec;

use super::{fraction, Assignment, ClauseSystem};
use crate::{Error, Result};

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 24;

/// Result of an exhaustive search. `satisfied` is exact; the fraction is
/// derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxSat {
    pub satisfied: usize,
    pub total: usize,
    pub assignment: Assignment,
}

impl MaxSat {
    pub fn fraction(&self) -> f64 {
        fraction(self.satisfied, self.total)
    }

    /// Combine results of disjoint sub-searches: more clauses wins, ties go to
    /// the lexicographically smaller assignment.
    pub fn merge(self, other: MaxSat) -> MaxSat {
        use core::cmp::Ordering::*;
        match self.satisfied.cmp(&other.satisfied) {
            Greater => self,
            Less => other,
            Equal => {
                if other.assignment.bits < self.assignment.bits {
                    other
                } else {
                    self
                }
            }
        }
    }
}

/// Exact maximum over all `2^num_vars` assignments.
///
/// Variables that occur in no clause are pinned to 0 (they cannot change the
/// count, and 0 is lexicographically preferred). For complement-invariant
/// systems only half of the cube is walked.
pub fn brute_force_max_sat<S: ClauseSystem + ?Sized>(inst: &S, cap: usize) -> Result<MaxSat> {
    Ok(brute_force_max_sat_with_prefix(inst, cap, 0, 0)?.expect("empty prefix is never pruned"))
}

/// Search only the assignments whose first `prefix_len` occurring variables
/// (in index order) equal the bits of `prefix`, most significant first.
///
/// Returns `None` for a prefix that complement symmetry makes redundant. The
/// merge of all `2^prefix_len` prefixes equals the full search.
pub fn brute_force_max_sat_with_prefix<S: ClauseSystem + ?Sized>(
    inst: &S,
    cap: usize,
    prefix_len: usize,
    prefix: u64,
) -> Result<Option<MaxSat>> {
    let n = inst.num_vars();
    if n > cap {
        return Err(Error::BruteForceCap { num_vars: n, cap });
    }
    let clauses = inst.literal_clauses();
    let total = clauses.len();

    // Per-variable incidence: (clause, negated).
    let mut incidence: Vec<Vec<(u32, bool)>> = vec![Vec::new(); n];
    for (ci, c) in clauses.iter().enumerate() {
        for l in c.iter() {
            incidence[l.var].push((ci as u32, l.negated));
        }
    }
    let free: Vec<usize> = (0..n).filter(|&v| !incidence[v].is_empty()).collect();
    let k = free.len();
    if prefix_len >= 64 || prefix >> prefix_len != 0 {
        return Err(Error::InvalidParameter("prefix has bits beyond prefix_len".into()));
    }
    // Prefix positions past the last occurring variable name nothing; keep
    // only the all-zero extension so the split still merges to the whole.
    let (prefix_len, prefix) = if prefix_len > k {
        let extra = prefix_len - k;
        if prefix & ((1u64 << extra) - 1) != 0 {
            return Ok(None);
        }
        (k, prefix >> extra)
    } else {
        (prefix_len, prefix)
    };

    let mut fixed = prefix_len;
    let mut fixed_value = prefix;
    if inst.complement_invariant() && k > 0 {
        if prefix_len == 0 {
            fixed = 1;
            fixed_value = 0;
        } else if (prefix >> (prefix_len - 1)) & 1 == 1 {
            return Ok(None);
        }
    }

    let mut bits = vec![false; n];
    for (j, &v) in free.iter().take(fixed).enumerate() {
        bits[v] = (fixed_value >> (fixed - 1 - j)) & 1 == 1;
    }

    let accepts: [bool; 5] = core::array::from_fn(|t| inst.accepts(t as u8));
    let mut counts: Vec<u8> = clauses
        .iter()
        .map(|c| c.iter().filter(|l| l.eval(&bits)).count() as u8)
        .collect();
    let mut sat = counts.iter().filter(|&&t| accepts[t as usize]).count();

    // Walk the remaining `k - fixed` variables in Gray-code order. The last
    // free variable toggles most often; it is the least significant in the
    // lexicographic comparison, so the best key is tracked as an integer.
    let walk: Vec<usize> = free[fixed..].to_vec();
    let w = walk.len();
    let key_of = |bits: &[bool]| -> u128 { walk.iter().fold(0u128, |acc, &v| (acc << 1) | bits[v] as u128) };
    let mut key: u128 = key_of(&bits);
    let mut best_sat = sat;
    let mut best_key = key;

    let steps: u128 = 1u128 << w;
    for step in 1..steps {
        // Gray code: flip the bit at the position of the lowest set bit.
        let j = step.trailing_zeros() as usize;
        let v = walk[w - 1 - j];
        let new_val = !bits[v];
        bits[v] = new_val;
        key ^= 1u128 << j;
        for &(ci, neg) in &incidence[v] {
            let ci = ci as usize;
            let before = accepts[counts[ci] as usize];
            if new_val != neg {
                counts[ci] += 1;
            } else {
                counts[ci] -= 1;
            }
            let after = accepts[counts[ci] as usize];
            if before != after {
                if after {
                    sat += 1;
                } else {
                    sat -= 1;
                }
            }
        }
        if sat > best_sat || (sat == best_sat && key < best_key) {
            best_sat = sat;
            best_key = key;
        }
    }

    for (j, &v) in walk.iter().enumerate() {
        bits[v] = (best_key >> (w - 1 - j)) & 1 == 1;
    }
    Ok(Some(MaxSat {
        satisfied: best_sat,
        total,
        assignment: Assignment::new(bits),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::{eval_2in4, eval_3sat, Literal, ThreeSatInstance, TwoOutOfFourInstance};
    use proptest::prelude::*;

    fn lit(code: i64) -> Literal {
        Literal::from_dimacs(code).unwrap()
    }

    /// Plain enumeration in lexicographic order, used as the oracle.
    fn naive<S: ClauseSystem>(inst: &S, eval: impl Fn(&Assignment) -> usize) -> (usize, Assignment) {
        let n = inst.num_vars();
        let mut best: Option<(usize, Assignment)> = None;
        for idx in 0..(1u64 << n) {
            // bit 0 most significant in the lexicographic sense
            let a = Assignment::new((0..n).map(|i| (idx >> (n - 1 - i)) & 1 == 1).collect());
            let s = eval(&a);
            if best.as_ref().is_none_or(|(b, _)| s > *b) {
                best = Some((s, a));
            }
        }
        best.unwrap()
    }

    #[test]
    fn all_polarities_gives_seven_eighths() {
        let mut clauses = Vec::new();
        for mask in 0..8 {
            clauses.push(core::array::from_fn(|i| Literal {
                var: i,
                negated: (mask >> i) & 1 == 1,
            }));
        }
        let inst = ThreeSatInstance::new(3, clauses).unwrap();
        let r = brute_force_max_sat(&inst, 24).unwrap();
        assert_eq!(r.satisfied, 7);
        assert_eq!(r.fraction(), 7.0 / 8.0);
        for mask in 0..8 {
            let a = Assignment::from_mask(3, mask);
            assert_eq!(eval_3sat(&inst, &a).unwrap(), 7.0 / 8.0);
        }
        assert_eq!(r.assignment, Assignment::zeros(3));
    }

    #[test]
    fn satisfiable_and_empty() {
        let inst = ThreeSatInstance::new(3, vec![[lit(-1), lit(-2), lit(3)]]).unwrap();
        let r = brute_force_max_sat(&inst, 24).unwrap();
        assert_eq!(r.fraction(), 1.0);
        assert_eq!(r.assignment, Assignment::zeros(3));
        let empty = ThreeSatInstance::new(5, vec![]).unwrap();
        let r = brute_force_max_sat(&empty, 24).unwrap();
        assert_eq!((r.fraction(), r.assignment), (1.0, Assignment::zeros(5)));
    }

    #[test]
    fn cap_refuses() {
        let inst = ThreeSatInstance::new(30, vec![]).unwrap();
        assert!(matches!(
            brute_force_max_sat(&inst, 24),
            Err(Error::BruteForceCap { num_vars: 30, cap: 24 })
        ));
    }

    fn arb_3sat() -> impl Strategy<Value = ThreeSatInstance> {
        (3usize..9).prop_flat_map(|n| {
            let clause = proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 3)
                .prop_flat_map(|vars| (Just(vars), proptest::array::uniform3(any::<bool>())))
                .prop_map(|(vars, pol)| {
                    core::array::from_fn(|i| Literal {
                        var: vars[i],
                        negated: pol[i],
                    })
                });
            proptest::collection::vec(clause, 0..20).prop_map(move |cs| ThreeSatInstance::new(n, cs).unwrap())
        })
    }

    fn arb_2in4() -> impl Strategy<Value = TwoOutOfFourInstance> {
        (4usize..10).prop_flat_map(|n| {
            let clause = proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 4)
                .prop_shuffle()
                .prop_flat_map(|vars| (Just(vars), proptest::array::uniform4(any::<bool>())))
                .prop_map(|(vars, pol)| {
                    core::array::from_fn(|i| Literal {
                        var: vars[i],
                        negated: pol[i],
                    })
                });
            proptest::collection::vec(clause, 0..16).prop_map(move |cs| TwoOutOfFourInstance::new(n, cs).unwrap())
        })
    }

    proptest! {
        #[test]
        fn matches_naive_3sat(inst in arb_3sat()) {
            let r = brute_force_max_sat(&inst, 24).unwrap();
            let (s, a) = naive(&inst, |a| inst.satisfied_count(a).unwrap());
            prop_assert_eq!(r.satisfied, s);
            prop_assert_eq!(r.assignment, a);
        }

        #[test]
        fn matches_naive_2in4(inst in arb_2in4()) {
            let r = brute_force_max_sat(&inst, 24).unwrap();
            let (s, a) = naive(&inst, |a| inst.satisfied_count(a).unwrap());
            prop_assert_eq!(r.satisfied, s);
            prop_assert_eq!(&r.assignment, &a);
            prop_assert_eq!(eval_2in4(&inst, &r.assignment).unwrap(), r.fraction());
        }

        #[test]
        fn prefix_split_merges_to_full(inst in arb_2in4(), plen in 0usize..4) {
            let full = brute_force_max_sat(&inst, 24).unwrap();
            let merged = (0..1u64 << plen)
                .filter_map(|p| brute_force_max_sat_with_prefix(&inst, 24, plen, p).unwrap())
                .reduce(MaxSat::merge)
                .unwrap();
            prop_assert_eq!(full, merged);
        }

        #[test]
        fn oracle_dominates_samples(inst in arb_3sat(), mask in any::<u64>()) {
            let r = brute_force_max_sat(&inst, 24).unwrap();
            let a = Assignment::from_mask(inst.num_vars(), mask);
            prop_assert!(r.fraction() >= eval_3sat(&inst, &a).unwrap());
        }
    }
}
