use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::state::{proper_distance, Matching, StateVector};
use crate::stats::{wilson_interval, Z95};
use crate::{Error, Result};

/// Calibrated constants (mirrored in the CLI defaults): edges that are `C eps^8`-unbalanced should carry at
/// least `D eps^4` of the mass for at least a third of matchings.
pub const DEFAULT_C: f64 = 2.0;
pub const DEFAULT_D: f64 = 0.5;

/// Uniform perfect matching: pair up consecutive entries of a uniformly
/// shuffled `[N]`.
pub fn random_matching<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Matching> {
    if n % 2 != 0 {
        return Err(Error::OddDimension(n));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    Matching::from_permutation(&perm)
}

/// `p_ij = 2 P+ P- / (P+ + P-)^2`, defined as 0 on zero-mass edges.
pub fn disagreement_prob(s: &StateVector, (i, j): (usize, usize)) -> f64 {
    let (a, b) = (s.amps()[i], s.amps()[j]);
    let pair = a.norm_sqr() + b.norm_sqr();
    if pair == 0.0 {
        return 0.0;
    }
    let pp = (a + b).norm_sqr() / 2.0;
    let pm = (a - b).norm_sqr() / 2.0;
    (2.0 * pp * pm / (pair * pair)).clamp(0.0, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeStats {
    pub edge: (usize, usize),
    pub pair_mass: f64,
    pub disagreement_prob: f64,
    /// Largest threshold `c` at which the edge counts as `c`-unbalanced,
    /// i.e. `|a_i^2 - a_j^2|^2 / (2 (|a_i|^2 + |a_j|^2)^2)`, which equals
    /// the disagreement probability.
    pub unbalanced_at: f64,
}

pub fn edge_stats(s: &StateVector, m: &Matching) -> Result<Vec<EdgeStats>> {
    if s.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            left: s.dim(),
            right: m.dim(),
        });
    }
    Ok(m.edges()
        .iter()
        .map(|&(i, j)| {
            let (a, b) = (s.amps()[i], s.amps()[j]);
            let pair = a.norm_sqr() + b.norm_sqr();
            let unbalanced_at = if pair == 0.0 {
                0.0
            } else {
                (a * a - b * b).norm_sqr() / (2.0 * pair * pair)
            };
            EdgeStats {
                edge: (i, j),
                pair_mass: pair,
                disagreement_prob: disagreement_prob(s, (i, j)),
                unbalanced_at,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnbalancedSet {
    pub edges: Vec<(usize, usize)>,
    /// Total pair mass of the set.
    pub largeness: f64,
}

/// Edges with `|a_i^2 - a_j^2|^2 >= 2 t (|a_i|^2 + |a_j|^2)^2` and nonzero
/// pair mass.
pub fn unbalanced_set(s: &StateVector, m: &Matching, threshold: f64) -> Result<UnbalancedSet> {
    if s.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            left: s.dim(),
            right: m.dim(),
        });
    }
    let mut edges = Vec::new();
    let mut largeness = 0.0;
    for &(i, j) in m.edges() {
        let (a, b) = (s.amps()[i], s.amps()[j]);
        let pair = a.norm_sqr() + b.norm_sqr();
        if pair > 0.0 && (a * a - b * b).norm_sqr() >= 2.0 * threshold * pair * pair {
            edges.push((i, j));
            largeness += pair;
        }
    }
    Ok(UnbalancedSet {
        edges,
        largeness: largeness.min(1.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatchingTheoremReport {
    pub epsilon: f64,
    pub proper_distance: f64,
    pub threshold: f64,
    pub required_largeness: f64,
    pub hits: u64,
    pub trials: u64,
    pub frequency: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl MatchingTheoremReport {
    pub fn passes(&self) -> bool {
        self.frequency >= 1.0 / 3.0
    }
}

/// Frequency over random matchings that the `c eps^8`-unbalanced edges are
/// `d eps^4`-large. Requires `s` to be at least `eps` from every proper
/// state, measured exactly.
pub fn check_matching_theorem<R: Rng + ?Sized>(
    s: &StateVector,
    eps: f64,
    c: f64,
    d: f64,
    trials: u64,
    rng: &mut R,
) -> Result<MatchingTheoremReport> {
    if !(eps > 0.0 && eps <= 1.0) || c <= 0.0 || d <= 0.0 || trials == 0 {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps}, c = {c}, d = {d}, trials = {trials}"
        )));
    }
    let (dist, _) = proper_distance(s);
    if dist < eps {
        return Err(Error::Precondition(format!(
            "state is only {dist:.6} from a proper state, not {eps}-far"
        )));
    }
    let threshold = c * eps.powi(8);
    let required = d * eps.powi(4);
    let mut hits = 0;
    for _ in 0..trials {
        let m = random_matching(s.dim(), rng)?;
        if unbalanced_set(s, &m, threshold)?.largeness >= required {
            hits += 1;
        }
    }
    let (lo, hi) = wilson_interval(hits, trials, Z95);
    Ok(MatchingTheoremReport {
        epsilon: eps,
        proper_distance: dist,
        threshold,
        required_largeness: required,
        hits,
        trials,
        frequency: hits as f64 / trials as f64,
        wilson_low: lo,
        wilson_high: hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merlin::adversary_concentrated;
    use crate::rng::seeded;
    use crate::sat::Assignment;
    use crate::state::proper_state;
    use crate::stats::{chi_square, chi_square_critical_1pct};
    use alloc::vec;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn matching_examples() {
        let mut rng = seeded(1);
        assert_eq!(random_matching(2, &mut rng).unwrap().edges(), &[(0, 1)]);
        assert!(matches!(random_matching(5, &mut rng), Err(Error::OddDimension(5))));
        let a = random_matching(16, &mut seeded(3)).unwrap();
        assert_eq!(a, random_matching(16, &mut seeded(3)).unwrap());
    }

    #[test]
    fn n4_matchings_uniform() {
        let mut rng = seeded(2);
        let mut counts = [0u64; 3];
        for _ in 0..100_000 {
            let m = random_matching(4, &mut rng).unwrap();
            // Identify the matching by the partner of vertex 0.
            let e = m.edges()[m.edge_of(0).unwrap()];
            counts[e.1 - 1] += 1;
        }
        let stat = chi_square(&counts, &[1.0 / 3.0; 3]);
        assert!(stat < chi_square_critical_1pct(2), "chi2 {stat}");
    }

    #[test]
    fn disagreement_examples() {
        let c = |re, im| Complex64::new(re, im);
        let eq = StateVector::normalized(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(disagreement_prob(&eq, (0, 1)), 0.0);
        let one = StateVector::normalized(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((disagreement_prob(&one, (0, 1)) - 0.5).abs() < 1e-15);
        let rot = StateVector::normalized(vec![c(0.6, 0.3), c(-0.3, 0.6)]).unwrap();
        assert!((disagreement_prob(&rot, (0, 1)) - 0.5).abs() < 1e-15);
        let zero = StateVector::normalized(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(disagreement_prob(&zero, (1, 2)), 0.0);
    }

    #[test]
    fn unbalanced_examples() {
        let mut rng = seeded(4);
        let p = proper_state(&Assignment::new((0..16).map(|_| rng.random()).collect()), 16).unwrap();
        let m = random_matching(16, &mut rng).unwrap();
        assert!(unbalanced_set(&p, &m, 1e-9).unwrap().edges.is_empty());
        let e = StateVector::basis(16, 1).unwrap();
        let u = unbalanced_set(&e, &m, 0.5).unwrap();
        assert_eq!(u.edges, vec![m.edges()[m.edge_of(1).unwrap()]]);
        assert!((u.largeness - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matching_theorem_on_concentrated_state() {
        let mut rng = seeded(5);
        let n = 64;
        let support: Vec<usize> = (0..n / 2).collect();
        let s = adversary_concentrated(n, &support, 1, &mut rng).unwrap().get(0).clone();
        let eps = proper_distance(&s).0;
        let r = check_matching_theorem(&s, eps, DEFAULT_C, DEFAULT_D, 2000, &mut rng).unwrap();
        assert!(r.passes(), "{r:?}");
        let p = proper_state(&Assignment::zeros(n), n).unwrap();
        assert!(matches!(
            check_matching_theorem(&p, 0.1, DEFAULT_C, DEFAULT_D, 10, &mut rng),
            Err(Error::Precondition(_))
        ));
    }

    proptest! {
        #[test]
        fn edge_quantities_in_range(seed in any::<u64>(), half in 1usize..12) {
            let mut rng = seeded(seed);
            let n = 2 * half;
            let s = StateVector::random(n, &mut rng);
            let m = random_matching(n, &mut rng).unwrap();
            let stats = edge_stats(&s, &m).unwrap();
            for e in &stats {
                prop_assert!((0.0..=0.5).contains(&e.disagreement_prob));
                prop_assert!((e.unbalanced_at - e.disagreement_prob).abs() < 1e-12);
            }
            let u = unbalanced_set(&s, &m, 0.0).unwrap();
            prop_assert!(u.largeness <= 1.0);
        }
    }
}
