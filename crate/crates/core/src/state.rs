//! Pure states over `[N]`, proper-state encoding, distances and matching-basis
//! measurements.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::sat::Assignment;
use crate::{Error, Result};

pub type C64 = Complex64;

/// Allowed norm deviation before a constructor refuses to renormalize.
pub const NORM_REJECT: f64 = 1e-6;

/// Unit-norm complex amplitude vector.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// Renormalizes; vectors whose norm is off by more than [`NORM_REJECT`]
    /// are rejected as caller bugs.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParameter("state dimension must be at least 1".into()));
        }
        let norm = norm_of(&amps);
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_REJECT {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self::from_unnormalized_unchecked(amps, norm))
    }

    /// Keeps the amplitudes bit for bit (for deserialization); the norm must
    /// still be within [`NORM_REJECT`] of 1.
    pub fn from_stored(amps: Vec<C64>) -> Result<Self> {
        let norm = norm_of(&amps);
        if amps.is_empty() || !norm.is_finite() || (norm - 1.0).abs() > NORM_REJECT {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector { amps })
    }

    /// Normalizes any nonzero vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let norm = norm_of(&amps);
        if amps.is_empty() || !norm.is_finite() || norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self::from_unnormalized_unchecked(amps, norm))
    }

    fn from_unnormalized_unchecked(mut amps: Vec<C64>, norm: f64) -> Self {
        if norm != 1.0 {
            for a in amps.iter_mut() {
                *a /= norm;
            }
        }
        StateVector { amps }
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis state `|i>`.
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::InvalidParameter(format!("basis index {i} >= dim {dim}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[i] = C64::new(1.0, 0.0);
        Ok(StateVector { amps })
    }

    /// Haar-random state (normalized complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        loop {
            let amps: Vec<C64> = (0..dim)
                .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
                .collect();
            if let Ok(s) = Self::normalized(amps) {
                return s;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm_of(&self.amps)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        same_dim(self, other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<self|other>|^2`, divided by the stored norms so that rounding in the
    /// amplitudes cancels: identical vectors give exactly 1.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        let ip = self.inner(other)?;
        let na: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        let nb: f64 = other.amps.iter().map(|a| a.norm_sqr()).sum();
        Ok((ip.norm_sqr() / (na * nb)).min(1.0))
    }

    /// Measurement distribution in the computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

fn norm_of(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn same_dim(a: &StateVector, b: &StateVector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// `(1/sqrt N) sum_i (-1)^{a_i} |i>`.
pub fn proper_state(a: &Assignment, n: usize) -> Result<StateVector> {
    if a.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: a.len(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("state dimension must be at least 1".into()));
    }
    let amp = 1.0 / (n as f64).sqrt();
    Ok(StateVector {
        amps: a
            .bits
            .iter()
            .map(|&b| C64::new(if b { -amp } else { amp }, 0.0))
            .collect(),
    })
}

/// `sqrt(1 - |<a|b>|^2)`.
pub fn trace_distance_pure(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok((1.0 - a.fidelity(b)?).max(0.0).sqrt())
}

/// Acceptance probability of the swap test on pure inputs.
pub fn swap_test_prob(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok((1.0 + a.fidelity(b)?) / 2.0)
}

pub fn swap_test<R: Rng + ?Sized>(a: &StateVector, b: &StateVector, rng: &mut R) -> Result<bool> {
    let p = swap_test_prob(a, b)?;
    Ok(rng.random::<f64>() < p)
}

/// Joint fidelity of two product states given factor by factor.
pub fn product_fidelity(a: &[StateVector], b: &[StateVector]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    a.iter().zip(b).try_fold(1.0, |acc, (x, y)| Ok(acc * x.fidelity(y)?))
}

/// `1/2 sum_i ||alpha_i|^2 - 1/N|`.
pub fn nonuniformity(s: &StateVector) -> f64 {
    let u = 1.0 / s.dim() as f64;
    0.5 * s.amps.iter().map(|a| (a.norm_sqr() - u).abs()).sum::<f64>()
}

const IMPROPRIETY_GRID: usize = 4096;
const IMPROPRIETY_TOL: f64 = 1e-10;

fn impropriety_at(squares: &[C64], inv_n: f64, theta: f64) -> f64 {
    let r = C64::from_polar(inv_n, theta);
    squares.iter().map(|&z| (z - r).norm()).sum()
}

fn wrap(x: f64, m: f64) -> f64 {
    let r = x % m;
    if r < 0.0 {
        r + m
    } else {
        r
    }
}

/// `min_{|r| = 1/N} sum_i |alpha_i^2 - r|`, with the minimizing phase of `r`.
pub fn impropriety_with_phase(s: &StateVector) -> (f64, f64) {
    let squares: Vec<C64> = s.amps.iter().map(|a| a * a).collect();
    let inv_n = 1.0 / s.dim() as f64;
    let f = |t: f64| impropriety_at(&squares, inv_n, t);
    let step = 2.0 * PI / IMPROPRIETY_GRID as f64;
    let (mut best_t, mut best) = (0.0, f(0.0));
    for k in 1..IMPROPRIETY_GRID {
        let t = k as f64 * step;
        let v = f(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    // Golden-section refinement on the bracketing cell pair.
    let (mut lo, mut hi) = (best_t - step, best_t + step);
    let g = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > IMPROPRIETY_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let t = 0.5 * (lo + hi);
    let v = f(t);
    if v < best {
        (v, wrap(t, 2.0 * PI))
    } else {
        (best, best_t)
    }
}

pub fn impropriety(s: &StateVector) -> f64 {
    impropriety_with_phase(s).0
}

/// Proper state (up to a global phase) built from the impropriety minimizer:
/// each amplitude snaps to whichever of `±sqrt(r)` is closer. Returns that
/// state and its trace distance to `s`.
pub fn nearest_proper(s: &StateVector) -> (StateVector, f64) {
    let (_, theta) = impropriety_with_phase(s);
    let n = s.dim();
    // Principal root of r = e^{i theta}/N.
    let root = C64::from_polar(1.0 / (n as f64).sqrt(), theta / 2.0);
    let amps: Vec<C64> = s
        .amps
        .iter()
        .map(|&a| {
            if (a - root).norm() <= (a + root).norm() {
                root
            } else {
                -root
            }
        })
        .collect();
    let p = StateVector { amps };
    let d = trace_distance_pure(s, &p).expect("same dimension");
    (p, d)
}

/// Exact minimum trace distance from `s` to the set of proper states (global
/// phase free), with a minimizing assignment.
///
/// `max_x |sum_i (-1)^{x_i} alpha_i| = max_theta sum_i |Re(e^{-i theta} alpha_i)|`;
/// the right side is a sum of rectified sinusoids whose sign pattern is
/// constant between consecutive zero crossings, and on each such arc it is
/// `Re(e^{-i theta} S)` for a fixed `S`. Checking every arc is exact.
pub fn proper_distance(s: &StateVector) -> (f64, Assignment) {
    let n = s.dim();
    let mut cuts: Vec<f64> = s
        .amps
        .iter()
        .filter(|a| a.norm() > 0.0)
        .map(|a| wrap(a.arg() + PI / 2.0, PI))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    if cuts.is_empty() {
        cuts.push(0.0);
    }

    let mut best = (-1.0, Assignment::zeros(n));
    for k in 0..cuts.len() {
        let lo = cuts[k];
        let hi = if k + 1 < cuts.len() { cuts[k + 1] } else { cuts[0] + PI };
        let mid = 0.5 * (lo + hi);
        let rot = C64::from_polar(1.0, -mid);
        let bits: Vec<bool> = s.amps.iter().map(|a| (rot * a).re < 0.0).collect();
        let sum: C64 = s
            .amps
            .iter()
            .zip(&bits)
            .map(|(a, &neg)| if neg { -a } else { *a })
            .sum();
        // |S| is reachable from this sign pattern whether or not arg S lies
        // on the arc: the pattern itself is a proper state with overlap |S|.
        let ov = sum.norm();
        if ov > best.0 {
            best = (ov, Assignment::new(bits));
        }
    }
    let f = (best.0 * best.0 / n as f64).min(1.0);
    ((1.0 - f).max(0.0).sqrt(), best.1)
}

/// Perfect matching on `[N]`, edges stored with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matching {
    dim: usize,
    edges: Vec<(usize, usize)>,
}

impl Matching {
    pub fn new(dim: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if dim % 2 != 0 {
            return Err(Error::OddDimension(dim));
        }
        let mut seen = vec![false; dim];
        let mut norm = Vec::with_capacity(edges.len());
        for (i, j) in edges {
            let (i, j) = if i < j { (i, j) } else { (j, i) };
            if i == j || j >= dim {
                return Err(Error::InvalidMatching(format!("bad edge ({i}, {j}) for dim {dim}")));
            }
            for v in [i, j] {
                if core::mem::replace(&mut seen[v], true) {
                    return Err(Error::InvalidMatching(format!("index {v} covered twice")));
                }
            }
            norm.push((i, j));
        }
        if norm.len() * 2 != dim {
            return Err(Error::InvalidMatching("matching does not cover [N]".into()));
        }
        Ok(Matching { dim, edges: norm })
    }

    /// Pairs consecutive entries of a permutation of `[N]`.
    pub fn from_permutation(perm: &[usize]) -> Result<Self> {
        Self::new(perm.len(), perm.chunks(2).map(|c| (c[0], c[1])).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edge index containing vertex `v`.
    pub fn edge_of(&self, v: usize) -> Option<usize> {
        self.edges.iter().position(|&(i, j)| i == v || j == v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sign {
    Plus,
    Minus,
}

/// Outcome `(|i> ± |j>)/sqrt 2` of a matching-basis measurement. `edge` is
/// the index into the matching's edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatchingOutcome {
    pub edge: usize,
    pub pair: (usize, usize),
    pub sign: Sign,
}

fn check_matching(s: &StateVector, m: &Matching) -> Result<()> {
    if s.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            left: s.dim(),
            right: m.dim(),
        });
    }
    Ok(())
}

/// `[P+, P-]` per edge with `P± = |alpha_i ± alpha_j|^2 / 2`.
pub fn edge_probabilities(s: &StateVector, m: &Matching) -> Result<Vec<[f64; 2]>> {
    check_matching(s, m)?;
    Ok(m.edges
        .iter()
        .map(|&(i, j)| {
            let (a, b) = (s.amps[i], s.amps[j]);
            [(a + b).norm_sqr() / 2.0, (a - b).norm_sqr() / 2.0]
        })
        .collect())
}

/// Full outcome distribution in edge order, `+` before `-`.
pub fn matching_distribution(s: &StateVector, m: &Matching) -> Result<Vec<(MatchingOutcome, f64)>> {
    let probs = edge_probabilities(s, m)?;
    Ok(probs
        .iter()
        .enumerate()
        .flat_map(|(e, p)| {
            let pair = m.edges[e];
            [
                (
                    MatchingOutcome {
                        edge: e,
                        pair,
                        sign: Sign::Plus,
                    },
                    p[0],
                ),
                (
                    MatchingOutcome {
                        edge: e,
                        pair,
                        sign: Sign::Minus,
                    },
                    p[1],
                ),
            ]
        })
        .collect())
}

/// Cumulative table for repeated sampling from one (state, matching) pair.
#[derive(Debug, Clone)]
pub struct MatchingSampler {
    pairs: Vec<(usize, usize)>,
    cumulative: Vec<f64>,
}

impl MatchingSampler {
    pub fn new(s: &StateVector, m: &Matching) -> Result<Self> {
        let probs = edge_probabilities(s, m)?;
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .flat_map(|p| p.iter().copied())
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(MatchingSampler {
            pairs: m.edges.clone(),
            cumulative,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> MatchingOutcome {
        let total = *self.cumulative.last().expect("nonempty matching");
        let u = rng.random::<f64>() * total;
        let mut k = self.cumulative.partition_point(|&c| c <= u);
        // Never return a zero-probability cell at the top end.
        while k > 0 && (k >= self.cumulative.len() || self.prob(k) == 0.0) {
            k -= 1;
        }
        let edge = k / 2;
        MatchingOutcome {
            edge,
            pair: self.pairs[edge],
            sign: if k % 2 == 0 { Sign::Plus } else { Sign::Minus },
        }
    }

    fn prob(&self, k: usize) -> f64 {
        self.cumulative[k] - if k == 0 { 0.0 } else { self.cumulative[k - 1] }
    }
}

pub fn measure_matching<R: Rng + ?Sized>(s: &StateVector, m: &Matching, rng: &mut R) -> Result<MatchingOutcome> {
    Ok(MatchingSampler::new(s, m)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::stats::within_sigmas;
    use proptest::prelude::*;
    use rand::Rng;

    const R2: f64 = core::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn arb_state(max_dim: usize) -> impl Strategy<Value = StateVector> {
        (1..=max_dim, any::<u64>()).prop_map(|(d, seed)| StateVector::random(d, &mut seeded(seed)))
    }

    #[test]
    fn proper_examples() {
        let s = proper_state(&Assignment::new(vec![false, false]), 2).unwrap();
        assert!(s.amps().iter().all(|a| (a - c(R2, 0.0)).norm() < 1e-15));
        let s = proper_state(&Assignment::new(vec![false, true]), 2).unwrap();
        assert!((s.amps()[1] - c(-R2, 0.0)).norm() < 1e-15);
        assert!(proper_state(&Assignment::zeros(3), 4).is_err());
    }

    #[test]
    fn proper_overlap_matches_hamming() {
        let mut rng = seeded(1);
        for _ in 0..200 {
            let n = rng.random_range(1..40);
            let a = Assignment::new((0..n).map(|_| rng.random()).collect());
            let b = Assignment::new((0..n).map(|_| rng.random()).collect());
            let ov = proper_state(&a, n)
                .unwrap()
                .inner(&proper_state(&b, n).unwrap())
                .unwrap();
            let want = (n as f64 - 2.0 * a.hamming(&b) as f64) / n as f64;
            assert!((ov.re - want).abs() < 1e-12 && ov.im.abs() < 1e-12);
        }
    }

    #[test]
    fn constructor_rejects_unnormalized() {
        assert!(matches!(
            StateVector::from_real(&[1.0, 1.0]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(StateVector::from_real(&[]).is_err());
        let s = StateVector::from_real(&[1.0 + 1e-9, 0.0]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distances_and_swap() {
        let e0 = StateVector::basis(2, 0).unwrap();
        let e1 = StateVector::basis(2, 1).unwrap();
        let plus = StateVector::from_real(&[R2, R2]).unwrap();
        assert_eq!(trace_distance_pure(&e0, &e0).unwrap(), 0.0);
        assert_eq!(trace_distance_pure(&e0, &e1).unwrap(), 1.0);
        assert!((trace_distance_pure(&e0, &plus).unwrap() - R2).abs() < 1e-15);
        assert_eq!(swap_test_prob(&e0, &e0).unwrap(), 1.0);
        assert_eq!(swap_test_prob(&e0, &e1).unwrap(), 0.5);
        assert!(swap_test_prob(&e0, &StateVector::basis(3, 0).unwrap()).is_err());
    }

    #[test]
    fn swap_test_rejects_at_half_the_infidelity() {
        for eps in [0.0, 0.1, 0.37, 1.0f64] {
            let a = StateVector::from_real(&[1.0, 0.0]).unwrap();
            let b = StateVector::from_real(&[(1.0 - eps).sqrt(), eps.sqrt()]).unwrap();
            let reject = 1.0 - swap_test_prob(&a, &b).unwrap();
            assert!((reject - eps / 2.0).abs() < 1e-12);
        }
        let a = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let b = StateVector::from_real(&[0.8, 0.6]).unwrap();
        let p = swap_test_prob(&a, &b).unwrap();
        let mut rng = seeded(3);
        let trials = 100_000;
        let hits = (0..trials).filter(|_| swap_test(&a, &b, &mut rng).unwrap()).count() as u64;
        assert!(within_sigmas(hits, trials, p, 4.0));
    }

    #[test]
    fn nonuniformity_examples() {
        let p = proper_state(&Assignment::new(vec![true, false, true, true]), 4).unwrap();
        assert!(nonuniformity(&p) < 1e-15);
        let e1 = StateVector::basis(4, 1).unwrap();
        assert!((nonuniformity(&e1) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn impropriety_examples() {
        let p = proper_state(&Assignment::new(vec![true, false, false, true, true, false]), 6).unwrap();
        assert!(impropriety(&p) < 1e-9);
        // A global phase does not matter.
        let rotated = StateVector::new(p.amps().iter().map(|a| a * C64::from_polar(1.0, 0.7)).collect()).unwrap();
        assert!(impropriety(&rotated) < 1e-9);
        for n in [2usize, 4, 16] {
            let e = StateVector::basis(n, 1).unwrap();
            let want = 2.0 * (n as f64 - 1.0) / n as f64;
            assert!((impropriety(&e) - want).abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn nearest_proper_of_proper_is_itself() {
        let a = Assignment::new(vec![false, true, true, false]);
        let p = proper_state(&a, 4).unwrap();
        let (q, d) = nearest_proper(&p);
        assert!(d < 1e-9);
        assert!(q.fidelity(&p).unwrap() > 1.0 - 1e-12);
        let (d2, b) = proper_distance(&p);
        assert!(d2 < 1e-7);
        assert!(b == a || b == a.complement());
    }

    #[test]
    fn nearest_proper_beats_random_proper_states() {
        let mut rng = seeded(11);
        for _ in 0..20 {
            let n = 12;
            let s = StateVector::random(n, &mut rng);
            let (_, d) = nearest_proper(&s);
            let (exact, _) = proper_distance(&s);
            assert!(exact <= d + 1e-12);
            for _ in 0..1000 {
                let a = Assignment::new((0..n).map(|_| rng.random()).collect());
                let dp = trace_distance_pure(&s, &proper_state(&a, n).unwrap()).unwrap();
                assert!(exact <= dp + 1e-12);
            }
        }
    }

    #[test]
    fn proper_distance_matches_exhaustive_search() {
        let mut rng = seeded(12);
        for _ in 0..50 {
            let n = rng.random_range(1..11);
            let s = StateVector::random(n, &mut rng);
            let mut best: f64 = 0.0;
            for mask in 0..1u64 << n {
                let p = proper_state(&Assignment::from_mask(n, mask), n).unwrap();
                best = best.max(s.fidelity(&p).unwrap());
            }
            let (d, a) = proper_distance(&s);
            // Compare squared distances; the square root amplifies rounding.
            assert!(((1.0 - best).max(0.0) - d * d).abs() < 1e-12);
            let da = trace_distance_pure(&s, &proper_state(&a, n).unwrap()).unwrap();
            assert!((da * da - d * d).abs() < 1e-12);
        }
    }

    #[test]
    fn matching_validation() {
        assert!(matches!(Matching::new(3, vec![(0, 1)]), Err(Error::OddDimension(3))));
        assert!(Matching::new(4, vec![(0, 1), (1, 2)]).is_err());
        assert!(Matching::new(4, vec![(0, 1)]).is_err());
        let m = Matching::new(4, vec![(3, 0), (1, 2)]).unwrap();
        assert_eq!(m.edges(), &[(0, 3), (1, 2)]);
    }

    #[test]
    fn matching_distribution_examples() {
        let m = Matching::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let p = proper_state(&Assignment::new(vec![false, false, false, true]), 4).unwrap();
        let d = edge_probabilities(&p, &m).unwrap();
        assert!((d[0][0] - 0.5).abs() < 1e-15 && d[0][1] == 0.0);
        assert!(d[1][0] == 0.0 && (d[1][1] - 0.5).abs() < 1e-15);

        let s = StateVector::new(vec![c(0.5, 0.0), c(0.0, 0.5), c(0.5, 0.0), c(0.5, 0.0)]).unwrap();
        let d = edge_probabilities(&s, &m).unwrap();
        assert!((d[0][0] - d[0][1]).abs() < 1e-15);
        let total: f64 = matching_distribution(&s, &m).unwrap().iter().map(|x| x.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measurement_is_deterministic_and_unbiased() {
        let m = Matching::new(4, vec![(0, 2), (1, 3)]).unwrap();
        let e = StateVector::from_real(&[R2, 0.0, R2, 0.0]).unwrap();
        let mut rng = seeded(0);
        for _ in 0..100 {
            let o = measure_matching(&e, &m, &mut rng).unwrap();
            assert_eq!((o.edge, o.sign), (0, Sign::Plus));
        }

        let s = StateVector::normalized(vec![c(0.6, 0.0), c(0.0, 0.48), c(0.0, 0.36), c(0.48, 0.2)]).unwrap();
        let dist = matching_distribution(&s, &m).unwrap();
        let sampler = MatchingSampler::new(&s, &m).unwrap();
        let trials = 100_000u64;
        let mut counts = [0u64; 4];
        let mut rng = seeded(9);
        for _ in 0..trials {
            let o = sampler.sample(&mut rng);
            counts[2 * o.edge + (o.sign == Sign::Minus) as usize] += 1;
        }
        for (k, (_, p)) in dist.iter().enumerate() {
            assert!(within_sigmas(counts[k], trials, *p, 4.0), "cell {k}");
        }
        let seq = |seed| {
            let mut r = seeded(seed);
            (0..20).map(|_| sampler.sample(&mut r)).collect::<Vec<_>>()
        };
        assert_eq!(seq(5), seq(5));
    }

    proptest! {
        #[test]
        fn triangle_inequality(a in arb_state(6), seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let b = StateVector::random(a.dim(), &mut rng);
            let c = StateVector::random(a.dim(), &mut rng);
            let ab = trace_distance_pure(&a, &b).unwrap();
            let bc = trace_distance_pure(&b, &c).unwrap();
            let ac = trace_distance_pure(&a, &c).unwrap();
            // sqrt(1 - F) turns 1e-16 rounding in F into ~1e-8.
            prop_assert!(ac <= ab + bc + 1e-7);
        }

        #[test]
        fn projector_acceptance_is_trace_distance_bounded(a in arb_state(6), seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let b = StateVector::random(a.dim(), &mut rng);
            // Random coordinate projector.
            let keep: Vec<bool> = (0..a.dim()).map(|_| rng.random()).collect();
            let acc = |s: &StateVector| -> f64 {
                s.amps().iter().zip(&keep).filter(|x| *x.1).map(|x| x.0.norm_sqr()).sum()
            };
            prop_assert!((acc(&a) - acc(&b)).abs() <= trace_distance_pure(&a, &b).unwrap() + 1e-12);
        }

        #[test]
        fn product_fidelity_union_bound(k in 1usize..=4, dim in 1usize..=8, seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let xs: Vec<StateVector> = (0..k).map(|_| StateVector::random(dim, &mut rng)).collect();
            let ys: Vec<StateVector> = xs
                .iter()
                .map(|x| {
                    let noise = StateVector::random(dim, &mut rng);
                    let t: f64 = rng.random_range(0.0..0.3);
                    StateVector::normalized(
                        x.amps().iter().zip(noise.amps()).map(|(a, b)| a * (1.0 - t) + b * t).collect(),
                    )
                    .unwrap()
                })
                .collect();
            let eps: f64 = xs.iter().zip(&ys).map(|(x, y)| 1.0 - x.fidelity(y).unwrap()).sum();
            prop_assert!(product_fidelity(&xs, &ys).unwrap() >= 1.0 - eps - 1e-12);
        }

        #[test]
        fn functional_ranges(s in arb_state(16)) {
            let n = s.dim() as f64;
            let nu = nonuniformity(&s);
            prop_assert!(nu >= 0.0 && nu <= 1.0 - 1.0 / n + 1e-12);
            let imp = impropriety(&s);
            prop_assert!((0.0..=2.0 + 1e-12).contains(&imp));
        }

        #[test]
        fn small_impropriety_means_close(s in arb_state(8), t in 0.0f64..1.0) {
            // Pull a random state toward a proper one so small-imp cases occur.
            let n = s.dim();
            let p = proper_state(&Assignment::from_mask(n, 0b1011), n).unwrap();
            let mixed = StateVector::normalized(
                p.amps().iter().zip(s.amps()).map(|(a, b)| a * (1.0 - t) + b * t * 0.2).collect(),
            ).unwrap();
            let imp = impropriety(&mixed);
            let (_, d) = nearest_proper(&mixed);
            prop_assert!(d <= imp.sqrt() + 1e-9, "imp {imp}, dist {d}");
        }
    }
}
