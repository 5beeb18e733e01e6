//! Witness bundles: the honest prover and parameterized cheating families.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::sat::Assignment;
use crate::state::{proper_state, StateVector};
use crate::{Error, Result};

/// Draws allowed per witness before `adversary_nonidentical` gives up.
pub const REJECTION_BUDGET: usize = 10_000;

/// `K` unentangled pure witnesses of a common dimension.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WitnessBundle {
    witnesses: Vec<StateVector>,
}

impl WitnessBundle {
    pub fn new(witnesses: Vec<StateVector>) -> Result<Self> {
        let first = witnesses
            .first()
            .ok_or_else(|| Error::InvalidParameter("a bundle needs at least one witness".into()))?;
        if let Some(w) = witnesses.iter().find(|w| w.dim() != first.dim()) {
            return Err(Error::DimensionMismatch {
                left: first.dim(),
                right: w.dim(),
            });
        }
        Ok(WitnessBundle { witnesses })
    }

    pub fn copies(state: StateVector, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("a bundle needs at least one witness".into()));
        }
        Ok(WitnessBundle {
            witnesses: core::iter::repeat_n(state, k).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.witnesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.witnesses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.witnesses[0].dim()
    }

    pub fn witnesses(&self) -> &[StateVector] {
        &self.witnesses
    }

    pub fn get(&self, k: usize) -> &StateVector {
        &self.witnesses[k]
    }

    /// Whether all witnesses are the same amplitude array.
    pub fn is_identical(&self) -> bool {
        self.witnesses.windows(2).all(|w| w[0] == w[1])
    }
}

/// `K` copies of the proper state of `a`.
pub fn honest_bundle(a: &Assignment, k: usize) -> Result<WitnessBundle> {
    WitnessBundle::copies(proper_state(a, a.len())?, k)
}

/// `K` copies of a state uniform in magnitude on `support` with random signs.
pub fn adversary_concentrated<R: Rng + ?Sized>(
    dim: usize,
    support: &[usize],
    k: usize,
    rng: &mut R,
) -> Result<WitnessBundle> {
    if support.is_empty() {
        return Err(Error::InvalidParameter("support must be nonempty".into()));
    }
    let mut amps = alloc::vec![Complex64::new(0.0, 0.0); dim];
    let amp = 1.0 / (support.len() as f64).sqrt();
    for &i in support {
        if i >= dim {
            return Err(Error::InvalidParameter(format!("support index {i} >= dim {dim}")));
        }
        if amps[i] != Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidParameter(format!("support index {i} repeated")));
        }
        amps[i] = Complex64::new(if rng.random() { -amp } else { amp }, 0.0);
    }
    WitnessBundle::copies(StateVector::new(amps)?, k)
}

/// Uniformly random support of the given size.
pub fn random_support<R: Rng + ?Sized>(dim: usize, size: usize, rng: &mut R) -> Result<Vec<usize>> {
    if size == 0 || size > dim {
        return Err(Error::InvalidParameter(format!("support size {size} not in 1..={dim}")));
    }
    let mut s = index::sample(rng, dim, size).into_vec();
    s.sort_unstable();
    Ok(s)
}

/// `K` copies of the proper state of `a` with amplitude `i` rotated by
/// `theta_i ~ N(0, sigma^2)` (one draw shared by all copies).
pub fn adversary_phased<R: Rng + ?Sized>(a: &Assignment, sigma: f64, k: usize, rng: &mut R) -> Result<WitnessBundle> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma = {sigma} must be finite and >= 0"
        )));
    }
    let base = proper_state(a, a.len())?;
    if sigma == 0.0 {
        return WitnessBundle::copies(base, k);
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    let amps = base
        .amps()
        .iter()
        .map(|&x| x * Complex64::from_polar(1.0, normal.sample(rng)))
        .collect();
    WitnessBundle::copies(StateVector::new(amps)?, k)
}

/// `K` independent perturbations `normalize(base + sqrt(delta) g)` with `g`
/// a complex Gaussian of unit expected norm, each redrawn until
/// `|<base|phi>| >= 1 - delta`.
pub fn adversary_nonidentical<R: Rng + ?Sized>(
    base: &StateVector,
    delta: f64,
    k: usize,
    rng: &mut R,
) -> Result<WitnessBundle> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("delta = {delta} not in [0, 1]")));
    }
    if delta == 0.0 {
        return WitnessBundle::copies(base.clone(), k);
    }
    let n = base.dim();
    let scale = (delta / (2.0 * n as f64)).sqrt();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let mut accepted = None;
        for _ in 0..REJECTION_BUDGET {
            let amps: Vec<Complex64> = base
                .amps()
                .iter()
                .map(|&a| {
                    let g = Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
                    a + g * scale
                })
                .collect();
            let Ok(phi) = StateVector::normalized(amps) else {
                continue;
            };
            if base.inner(&phi)?.norm() >= 1.0 - delta {
                accepted = Some(phi);
                break;
            }
        }
        out.push(accepted.ok_or(Error::RejectionBudget(REJECTION_BUDGET))?);
    }
    WitnessBundle::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::state::{impropriety, nonuniformity, swap_test_prob, trace_distance_pure};
    use alloc::vec;

    fn assignment(n: usize, seed: u64) -> Assignment {
        let mut rng = seeded(seed);
        Assignment::new((0..n).map(|_| rng.random()).collect())
    }

    #[test]
    fn honest_bundle_is_identical_copies() {
        let a = assignment(8, 1);
        let b = honest_bundle(&a, 1).unwrap();
        assert_eq!(b.len(), 1);
        let b = honest_bundle(&a, 5).unwrap();
        assert!(b.is_identical());
        for w in b.witnesses() {
            assert_eq!(swap_test_prob(b.get(0), w).unwrap(), 1.0);
        }
        assert!(honest_bundle(&a, 0).is_err());
    }

    #[test]
    fn concentrated_nonuniformity() {
        let n = 16;
        let mut rng = seeded(2);
        let full: Vec<usize> = (0..n).collect();
        let b = adversary_concentrated(n, &full, 3, &mut rng).unwrap();
        assert!(nonuniformity(b.get(0)) < 1e-15);
        let b = adversary_concentrated(n, &[5], 3, &mut rng).unwrap();
        assert!((nonuniformity(b.get(0)) - (1.0 - 1.0 / n as f64)).abs() < 1e-15);
        let half = random_support(n, n / 2, &mut rng).unwrap();
        let b = adversary_concentrated(n, &half, 3, &mut rng).unwrap();
        assert!((nonuniformity(b.get(0)) - 0.5).abs() < 1e-15);
        assert!(adversary_concentrated(n, &[], 3, &mut rng).is_err());
        assert!(adversary_concentrated(n, &[1, 1], 3, &mut rng).is_err());
    }

    #[test]
    fn phased_family() {
        let a = assignment(32, 3);
        let mut rng = seeded(4);
        assert_eq!(
            adversary_phased(&a, 0.0, 4, &mut rng).unwrap(),
            honest_bundle(&a, 4).unwrap()
        );
        let mut imp_sum = 0.0;
        for _ in 0..1000 {
            let b = adversary_phased(&a, core::f64::consts::FRAC_PI_2, 1, &mut rng).unwrap();
            assert!(nonuniformity(b.get(0)) < 1e-12);
            imp_sum += impropriety(b.get(0));
        }
        assert!(imp_sum / 1000.0 > 0.5, "mean impropriety {}", imp_sum / 1000.0);
        assert!(adversary_phased(&a, -1.0, 1, &mut rng).is_err());
    }

    #[test]
    fn nonidentical_family() {
        let base = StateVector::random(32, &mut seeded(5));
        let mut rng = seeded(6);
        let b = adversary_nonidentical(&base, 0.0, 3, &mut rng).unwrap();
        assert!(b.witnesses().iter().all(|w| w == &base));
        for delta in [0.01, 0.1, 0.5] {
            let b = adversary_nonidentical(&base, delta, 8, &mut rng).unwrap();
            for w in b.witnesses() {
                assert!(base.inner(w).unwrap().norm() >= 1.0 - delta);
                assert!(trace_distance_pure(&base, w).unwrap() <= (2.0 * delta).sqrt());
            }
            assert!(!b.is_identical());
        }
        assert!(adversary_nonidentical(&base, 1.5, 1, &mut rng).is_err());
    }

    #[test]
    fn families_are_seed_deterministic() {
        let a = assignment(16, 7);
        let run = |seed| {
            let mut rng = seeded(seed);
            let s = random_support(16, 8, &mut rng).unwrap();
            (
                adversary_concentrated(16, &s, 2, &mut rng).unwrap(),
                adversary_phased(&a, 1.0, 2, &mut rng).unwrap(),
                adversary_nonidentical(&proper_state(&a, 16).unwrap(), 0.2, 2, &mut rng).unwrap(),
            )
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn bundle_dimension_checked() {
        let a = StateVector::basis(2, 0).unwrap();
        let b = StateVector::basis(4, 0).unwrap();
        assert!(WitnessBundle::new(vec![a, b]).is_err());
        assert!(WitnessBundle::new(vec![]).is_err());
    }
}
