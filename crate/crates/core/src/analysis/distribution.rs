use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    /// Accepts nonnegative finite weights summing to 1 within `1e-12`; the
    /// stored vector is renormalized.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDensity("empty distribution".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDensity(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDensity(format!("probabilities sum to {total}")));
        }
        Ok(Self {
            probs: probs.into_iter().map(|p| p / total).collect(),
        })
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidDensity(format!("weights sum to {total}")));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(alloc::vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tv(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    /// Total variation distance to the uniform distribution.
    pub fn nonuniformity(&self) -> f64 {
        let u = 1.0 / self.len() as f64;
        0.5 * self.probs.iter().map(|p| (p - u).abs()).sum::<f64>()
    }

    pub fn mass(&self, event: &[bool]) -> Result<f64> {
        if event.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: event.len(),
            });
        }
        Ok(self.probs.iter().zip(event).filter(|(_, &e)| e).map(|(p, _)| p).sum())
    }

    /// Distribution conditioned on `event`; `None` if the event has no mass.
    pub fn condition(&self, event: &[bool]) -> Result<Option<Self>> {
        let m = self.mass(event)?;
        if m == 0.0 {
            return Ok(None);
        }
        let probs = self
            .probs
            .iter()
            .zip(event)
            .map(|(p, &e)| if e { p / m } else { 0.0 })
            .collect();
        Ok(Some(Self { probs }))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HeavyLight {
    pub kappa: f64,
    pub heavy: Vec<usize>,
    pub very_heavy: Vec<usize>,
    pub light: Vec<usize>,
    pub very_light: Vec<usize>,
    /// Mass of the very heavy set.
    pub very_heavy_weight: f64,
    /// `|L*| >= kappa N / 2`.
    pub light_bound_holds: bool,
    /// `W(H*) >= kappa / 2`.
    pub heavy_bound_holds: bool,
}

/// Splits `[N]` by comparing `p_i` against `1/N`, `(1 + kappa/2)/N` and
/// `(1 - kappa/4)/N`. Requires the distribution to be at least `kappa` from
/// uniform in total variation.
pub fn heavy_light_decompose(p: &DiscreteDistribution, kappa: f64) -> Result<HeavyLight> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::InvalidParameter(format!("kappa = {kappa}")));
    }
    let nu = p.nonuniformity();
    if nu < kappa {
        return Err(Error::Precondition(format!(
            "distribution is {nu} from uniform, below kappa = {kappa}"
        )));
    }
    let n = p.len() as f64;
    let mut out = HeavyLight {
        kappa,
        heavy: Vec::new(),
        very_heavy: Vec::new(),
        light: Vec::new(),
        very_light: Vec::new(),
        very_heavy_weight: 0.0,
        light_bound_holds: false,
        heavy_bound_holds: false,
    };
    for (i, &pi) in p.probs().iter().enumerate() {
        if pi >= 1.0 / n {
            out.heavy.push(i);
        } else {
            out.light.push(i);
        }
        if pi >= (1.0 + kappa / 2.0) / n {
            out.very_heavy.push(i);
            out.very_heavy_weight += pi;
        }
        if pi <= (1.0 - kappa / 4.0) / n {
            out.very_light.push(i);
        }
    }
    out.light_bound_holds = out.very_light.len() as f64 >= kappa * n / 2.0;
    out.heavy_bound_holds = out.very_heavy_weight >= kappa / 2.0;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CondVarReport {
    /// Probability of the event under the first distribution.
    pub a: f64,
    pub kappa: f64,
    /// Distance between the two conditioned distributions.
    pub distance: f64,
    /// `kappa / (a - kappa)`.
    pub bound: f64,
}

impl CondVarReport {
    pub fn holds(&self) -> bool {
        self.distance <= self.bound + 1e-12
    }
}

/// Compares the conditioned distributions against `kappa / (a - kappa)`
/// where `a = P_{D1}[E]` and `kappa = ||D1 - D2||`. Vacuous bounds
/// (`a <= kappa`) are reported as precondition failures.
pub fn conditional_variation(
    d1: &DiscreteDistribution,
    d2: &DiscreteDistribution,
    event: &[bool],
) -> Result<CondVarReport> {
    let kappa = d1.tv(d2)?;
    let a = d1.mass(event)?;
    if a <= kappa {
        return Err(Error::Precondition(format!(
            "event mass {a} does not exceed distance {kappa}"
        )));
    }
    let c1 = d1.condition(event)?.expect("positive mass");
    let c2 = d2
        .condition(event)?
        .ok_or_else(|| Error::Precondition("event has no mass under the second distribution".into()))?;
    Ok(CondVarReport {
        a,
        kappa,
        distance: c1.tv(&c2)?,
        bound: kappa / (a - kappa),
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnbalwrtReport {
    pub mu: f64,
    /// Outcomes `x` still `c'`-balanced under the perturbed distribution.
    pub balanced: Vec<usize>,
    pub mass: f64,
    /// `1 - 8 mu / (c - 2c')`.
    pub bound: f64,
}

impl UnbalwrtReport {
    pub fn holds(&self) -> bool {
        self.mass >= self.bound - 1e-12
    }
}

fn pairs_tv(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    0.5 * a
        .iter()
        .zip(b)
        .map(|(x, y)| (x.0 - y.0).abs() + (x.1 - y.1).abs())
        .sum::<f64>()
}

fn pairs_validate(d: &[(f64, f64)]) -> Result<()> {
    let total: f64 = d.iter().map(|(p, q)| p + q).sum();
    if d.iter()
        .any(|&(p, q)| !(p >= 0.0 && q >= 0.0 && p.is_finite() && q.is_finite()))
        || (total - 1.0).abs() > SUM_TOLERANCE
    {
        return Err(Error::InvalidDensity(format!("pair distribution sums to {total}")));
    }
    Ok(())
}

/// `d` and `d2` are distributions over `[N] x {0,1}` given as `(p_x, q_x)`
/// pairs. Every `x` must be `c`-balanced under `d`, i.e.
/// `2 p_x q_x >= c (p_x + q_x)^2`.
pub fn check_unbalwrt(d: &[(f64, f64)], d2: &[(f64, f64)], c: f64, c_prime: f64) -> Result<UnbalwrtReport> {
    if d.len() != d2.len() {
        return Err(Error::DimensionMismatch {
            left: d.len(),
            right: d2.len(),
        });
    }
    if !(c > 0.0 && c < 0.5) || !(c_prime > 0.0 && c_prime < c / 2.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < c < 1/2 and 0 < c' < c/2, got c = {c}, c' = {c_prime}"
        )));
    }
    pairs_validate(d)?;
    pairs_validate(d2)?;
    for (x, &(p, q)) in d.iter().enumerate() {
        let s = p + q;
        if 2.0 * p * q < c * s * s * (1.0 - 1e-12) {
            return Err(Error::Precondition(format!("outcome {x} is not {c}-balanced")));
        }
    }
    let mu = pairs_tv(d, d2);
    let mut balanced = Vec::new();
    let mut mass = 0.0;
    for (x, &(p, q)) in d2.iter().enumerate() {
        let s = p + q;
        if 2.0 * p * q >= c_prime * s * s {
            balanced.push(x);
            mass += s;
        }
    }
    Ok(UnbalwrtReport {
        mu,
        balanced,
        mass,
        bound: 1.0 - 8.0 * mu / (c - 2.0 * c_prime),
    })
}

/// `(sum_x p_x q_x, (1 - ||p - q||)^2 / n)`: the overlap and its lower bound.
pub fn overlap_bound(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<(f64, f64)> {
    let eps = p.tv(q)?;
    let overlap = p.probs().iter().zip(q.probs()).map(|(a, b)| a * b).sum();
    Ok((overlap, (1.0 - eps).powi(2) / p.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_dist<R: Rng>(n: usize, rng: &mut R) -> DiscreteDistribution {
        DiscreteDistribution::from_weights((0..n).map(|_| rng.random::<f64>().powi(3)).collect()).unwrap()
    }

    #[test]
    fn validation() {
        assert!(DiscreteDistribution::new(vec![0.5, 0.5]).is_ok());
        assert!(DiscreteDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![]).is_err());
        assert!(DiscreteDistribution::from_weights(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn heavy_light_example() {
        let p = DiscreteDistribution::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(p.nonuniformity(), 0.5);
        let hl = heavy_light_decompose(&p, 0.5).unwrap();
        assert_eq!(hl.heavy, vec![0, 1]);
        assert_eq!(hl.very_heavy, vec![0, 1]);
        assert_eq!(hl.light, vec![2, 3]);
        assert_eq!(hl.very_light, vec![2, 3]);
        assert!(hl.light_bound_holds && hl.heavy_bound_holds);
        assert!(matches!(heavy_light_decompose(&p, 0.6), Err(Error::Precondition(_))));
    }

    #[test]
    fn excess_mass_equals_distance() {
        let mut rng = seeded(1);
        for _ in 0..100 {
            let p = random_dist(50, &mut rng);
            let n = p.len() as f64;
            let excess: f64 = p.probs().iter().filter(|&&x| x >= 1.0 / n).map(|x| x - 1.0 / n).sum();
            assert!((excess - p.nonuniformity()).abs() < 1e-12);
        }
    }

    #[test]
    fn condvar_examples() {
        let d1 = DiscreteDistribution::new(vec![0.25; 4]).unwrap();
        let d2 = DiscreteDistribution::new(vec![0.3, 0.2, 0.25, 0.25]).unwrap();
        let r = conditional_variation(&d1, &d2, &[true, true, true, false]).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(matches!(
            conditional_variation(&d1, &d2, &[false, false, false, false]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn unbalwrt_rejects_bad_parameters() {
        let d = vec![(0.25, 0.25), (0.25, 0.25)];
        assert!(matches!(
            check_unbalwrt(&d, &d, 0.3, 0.2),
            Err(Error::InvalidParameter(_))
        ));
        let skew = vec![(0.5, 0.0), (0.25, 0.25)];
        assert!(matches!(
            check_unbalwrt(&skew, &d, 0.3, 0.1),
            Err(Error::Precondition(_))
        ));
        let r = check_unbalwrt(&d, &d, 0.4, 0.1).unwrap();
        assert_eq!(r.mass, 1.0);
        assert_eq!(r.mu, 0.0);
    }

    #[test]
    fn overlap_example() {
        let u = DiscreteDistribution::uniform(10).unwrap();
        let (o, b) = overlap_bound(&u, &u).unwrap();
        assert!((o - 0.1).abs() < 1e-15 && (b - 0.1).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn heavy_light_propositions(seed in any::<u64>(), n in 2usize..200, frac in 0.05f64..1.0) {
            let mut rng = seeded(seed);
            let p = random_dist(n, &mut rng);
            let nu = p.nonuniformity();
            prop_assume!(nu > 1e-6);
            let hl = heavy_light_decompose(&p, nu * frac).unwrap();
            prop_assert!(hl.light_bound_holds);
            prop_assert!(hl.heavy_bound_holds);
        }

        #[test]
        fn condvar_holds(seed in any::<u64>(), n in 2usize..40) {
            let mut rng = seeded(seed);
            let d1 = random_dist(n, &mut rng);
            let mix: f64 = rng.random_range(0.0..0.3);
            let noise = random_dist(n, &mut rng);
            let d2 = DiscreteDistribution::from_weights(
                d1.probs().iter().zip(noise.probs()).map(|(a, b)| (1.0 - mix) * a + mix * b).collect()
            ).unwrap();
            let event: Vec<bool> = (0..n).map(|_| rng.random_bool(0.7)).collect();
            if let Ok(r) = conditional_variation(&d1, &d2, &event) {
                prop_assert!(r.holds(), "{:?}", r);
            }
        }

        #[test]
        fn unbalwrt_holds(seed in any::<u64>(), n in 1usize..30, c in 0.05f64..0.49, ratio in 0.01f64..0.99, mix in 0.0f64..0.5) {
            let mut rng = seeded(seed);
            let c_prime = c / 2.0 * ratio;
            // c-balanced: the split t of each outcome satisfies 2t(1-t) >= c.
            let t_min = (1.0 - (1.0 - 2.0 * c).sqrt()) / 2.0;
            let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = w.iter().sum();
            let d: Vec<(f64, f64)> = w.iter().map(|x| {
                let t = rng.random_range(t_min..=0.5);
                let t = if rng.random_bool(0.5) { t } else { 1.0 - t };
                (x / total * t, x / total * (1.0 - t))
            }).collect();
            let noise: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
            let nt: f64 = noise.iter().map(|(a, b)| a + b).sum();
            let d2: Vec<(f64, f64)> = d.iter().zip(&noise)
                .map(|(&(p, q), &(a, b))| ((1.0 - mix) * p + mix * a / nt, (1.0 - mix) * q + mix * b / nt))
                .collect();
            let r = check_unbalwrt(&d, &d2, c, c_prime).unwrap();
            prop_assert!(r.holds(), "{:?}", r);
        }

        #[test]
        fn overlap_bound_holds(seed in any::<u64>(), n in 1usize..60) {
            let mut rng = seeded(seed);
            let (p, q) = (random_dist(n, &mut rng), random_dist(n, &mut rng));
            let (o, b) = overlap_bound(&p, &q).unwrap();
            prop_assert!(o >= b - 1e-15);
        }
    }
}
