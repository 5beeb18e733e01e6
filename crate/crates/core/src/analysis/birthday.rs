use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::distribution::DiscreteDistribution;
use crate::{Error, Result};

/// `1 - prod_{k<K} (1 - k/n)`.
pub fn birthday_uniform(n: usize, k: usize) -> f64 {
    if k > n {
        return 1.0;
    }
    1.0 - (0..k).map(|i| 1.0 - i as f64 / n as f64).product::<f64>()
}

/// Collision probability of `k` i.i.d. draws from `p`.
///
/// `P[all distinct] = k! e_k(p)`; the DP carries `f_j = j! e_j` so every
/// intermediate stays in `[0, 1]`.
pub fn birthday_iid_exact(p: &DiscreteDistribution, k: usize) -> f64 {
    if k > p.len() {
        return 1.0;
    }
    let mut f = vec![0.0; k + 1];
    f[0] = 1.0;
    for &px in p.probs() {
        for j in (1..=k).rev() {
            f[j] += j as f64 * px * f[j - 1];
        }
    }
    (1.0 - f[k]).clamp(0.0, 1.0)
}

fn check_common_support(dists: &[DiscreteDistribution]) -> Result<usize> {
    let n = dists.first().map_or(0, |d| d.len());
    if let Some(d) = dists.iter().find(|d| d.len() != n) {
        return Err(Error::DimensionMismatch {
            left: n,
            right: d.len(),
        });
    }
    Ok(n)
}

/// Exact collision probability by enumerating injective outcome tuples.
/// The work is bounded by the product of support sizes, which must fit in
/// `budget`.
pub fn birthday_collision_exact(dists: &[DiscreteDistribution], budget: u128) -> Result<f64> {
    check_common_support(dists)?;
    let supports: Vec<Vec<(usize, f64)>> = dists
        .iter()
        .map(|d| {
            d.probs()
                .iter()
                .copied()
                .enumerate()
                .filter(|&(_, p)| p > 0.0)
                .collect()
        })
        .collect();
    let needed = supports
        .iter()
        .fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128));
    if needed > budget {
        return Err(Error::EnumerationBudget { needed, budget });
    }
    fn go(supports: &[Vec<(usize, f64)>], used: &mut Vec<bool>, weight: f64) -> f64 {
        let Some((first, rest)) = supports.split_first() else {
            return weight;
        };
        let mut total = 0.0;
        for &(x, p) in first {
            if !used[x] {
                used[x] = true;
                total += go(rest, used, weight * p);
                used[x] = false;
            }
        }
        total
    }
    let n = dists.first().map_or(0, |d| d.len());
    let distinct = go(&supports, &mut vec![false; n], 1.0);
    Ok((1.0 - distinct).clamp(0.0, 1.0))
}

/// Monte-Carlo estimate with fully independent draws: `(hits, trials)`.
pub fn birthday_monte_carlo<R: Rng + ?Sized>(
    dists: &[DiscreteDistribution],
    trials: u64,
    rng: &mut R,
) -> Result<(u64, u64)> {
    let n = check_common_support(dists)?;
    let samplers: Vec<WeightedIndex<f64>> = dists
        .iter()
        .map(|d| WeightedIndex::new(d.probs()).map_err(|e| Error::InvalidDensity(alloc::format!("{e}"))))
        .collect::<Result<_>>()?;
    let mut stamp = vec![0u64; n];
    let mut hits = 0;
    for t in 1..=trials {
        for s in &samplers {
            let x = s.sample(rng);
            if stamp[x] == t {
                hits += 1;
                break;
            }
            stamp[x] = t;
        }
    }
    Ok((hits, trials))
}

const MERSENNE_61: u64 = (1 << 61) - 1;

fn mod_mersenne(x: u128) -> u64 {
    let p = MERSENNE_61 as u128;
    let r = (x & p) + (x >> 61);
    let r = (r & p) + (r >> 61);
    (if r >= p { r - p } else { r }) as u64
}

/// 4-wise independent family: a uniformly random cubic polynomial over
/// `GF(2^61 - 1)` evaluated at distinct points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourWiseSampler {
    coeffs: [u64; 4],
}

impl FourWiseSampler {
    pub fn new<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            coeffs: core::array::from_fn(|_| rng.random_range(0..MERSENNE_61)),
        }
    }

    pub fn from_coeffs(coeffs: [u64; 4]) -> Self {
        Self {
            coeffs: coeffs.map(|c| c % MERSENNE_61),
        }
    }

    /// Field element at point `i`, uniform on `[0, 2^61 - 1)`.
    pub fn hash(&self, i: u64) -> u64 {
        let x = i % MERSENNE_61;
        self.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| mod_mersenne(acc as u128 * x as u128 + c as u128))
    }

    /// Draw for variable `i` with marginal `cdf` (cumulative sums, last = 1)
    /// by inverse transform; the marginal is exact up to `n / 2^61`.
    pub fn sample(&self, i: u64, cdf: &[f64]) -> usize {
        let u = (self.hash(i) as f64 + 0.5) / MERSENNE_61 as f64;
        cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
    }

    /// Whether two of the variables `X_0..X_K` collide, with `X_i` drawn
    /// from `dists[i]`.
    pub fn collides(&self, cdfs: &[Vec<f64>]) -> bool {
        let n = cdfs.first().map_or(0, |c| c.len());
        let mut seen = vec![false; n];
        for (i, cdf) in cdfs.iter().enumerate() {
            let x = self.sample(i as u64, cdf);
            if seen[x] {
                return true;
            }
            seen[x] = true;
        }
        false
    }
}

pub fn cumulative(d: &DiscreteDistribution) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = d
        .probs()
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

/// `E[Y] = sum_{i<j} sum_x p_{i,x} p_{j,x}`, the expected number of
/// colliding pairs.
pub fn birthday_expectation(dists: &[DiscreteDistribution]) -> Result<f64> {
    let n = check_common_support(dists)?;
    let mut col = vec![0.0; n];
    let mut diag = 0.0;
    for d in dists {
        for (x, &p) in d.probs().iter().enumerate() {
            col[x] += p;
            diag += p * p;
        }
    }
    Ok((col.iter().map(|s| s * s).sum::<f64>() - diag) / 2.0)
}

/// The numeric floor asserted for the expected number of collisions in the
/// second-moment argument.
pub const CLAIMED_EXPECTATION_FLOOR: f64 = 900.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BirthdayIntermediates {
    pub n: usize,
    pub k: usize,
    pub max_pairwise_distance: f64,
    pub expected_collisions: f64,
    /// `C(K, 2) (1 - 1/10)^2 / n`.
    pub overlap_floor: f64,
    pub claimed_floor: f64,
    /// `(1 + 72 sqrt 2) / E[Y] + 6 sqrt 2 / 40`, the Chebyshev bound on
    /// `P[Y = 0]`.
    pub no_collision_bound: f64,
    /// Smallest `E[Y]` for which the Chebyshev bound reaches 1/2.
    pub sufficient_expectation: f64,
}

impl BirthdayIntermediates {
    pub fn overlap_floor_holds(&self) -> bool {
        self.expected_collisions >= self.overlap_floor - 1e-9
    }

    pub fn claimed_floor_holds(&self) -> bool {
        self.overlap_floor >= self.claimed_floor && self.expected_collisions >= self.claimed_floor
    }

    pub fn chebyshev_holds(&self) -> bool {
        self.no_collision_bound <= 0.5
    }
}

pub fn birthday_proof_intermediates(dists: &[DiscreteDistribution]) -> Result<BirthdayIntermediates> {
    let n = check_common_support(dists)?;
    let k = dists.len();
    let mut max_tv: f64 = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            max_tv = max_tv.max(dists[i].tv(&dists[j])?);
        }
    }
    let ey = birthday_expectation(dists)?;
    let pairs = (k * k.saturating_sub(1)) as f64 / 2.0;
    let r2 = core::f64::consts::SQRT_2;
    let slack = 0.5 - 6.0 * r2 / 40.0;
    Ok(BirthdayIntermediates {
        n,
        k,
        max_pairwise_distance: max_tv,
        expected_collisions: ey,
        overlap_floor: pairs * 0.81 / n as f64,
        claimed_floor: CLAIMED_EXPECTATION_FLOOR,
        no_collision_bound: (1.0 + 72.0 * r2) / ey + 6.0 * r2 / 40.0,
        sufficient_expectation: (1.0 + 72.0 * r2) / slack,
    })
}

/// `K` distributions over `[n]`, all within `eps` of each other: a shared
/// random base `B` mixed as `(1 - eps) B + eps * delta_{x_i}`.
pub fn close_family<R: Rng + ?Sized>(n: usize, k: usize, eps: f64, rng: &mut R) -> Result<Vec<DiscreteDistribution>> {
    if n == 0 || !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(alloc::format!("n = {n}, eps = {eps}")));
    }
    let base: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.5).collect();
    let total: f64 = base.iter().sum();
    (0..k)
        .map(|_| {
            let spike = rng.random_range(0..n);
            let w = base
                .iter()
                .enumerate()
                .map(|(x, b)| (1.0 - eps) * b / total + if x == spike { eps } else { 0.0 })
                .collect();
            DiscreteDistribution::from_weights(w)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SortLemReport {
    pub r: f64,
    pub s: f64,
    pub holds: bool,
}

/// `r = e_3(p)`, `s = e_2(p)`; checks `r^2 <= 2 s^3`.
pub fn check_sortlem(p: &[f64]) -> SortLemReport {
    let (mut e1, mut e2, mut e3) = (0.0, 0.0, 0.0);
    for &x in p {
        e3 += x * e2;
        e2 += x * e1;
        e1 += x;
    }
    SortLemReport {
        r: e3,
        s: e2,
        holds: e3 * e3 <= 2.0 * e2 * e2 * e2 * (1.0 + 1e-12),
    }
}
