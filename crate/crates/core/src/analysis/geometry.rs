use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;

use crate::{Error, Result};

/// Number of unit vectors probed when checking that a family is far from
/// every unit vector.
pub const FAR_GRID_POINTS: usize = 10_000;

/// A certified lower bound on `min_w sum_v |v - w| / |V|` over unit `w`.
///
/// The sum is `|V|`-Lipschitz in the arc position of `w`, so the grid
/// minimum minus `|V| * pi / grid` is a guaranteed lower bound.
pub fn far_from_unit_vectors(v: &[Complex64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for g in 0..FAR_GRID_POINTS {
        let w = Complex64::from_polar(1.0, TAU * g as f64 / FAR_GRID_POINTS as f64);
        let s: f64 = v.iter().map(|x| (x - w).norm()).sum();
        best = best.min(s);
    }
    best / v.len() as f64 - PI / FAR_GRID_POINTS as f64
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SectorSplit {
    pub sectors: usize,
    pub densest: usize,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    /// Smallest distance between a vector of `X` and one of `Y`.
    pub min_distance: f64,
    pub size_bound: f64,
    pub distance_bound: f64,
}

impl SectorSplit {
    pub fn holds(&self) -> bool {
        self.x.len() as f64 >= self.size_bound
            && self.y.len() as f64 >= self.size_bound
            && self.min_distance >= self.distance_bound
    }
}

fn sector_of(v: Complex64, k: usize) -> usize {
    let mut a = v.im.atan2(v.re);
    if a < 0.0 {
        a += TAU;
    }
    ((a / TAU * k as f64) as usize).min(k - 1)
}

/// Cuts the plane into `ceil(30/kappa)` equal half-open sectors; `X` is the
/// densest sector, `Y` everything outside it and its two neighbours.
///
/// Preconditions: norms in `[1 - delta, 1 + delta]`, `delta <= kappa / 2`,
/// and the family is `kappa`-far from every unit vector.
pub fn sector_split(v: &[Complex64], kappa: f64, delta: f64) -> Result<SectorSplit> {
    if v.is_empty() || !(kappa > 0.0 && kappa <= 2.0) || delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "|V| = {}, kappa = {kappa}, delta = {delta}",
            v.len()
        )));
    }
    if delta > kappa / 2.0 {
        return Err(Error::Precondition(format!("delta = {delta} exceeds kappa / 2")));
    }
    if let Some(x) = v.iter().find(|x| (x.norm() - 1.0).abs() > delta) {
        return Err(Error::Precondition(format!(
            "vector of norm {} outside 1 +- {delta}",
            x.norm()
        )));
    }
    let far = far_from_unit_vectors(v);
    if far < kappa {
        return Err(Error::Precondition(format!(
            "family is only certified {far:.6}-far, not {kappa}-far"
        )));
    }
    let k = (30.0 / kappa).ceil() as usize;
    let sectors: Vec<usize> = v.iter().map(|&x| sector_of(x, k)).collect();
    let mut counts = vec![0usize; k];
    for &s in &sectors {
        counts[s] += 1;
    }
    let densest = (0..k).max_by_key(|&s| (counts[s], core::cmp::Reverse(s))).unwrap();
    let near = [densest, (densest + 1) % k, (densest + k - 1) % k];
    let x: Vec<usize> = (0..v.len()).filter(|&i| sectors[i] == densest).collect();
    let y: Vec<usize> = (0..v.len()).filter(|&i| !near.contains(&sectors[i])).collect();
    let mut min_distance = f64::INFINITY;
    for &i in &x {
        for &j in &y {
            min_distance = min_distance.min((v[i] - v[j]).norm());
        }
    }
    let n = v.len() as f64;
    Ok(SectorSplit {
        sectors: k,
        densest,
        x,
        y,
        min_distance,
        size_bound: kappa * n / 40.0,
        distance_bound: kappa / 20.0,
    })
}

/// Random clustered family with norms in `1 +- delta`, together with an
/// admissible `kappa` (between `2 delta` and the certified farness), or
/// `None` when the draw is not far enough to admit one.
pub fn random_far_family<R: Rng + ?Sized>(rng: &mut R) -> Option<(Vec<Complex64>, f64, f64)> {
    let n = rng.random_range(4..80);
    let clusters = rng.random_range(2..6);
    let centers: Vec<f64> = (0..clusters).map(|_| rng.random_range(0.0..TAU)).collect();
    let spread = rng.random_range(0.0..1.0);
    let delta = rng.random_range(0.0..0.2);
    let v: Vec<Complex64> = (0..n)
        .map(|_| {
            let c = centers[rng.random_range(0..clusters)];
            let r = 1.0 + rng.random_range(-delta..=delta);
            Complex64::from_polar(r, c + spread * rng.random_range(-1.0..1.0))
        })
        .collect();
    let far = far_from_unit_vectors(&v);
    if far < 2.0 * delta || far <= 0.0 {
        return None;
    }
    let kappa = rng.random_range((2.0 * delta).max(far * 0.01)..=far);
    Some((v, kappa, delta))
}
