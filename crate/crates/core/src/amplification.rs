//! Two-qubit entanglement tools and the amplification protocol skeletons.
//!
//! Entanglement of formation is only computed at `2 ⊗ 2`, where the
//! concurrence gives it in closed form and PPT is an exact separability test.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::linalg::{binary_entropy, von_neumann_entropy, CMatrix, C64};
use crate::merlin::WitnessBundle;
use crate::state::{swap_test, StateVector};
use crate::stats::{binomial_tail, poisson_binomial_tail};
use crate::{Error, Result};

const DENSITY_TOL: f64 = 1e-10;
pub const PROJECTION_TOL: f64 = 1e-6;
pub const PROJECTION_MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitDensity {
    rho: CMatrix,
}

impl TwoQubitDensity {
    pub fn new(rho: CMatrix) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::UnsupportedDimension(rho.dim()));
        }
        let defect = rho.hermiticity_defect();
        if defect > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (defect {defect:e})")));
        }
        let rho = rho.hermitian_part();
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = rho.eigvalsh()[0];
        if min < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { rho })
    }

    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        if psi.dim() != 4 {
            return Err(Error::UnsupportedDimension(psi.dim()));
        }
        let amps: Vec<C64> = psi.amps().iter().map(|a| a / psi.norm()).collect();
        Self::new(CMatrix::outer(&amps))
    }

    pub fn maximally_mixed() -> Self {
        Self {
            rho: CMatrix::identity(4).scale(0.25),
        }
    }

    /// `(|00> + |11>) / sqrt 2`.
    pub fn bell() -> Self {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let psi = [
            C64::new(h, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(h, 0.0),
        ];
        Self {
            rho: CMatrix::outer(&psi),
        }
    }

    /// `p * Bell + (1 - p) * I/4`.
    pub fn werner(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("Werner weight {p}")));
        }
        Ok(Self::bell().mix(&Self::maximally_mixed(), p))
    }

    /// `G G^† / tr` for a complex Gaussian `4 x rank` matrix `G`.
    pub fn random<R: Rng + ?Sized>(rank: usize, rng: &mut R) -> Result<Self> {
        if !(1..=4).contains(&rank) {
            return Err(Error::InvalidParameter(format!("rank {rank}")));
        }
        let mut rho = CMatrix::zeros(4);
        for _ in 0..rank {
            let v = StateVector::random(4, rng);
            rho = rho.add(&CMatrix::outer(v.amps()));
        }
        Self::new(rho.scale(1.0 / rank as f64))
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Self {
        Self {
            rho: self.rho.scale(lambda).add(&other.rho.scale(1.0 - lambda)),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn trace_distance(&self, other: &Self) -> f64 {
        0.5 * self.rho.sub(&other.rho).trace_norm_hermitian()
    }

    /// Smallest eigenvalue of the partial transpose.
    pub fn partial_transpose_min_eigenvalue(&self) -> f64 {
        self.rho.partial_transpose_b(2, 2).eigvalsh()[0]
    }
}

/// `max(0, l1 - l2 - l3 - l4)` where `l_i` are the singular values of
/// `A = sqrt(rho) Y sqrt(rho)*`, `Y = σy ⊗ σy`; `A A^†` is the usual
/// `sqrt(rho) rho~ sqrt(rho)`. The singular values come from the Hermitian
/// dilation `[[0, A], [A^†, 0]]`, which avoids square roots of eigenvalue
/// noise.
pub fn concurrence(rho: &TwoQubitDensity) -> f64 {
    let sqrt_rho = rho.rho.hermitian_map(|x| if x > 1e-14 { x.sqrt() } else { 0.0 });
    let mut conj = CMatrix::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            conj[(i, j)] = sqrt_rho[(i, j)].conj();
        }
    }
    let a = sqrt_rho.mul(&spin_flip_real()).mul(&conj);
    let mut dil = CMatrix::zeros(8);
    for i in 0..4 {
        for j in 0..4 {
            dil[(i, 4 + j)] = a[(i, j)];
            dil[(4 + j, i)] = a[(i, j)].conj();
        }
    }
    let vals = dil.eigvalsh();
    let l: Vec<f64> = vals[4..].iter().rev().map(|x| x.max(0.0)).collect();
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

fn spin_flip_real() -> CMatrix {
    let mut y = CMatrix::zeros(4);
    for (i, s) in [-1.0, 1.0, 1.0, -1.0].into_iter().enumerate() {
        y[(i, 3 - i)] = C64::new(s, 0.0);
    }
    y
}

/// Entanglement of formation in bits.
pub fn ef_two_qubit(rho: &TwoQubitDensity) -> f64 {
    let c = concurrence(rho).min(1.0);
    binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0)
}

/// Von Neumann entropy of the reduced state of a pure `da ⊗ db` state.
pub fn entanglement_entropy(psi: &StateVector, da: usize, db: usize) -> Result<f64> {
    if da * db != psi.dim() {
        return Err(Error::DimensionMismatch {
            left: da * db,
            right: psi.dim(),
        });
    }
    let amps: Vec<C64> = psi.amps().iter().map(|a| a / psi.norm()).collect();
    Ok(von_neumann_entropy(&CMatrix::outer(&amps).partial_trace_b(da, db)))
}

pub fn ppt_separable(rho: &TwoQubitDensity) -> bool {
    rho.partial_transpose_min_eigenvalue() >= -DENSITY_TOL
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (i, x) in u.iter().enumerate() {
        acc += x;
        let t = (acc - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Frobenius projection of a Hermitian matrix onto density matrices.
fn project_density(x: &CMatrix) -> CMatrix {
    let (vals, vecs) = x.hermitian_part().eigh();
    let p = project_simplex(&vals);
    let mut out = CMatrix::zeros(x.dim());
    for (l, v) in p.iter().zip(&vecs) {
        if *l > 0.0 {
            out = out.add(&CMatrix::outer(v).scale(*l));
        }
    }
    out
}

/// Partial transpose is an involutive isometry, so projecting onto the
/// PPT set conjugates the density projection.
fn project_ppt(x: &CMatrix) -> CMatrix {
    project_density(&x.partial_transpose_b(2, 2)).partial_transpose_b(2, 2)
}

fn is_ppt_density(x: &CMatrix) -> bool {
    x.eigvalsh()[0] >= -DENSITY_TOL && x.partial_transpose_b(2, 2).eigvalsh()[0] >= -DENSITY_TOL
}

/// Smallest `t` in `[0, 1]` (to `1e-12`) such that `rho + t (target - rho)`
/// is a PPT density; `target` must itself be one.
fn shortest_segment(rho: &CMatrix, target: &CMatrix) -> f64 {
    let at = |t: f64| rho.scale(1.0 - t).add(&target.scale(t));
    if is_ppt_density(rho) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if is_ppt_density(&at(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, PartialEq)]
pub struct EflemReport {
    pub ef: f64,
    pub epsilon: f64,
    /// Trace distance to `certificate`, an upper bound on the distance to
    /// the separable set.
    pub distance: f64,
    pub bound: f64,
    pub certificate: TwoQubitDensity,
    pub iterations: usize,
}

impl EflemReport {
    pub fn holds(&self) -> bool {
        self.distance <= self.bound
    }
}

/// Searches for a separable state close to `rho` and compares its trace
/// distance against `sqrt(2 eps)`. Candidates come from Dykstra's
/// alternating projections onto densities and PPT operators, each pulled
/// back along the segment from `rho` to the first separable point, and from
/// mixing with the maximally mixed state.
pub fn check_eflem(rho: &TwoQubitDensity, eps: f64) -> Result<EflemReport> {
    let ef = ef_two_qubit(rho);
    if ef > eps {
        return Err(Error::Precondition(format!("E_F = {ef} exceeds eps = {eps}")));
    }
    let bound = (2.0 * eps).sqrt();
    let r = &rho.rho;
    let mixed = TwoQubitDensity::maximally_mixed();
    let mut best_t = shortest_segment(r, &mixed.rho);
    let mut best = r.scale(1.0 - best_t).add(&mixed.rho.scale(best_t));
    let mut best_dist = 0.5 * r.sub(&best).trace_norm_hermitian();

    let mut x = r.clone();
    let mut p = CMatrix::zeros(4);
    let mut q = CMatrix::zeros(4);
    let mut iterations = 0;
    if best_dist > 0.0 {
        while iterations < PROJECTION_MAX_ITERS {
            iterations += 1;
            let y = project_density(&x.add(&p));
            p = x.add(&p).sub(&y);
            let next = project_ppt(&y.add(&q));
            q = y.add(&q).sub(&next);
            let change = next.sub(&x).frobenius();
            x = next;
            if change < PROJECTION_TOL && y.sub(&x).frobenius() < PROJECTION_TOL {
                break;
            }
        }
        // Make the limit point strictly feasible, then walk back towards rho.
        let s = shortest_segment(&project_density(&x), &mixed.rho);
        let feasible = project_density(&x).scale(1.0 - s).add(&mixed.rho.scale(s));
        best_t = shortest_segment(r, &feasible);
        let cand = r.scale(1.0 - best_t).add(&feasible.scale(best_t));
        let d = 0.5 * r.sub(&cand).trace_norm_hermitian();
        if d < best_dist {
            best = cand;
            best_dist = d;
        }
    }
    Ok(EflemReport {
        ef,
        epsilon: eps,
        distance: best_dist,
        bound,
        certificate: TwoQubitDensity {
            rho: best.hermitian_part(),
        },
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoNReport {
    pub probability: f64,
    pub ef_before: f64,
    pub ef_after: f64,
    pub bound: f64,
}

impl TwoNReport {
    pub fn holds(&self) -> bool {
        self.ef_after <= self.ef_before + self.bound
    }
}

/// Rejects measurements with `sum E^† E` exceeding the identity.
pub fn validate_measurement(elements: &[CMatrix]) -> Result<()> {
    let d = elements.first().map_or(0, |e| e.dim());
    if elements.is_empty() || elements.iter().any(|e| e.dim() != d) {
        return Err(Error::InvalidParameter(
            "measurement elements must be non-empty and square of one size".into(),
        ));
    }
    let mut total = CMatrix::zeros(d);
    for e in elements {
        total = total.add(&e.adjoint().mul(e));
    }
    let slack = CMatrix::identity(d).sub(&total).hermitian_part().eigvalsh()[0];
    if slack < -DENSITY_TOL {
        return Err(Error::InvalidParameter(format!(
            "non-physical measurement: sum E^†E exceeds identity by {}",
            -slack
        )));
    }
    Ok(())
}

/// Each register holds `m` qubits (`m` = 1 or 2) in a pure product state.
/// The measurement acts on the first `n` qubits of each register; after
/// conditioning on `outcome`, the first qubit of each register is kept and
/// its entanglement of formation compared against `2n`.
pub fn check_2nlem(
    psi_a: &StateVector,
    psi_b: &StateVector,
    n: usize,
    elements: &[CMatrix],
    outcome: usize,
) -> Result<TwoNReport> {
    let m = match psi_a.dim() {
        2 => 1,
        4 => 2,
        d => return Err(Error::UnsupportedDimension(d)),
    };
    if psi_b.dim() != psi_a.dim() {
        return Err(Error::DimensionMismatch {
            left: psi_a.dim(),
            right: psi_b.dim(),
        });
    }
    if n == 0 || n > m {
        return Err(Error::InvalidParameter(format!("n = {n} with {m} qubits per register")));
    }
    validate_measurement(elements)?;
    if elements[0].dim() != 1 << (2 * n) {
        return Err(Error::DimensionMismatch {
            left: 1 << (2 * n),
            right: elements[0].dim(),
        });
    }
    let e = elements
        .get(outcome)
        .ok_or_else(|| Error::InvalidParameter(format!("outcome {outcome} of {}", elements.len())))?;
    let side = 1usize << m;
    let low = 1usize << (m - n);
    let high = 1usize << n;
    let idx = |ah: usize, al: usize, bh: usize, bl: usize| (ah * low + al) * side + bh * low + bl;
    let mut out = vec![C64::new(0.0, 0.0); side * side];
    for ah in 0..high {
        for bh in 0..high {
            for ah2 in 0..high {
                for bh2 in 0..high {
                    let k = e[(ah * high + bh, ah2 * high + bh2)];
                    if k == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for al in 0..low {
                        for bl in 0..low {
                            out[idx(ah, al, bh, bl)] += k * psi_a.amps()[ah2 * low + al] * psi_b.amps()[bh2 * low + bl];
                        }
                    }
                }
            }
        }
    }
    let scale = 1.0 / (psi_a.norm() * psi_b.norm()).powi(2);
    let probability = out.iter().map(|a| a.norm_sqr()).sum::<f64>() * scale;
    if probability <= 1e-14 {
        return Err(Error::Precondition(format!(
            "outcome {outcome} has probability {probability:e}"
        )));
    }
    // Keep the leading qubit of each register.
    let rest = side / 2;
    let mut sigma = CMatrix::zeros(4);
    for a1 in 0..2 {
        for b1 in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    let mut acc = C64::new(0.0, 0.0);
                    for ra in 0..rest {
                        for rb in 0..rest {
                            acc += out[(a1 * rest + ra) * side + b1 * rest + rb]
                                * out[(a2 * rest + ra) * side + b2 * rest + rb].conj();
                        }
                    }
                    sigma[(a1 * 2 + b1, a2 * 2 + b2)] = acc;
                }
            }
        }
    }
    let tr = sigma.trace().re;
    let sigma = TwoQubitDensity::new(sigma.scale(1.0 / tr))?;
    Ok(TwoNReport {
        probability,
        ef_before: 0.0,
        ef_after: ef_two_qubit(&sigma),
        bound: 2.0 * n as f64,
    })
}

/// Rank-one measurement `E_k = |e_k><f_k|` with `{f_k}` a random orthonormal
/// basis of dimension `d` and random unit output vectors `e_k`.
pub fn random_rank_one_measurement<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<CMatrix> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v = StateVector::random(d, rng).into_amps();
        for b in &basis {
            let ip: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= ip * bi;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
        .iter()
        .map(|f| {
            let e = StateVector::random(d, rng);
            let mut m = CMatrix::zeros(d);
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] = e.amps()[i] * f[j].conj();
                }
            }
            m
        })
        .collect()
}

/// Black-box verifier: acceptance probability on a tuple of `k` unentangled
/// witnesses of dimension `dim`.
pub trait AbstractVerifier {
    fn witness_count(&self) -> usize;
    fn witness_dim(&self) -> usize;
    fn accept_prob(&self, witnesses: &[StateVector]) -> Result<f64>;

    fn check_arity(&self, witnesses: &[StateVector]) -> Result<()> {
        if witnesses.len() != self.witness_count() {
            return Err(Error::LengthMismatch {
                expected: self.witness_count(),
                found: witnesses.len(),
            });
        }
        if let Some(w) = witnesses.iter().find(|w| w.dim() != self.witness_dim()) {
            return Err(Error::DimensionMismatch {
                left: self.witness_dim(),
                right: w.dim(),
            });
        }
        Ok(())
    }
}

type AcceptFn = Box<dyn Fn(&[StateVector]) -> f64 + Send + Sync>;

/// Verifier defined by a closure; outputs are clamped to `[0, 1]`.
pub struct FnVerifier {
    k: usize,
    dim: usize,
    f: AcceptFn,
}

impl FnVerifier {
    pub fn new(k: usize, dim: usize, f: impl Fn(&[StateVector]) -> f64 + Send + Sync + 'static) -> Self {
        Self { k, dim, f: Box::new(f) }
    }

    /// Accepts with a fixed probability regardless of the witnesses.
    pub fn constant(k: usize, dim: usize, p: f64) -> Self {
        Self::new(k, dim, move |_| p)
    }
}

impl core::fmt::Debug for FnVerifier {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FnVerifier")
            .field("k", &self.k)
            .field("dim", &self.dim)
            .finish()
    }
}

impl AbstractVerifier for FnVerifier {
    fn witness_count(&self) -> usize {
        self.k
    }
    fn witness_dim(&self) -> usize {
        self.dim
    }
    fn accept_prob(&self, witnesses: &[StateVector]) -> Result<f64> {
        self.check_arity(witnesses)?;
        Ok((self.f)(witnesses).clamp(0.0, 1.0))
    }
}

/// `m` parallel invocations, accepting iff at least `threshold = ceil(d m)`
/// of them accept.
#[derive(Debug)]
pub struct OneSided<V> {
    pub inner: V,
    pub a: f64,
    pub b: f64,
    pub p: u32,
    pub d: f64,
    pub m: usize,
    pub threshold: usize,
}

/// Picks `d` at the midpoint of `(a / (1 - (b - a)), b)` and
/// `m = ceil(p ln 2 / (2 (b - d)^2))`, the Hoeffding count for completeness
/// error `2^-p`.
pub fn one_sided_amplify<V: AbstractVerifier>(inner: V, a: f64, b: f64, p: u32) -> Result<OneSided<V>> {
    if !(0.0 <= a && a < b && b < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= a < b < 1, got a = {a}, b = {b}"
        )));
    }
    let lo = a / (1.0 - (b - a));
    let d = 0.5 * (lo + b);
    let m = ((p as f64 * core::f64::consts::LN_2) / (2.0 * (b - d).powi(2)))
        .ceil()
        .max(1.0) as usize;
    let threshold = ((d * m as f64) - 1e-9).ceil().max(0.0) as usize;
    Ok(OneSided {
        inner,
        a,
        b,
        p,
        d,
        m,
        threshold,
    })
}

impl<V: AbstractVerifier> OneSided<V> {
    /// Lower end of the admissible interval for `d`.
    pub fn d_lower(&self) -> f64 {
        self.a / (1.0 - (self.b - self.a))
    }

    pub fn decide(&self, accepted: usize) -> bool {
        accepted >= self.threshold
    }

    /// Exact acceptance when every invocation accepts independently with
    /// probability `q`.
    pub fn accept_prob_iid(&self, q: f64) -> f64 {
        binomial_tail(self.m, q, self.threshold)
    }

    /// Markov bound `a / d` on acceptance when each invocation accepts with
    /// probability at most `a`, however the invocations are correlated.
    pub fn markov_bound(&self) -> f64 {
        self.a / self.d
    }

    pub fn sample_iid<R: Rng + ?Sized>(&self, q: f64, rng: &mut R) -> Result<bool> {
        let count = Binomial::new(self.m as u64, q)
            .map_err(|e| Error::InvalidParameter(format!("{e}")))?
            .sample(rng);
        Ok(self.decide(count as usize))
    }
}

impl<V: AbstractVerifier> AbstractVerifier for OneSided<V> {
    fn witness_count(&self) -> usize {
        self.m * self.inner.witness_count()
    }
    fn witness_dim(&self) -> usize {
        self.inner.witness_dim()
    }
    /// Witnesses are `m` consecutive `k`-tuples.
    fn accept_prob(&self, witnesses: &[StateVector]) -> Result<f64> {
        self.check_arity(witnesses)?;
        let probs = witnesses
            .chunks(self.inner.witness_count())
            .map(|t| self.inner.accept_prob(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(poisson_binomial_tail(&probs, self.threshold))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SkeletonBranch {
    Swap,
    Inner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SkeletonVerdict {
    pub branch: SkeletonBranch,
    pub accepted: bool,
}

/// Two-prover simulation of a `k`-prover verifier: with probability 1/2 a
/// swap test between `A_i` and `B_i` for uniform `i`, otherwise the inner
/// verifier on bundle A.
pub fn k_to_two<V: AbstractVerifier + ?Sized, R: Rng + ?Sized>(
    a: &WitnessBundle,
    b: &WitnessBundle,
    inner: &V,
    rng: &mut R,
) -> Result<SkeletonVerdict> {
    if a.len() != b.len() || a.len() != inner.witness_count() {
        return Err(Error::LengthMismatch {
            expected: inner.witness_count(),
            found: if a.len() != b.len() { b.len() } else { a.len() },
        });
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    if rng.random_bool(0.5) {
        let i = rng.random_range(0..a.len());
        Ok(SkeletonVerdict {
            branch: SkeletonBranch::Swap,
            accepted: swap_test(a.get(i), b.get(i), rng)?,
        })
    } else {
        let p = inner.accept_prob(a.witnesses())?;
        Ok(SkeletonVerdict {
            branch: SkeletonBranch::Inner,
            accepted: rng.random_bool(p),
        })
    }
}

/// Exact rejection probability of the swap branch of [`k_to_two`].
pub fn k_to_two_swap_rejection(a: &WitnessBundle, b: &WitnessBundle) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in a.witnesses().iter().zip(b.witnesses()) {
        total += (1.0 - x.fidelity(y)?) / 2.0;
    }
    Ok(total / a.len() as f64)
}

/// Symmetric-promise removal: with probability 1/2 a swap test between the
/// first witness and a uniformly chosen other one, otherwise the inner
/// verifier on the bundle as sent.
pub fn sym_to_plain<V: AbstractVerifier + ?Sized, R: Rng + ?Sized>(
    bundle: &WitnessBundle,
    inner: &V,
    rng: &mut R,
) -> Result<SkeletonVerdict> {
    if bundle.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 witnesses, got {}",
            bundle.len()
        )));
    }
    if rng.random_bool(0.5) {
        let j = rng.random_range(1..bundle.len());
        Ok(SkeletonVerdict {
            branch: SkeletonBranch::Swap,
            accepted: swap_test(bundle.get(0), bundle.get(j), rng)?,
        })
    } else {
        let p = inner.accept_prob(bundle.witnesses())?;
        Ok(SkeletonVerdict {
            branch: SkeletonBranch::Inner,
            accepted: rng.random_bool(p),
        })
    }
}

/// Exact rejection probability of the swap branch of [`sym_to_plain`].
pub fn sym_swap_rejection(bundle: &WitnessBundle) -> Result<f64> {
    let mut total = 0.0;
    for w in &bundle.witnesses()[1..] {
        total += (1.0 - bundle.get(0).fidelity(w)?) / 2.0;
    }
    Ok(total / (bundle.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merlin::adversary_nonidentical;
    use crate::rng::seeded;
    use crate::stats::within_sigmas;
    use proptest::prelude::*;
    use rand::Rng;

    fn product(a: &StateVector, b: &StateVector) -> StateVector {
        let mut v = Vec::new();
        for x in a.amps() {
            for y in b.amps() {
                v.push(x * y);
            }
        }
        StateVector::normalized(v).unwrap()
    }

    #[test]
    fn density_validation() {
        assert!(matches!(
            TwoQubitDensity::new(CMatrix::identity(2)),
            Err(Error::UnsupportedDimension(2))
        ));
        assert!(TwoQubitDensity::new(CMatrix::identity(4)).is_err());
        let mut bad = CMatrix::identity(4).scale(0.25);
        bad[(0, 0)] = C64::new(-0.25, 0.0);
        bad[(1, 1)] = C64::new(0.75, 0.0);
        assert!(TwoQubitDensity::new(bad).is_err());
    }

    #[test]
    fn ef_examples() {
        let mut rng = seeded(1);
        let a = StateVector::random(2, &mut rng);
        let b = StateVector::random(2, &mut rng);
        let p = TwoQubitDensity::from_pure(&product(&a, &b)).unwrap();
        assert!(ef_two_qubit(&p) < 1e-7);
        assert!((ef_two_qubit(&TwoQubitDensity::bell()) - 1.0).abs() < 1e-12);
        assert_eq!(ef_two_qubit(&TwoQubitDensity::maximally_mixed()), 0.0);
    }

    #[test]
    fn ef_of_pure_states_is_entropy() {
        let mut rng = seeded(2);
        for _ in 0..1000 {
            let psi = StateVector::random(4, &mut rng);
            let ef = ef_two_qubit(&TwoQubitDensity::from_pure(&psi).unwrap());
            let s = entanglement_entropy(&psi, 2, 2).unwrap();
            assert!((ef - s).abs() < 1e-8, "{ef} vs {s}");
        }
    }

    #[test]
    fn ppt_examples() {
        assert!(ppt_separable(&TwoQubitDensity::maximally_mixed()));
        let bell = TwoQubitDensity::bell();
        assert!(!ppt_separable(&bell));
        assert!((bell.partial_transpose_min_eigenvalue() + 0.5).abs() < 1e-12);
        assert!(ppt_separable(&TwoQubitDensity::werner(0.33).unwrap()));
        assert!(!ppt_separable(&TwoQubitDensity::werner(0.34).unwrap()));
    }

    #[test]
    fn werner_threshold() {
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            if ppt_separable(&TwoQubitDensity::werner(mid).unwrap()) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 1.0 / 3.0).abs() < 1e-6, "{lo}");
    }

    #[test]
    fn ef_matches_ppt_on_random_densities() {
        let mut rng = seeded(3);
        for i in 0..2000 {
            let rho = TwoQubitDensity::random(1 + i % 4, &mut rng).unwrap();
            assert_eq!(ef_two_qubit(&rho) <= 1e-8, ppt_separable(&rho), "{rho:?}");
        }
    }

    #[test]
    fn convexity() {
        let mut rng = seeded(4);
        for _ in 0..500 {
            let r = TwoQubitDensity::random(rng.random_range(1..=4), &mut rng).unwrap();
            let s = TwoQubitDensity::random(rng.random_range(1..=4), &mut rng).unwrap();
            let l: f64 = rng.random();
            let lhs = ef_two_qubit(&r.mix(&s, l));
            assert!(lhs <= l * ef_two_qubit(&r) + (1.0 - l) * ef_two_qubit(&s) + 1e-9);
        }
    }

    #[test]
    fn eflem_examples() {
        let sep = TwoQubitDensity::werner(0.2).unwrap();
        let r = check_eflem(&sep, 0.01).unwrap();
        assert_eq!(r.distance, 0.0);
        let bell = check_eflem(&TwoQubitDensity::bell(), 1.0).unwrap();
        assert!(bell.holds() && bell.distance <= 1.0);
        assert!(ppt_separable(&bell.certificate));
        assert!(matches!(
            check_eflem(&TwoQubitDensity::bell(), 0.5),
            Err(Error::Precondition(_))
        ));
        for p in [0.34, 0.35, 0.4, 0.5] {
            let w = TwoQubitDensity::werner(p).unwrap();
            let r = check_eflem(&w, ef_two_qubit(&w)).unwrap();
            assert!(r.holds(), "{r:?}");
            // Nearest Werner separable point is at p = 1/3.
            assert!(r.distance <= 0.75 * (p - 1.0 / 3.0) + 1e-6, "{p}: {}", r.distance);
        }
    }

    #[test]
    fn twonlem_examples() {
        let mut rng = seeded(5);
        let a = StateVector::random(2, &mut rng);
        let b = StateVector::random(2, &mut rng);
        let r = check_2nlem(&a, &b, 1, &[CMatrix::identity(4)], 0).unwrap();
        assert!(r.ef_after < 1e-7 && r.holds());
        // Bell projection on one qubit of each two-qubit register.
        let a2 = StateVector::random(4, &mut rng);
        let b2 = StateVector::random(4, &mut rng);
        let bell = TwoQubitDensity::bell().matrix().clone();
        let rest = CMatrix::identity(4).sub(&bell);
        let r = check_2nlem(&a2, &b2, 1, &[bell.clone(), rest], 0).unwrap();
        assert!(r.holds() && r.bound == 2.0);
        let r = check_2nlem(&a2, &b2, 2, &[CMatrix::identity(16)], 0).unwrap();
        assert!(r.ef_after < 1e-7);
        assert!(check_2nlem(&a, &b, 1, &[CMatrix::identity(4).scale(1.1)], 0).is_err());
    }

    #[test]
    fn one_sided_parameters() {
        let amp = one_sided_amplify(FnVerifier::constant(1, 2, 1.0), 0.5, 0.9, 8).unwrap();
        assert!(amp.d_lower() < amp.d && amp.d < amp.b);
        assert!(amp.accept_prob_iid(0.9) >= 1.0 - 2f64.powi(-8));
        assert!(amp.accept_prob_iid(0.5) <= 1.0 - 0.4);
        assert!(amp.markov_bound() < 1.0 - 0.4);
        assert_eq!(amp.accept_prob_iid(1.0), 1.0);
        assert!(one_sided_amplify(FnVerifier::constant(1, 2, 1.0), 0.5, 1.0, 8).is_err());
        assert!(one_sided_amplify(FnVerifier::constant(1, 2, 1.0), 0.6, 0.5, 8).is_err());
    }

    #[test]
    fn one_sided_composed_verifier() {
        let amp = one_sided_amplify(FnVerifier::constant(1, 2, 1.0), 0.3, 0.6, 2).unwrap();
        let w = vec![StateVector::basis(2, 0).unwrap(); amp.witness_count()];
        assert_eq!(amp.accept_prob(&w).unwrap(), 1.0);
        assert!(amp.accept_prob(&w[1..]).is_err());
    }

    #[test]
    fn one_sided_sampled_rates() {
        let mut rng = seeded(6);
        let amp = one_sided_amplify(FnVerifier::constant(1, 2, 0.9), 0.5, 0.9, 8).unwrap();
        let trials = 20_000u64;
        let honest = (0..trials).filter(|_| amp.sample_iid(0.9, &mut rng).unwrap()).count() as u64;
        let cheat = (0..trials).filter(|_| amp.sample_iid(0.5, &mut rng).unwrap()).count() as u64;
        assert!(honest as f64 / trials as f64 >= 1.0 - 2f64.powi(-8) - 4.0 * (2f64.powi(-8) / trials as f64).sqrt());
        assert!((cheat as f64 / trials as f64) <= 0.6);
    }

    #[test]
    fn one_sided_correlated_invocations() {
        // Every invocation copies a single coin of bias a: expected accepting
        // count is still a m, and acceptance probability a <= a / d.
        let mut rng = seeded(7);
        let amp = one_sided_amplify(FnVerifier::constant(1, 2, 0.5), 0.5, 0.9, 4).unwrap();
        let trials = 20_000u64;
        let hits = (0..trials)
            .filter(|_| {
                let all = rng.random_bool(0.5);
                amp.decide(if all { amp.m } else { 0 })
            })
            .count() as u64;
        assert!(within_sigmas(hits, trials, 0.5, 4.0));
        assert!(0.5 <= amp.markov_bound());
    }

    #[test]
    fn skeleton_honest_swap_branch() {
        let mut rng = seeded(8);
        for k in 2..=4 {
            let w: Vec<StateVector> = (0..k).map(|_| StateVector::random(4, &mut rng)).collect();
            let a = WitnessBundle::new(w.clone()).unwrap();
            assert_eq!(k_to_two_swap_rejection(&a, &a).unwrap(), 0.0);
            let inner = FnVerifier::constant(k, 4, 1.0);
            for _ in 0..2000 {
                let v = k_to_two(&a, &a, &inner, &mut rng).unwrap();
                assert!(v.accepted);
            }
            let sym = WitnessBundle::new(vec![w[0].clone(); k]).unwrap();
            assert_eq!(sym_swap_rejection(&sym).unwrap(), 0.0);
            for _ in 0..2000 {
                assert!(sym_to_plain(&sym, &inner, &mut rng).unwrap().accepted);
            }
        }
    }

    #[test]
    fn skeleton_cheating_swap_branch() {
        let mut rng = seeded(9);
        for k in 2..=4 {
            let base = StateVector::random(8, &mut rng);
            let a = WitnessBundle::new(vec![base.clone(); k]).unwrap();
            let b = adversary_nonidentical(&base, 0.3, k, &mut rng).unwrap();
            let eps2: f64 = b
                .witnesses()
                .iter()
                .map(|w| 1.0 - w.fidelity(&base).unwrap())
                .sum::<f64>()
                * 0.999;
            let exact = k_to_two_swap_rejection(&a, &b).unwrap();
            assert!(exact > eps2 / (2.0 * k as f64));
            let inner = FnVerifier::constant(k, 8, 1.0);
            let (mut swaps, mut rejects) = (0u64, 0u64);
            for _ in 0..40_000 {
                let v = k_to_two(&a, &b, &inner, &mut rng).unwrap();
                if v.branch == SkeletonBranch::Swap {
                    swaps += 1;
                    rejects += u64::from(!v.accepted);
                }
            }
            assert!(within_sigmas(swaps, 40_000, 0.5, 4.0));
            assert!(within_sigmas(rejects, swaps, exact, 4.0));
        }
    }

    #[test]
    fn sym_to_plain_reproducible() {
        let mut rng = seeded(10);
        let b = WitnessBundle::new((0..3).map(|_| StateVector::random(4, &mut rng)).collect()).unwrap();
        let inner = FnVerifier::constant(3, 4, 0.5);
        let run = |seed| {
            let mut r = seeded(seed);
            (0..100)
                .map(|_| sym_to_plain(&b, &inner, &mut r).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(11), run(11));
        let single = WitnessBundle::new(vec![b.get(0).clone()]).unwrap();
        assert!(sym_to_plain(&single, &FnVerifier::constant(1, 4, 1.0), &mut rng).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn twonlem_random_rank_one(seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let a = StateVector::random(2, &mut rng);
            let b = StateVector::random(2, &mut rng);
            let meas = random_rank_one_measurement(4, &mut rng);
            validate_measurement(&meas).unwrap();
            let outcome = rng.random_range(0..4);
            if let Ok(r) = check_2nlem(&a, &b, 1, &meas, outcome) {
                prop_assert!(r.holds());
            }
        }

        #[test]
        fn eflem_low_ef(seed in any::<u64>(), p in 0.3334f64..0.5) {
            let mut rng = seeded(seed);
            // Werner-like state rotated by a random local unitary.
            let w = TwoQubitDensity::werner(p).unwrap();
            let noise = TwoQubitDensity::random(4, &mut rng).unwrap();
            let rho = w.mix(&noise, 0.9);
            let ef = ef_two_qubit(&rho);
            let r = check_eflem(&rho, ef.max(1e-12)).unwrap();
            prop_assert!(r.holds(), "{:?}", r);
        }
    }
}
