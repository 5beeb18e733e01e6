//! Dense complex matrices at the sizes the entanglement checks need.
//!
//! Hermitian eigenproblems go through the real symmetric embedding
//! `[[Re, -Im], [Im, Re]]`, diagonalized by cyclic Jacobi. Every eigenvalue
//! of the embedding appears twice; one copy of each pair is kept.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

pub type C64 = Complex64;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), n * n, "row-major data must have n*n entries");
        CMatrix { n, data }
    }

    /// `|v><v|`.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Largest entrywise distance from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Average with the adjoint.
    pub fn hermitian_part(&self) -> CMatrix {
        self.add(&self.adjoint()).scale(0.5)
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Kronecker product.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (a, b) = (self.n, other.n);
        let mut out = Self::zeros(a * b);
        for i in 0..a {
            for j in 0..a {
                for k in 0..b {
                    for l in 0..b {
                        out[(i * b + k, j * b + l)] = self[(i, j)] * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Transpose of the second tensor factor of a `da ⊗ db` operator.
    pub fn partial_transpose_b(&self, da: usize, db: usize) -> CMatrix {
        assert_eq!(da * db, self.n);
        let mut out = Self::zeros(self.n);
        for i in 0..da {
            for j in 0..da {
                for k in 0..db {
                    for l in 0..db {
                        out[(i * db + l, j * db + k)] = self[(i * db + k, j * db + l)];
                    }
                }
            }
        }
        out
    }

    /// Trace out the second factor of a `da ⊗ db` operator.
    pub fn partial_trace_b(&self, da: usize, db: usize) -> CMatrix {
        assert_eq!(da * db, self.n);
        let mut out = Self::zeros(da);
        for i in 0..da {
            for j in 0..da {
                out[(i, j)] = (0..db).map(|k| self[(i * db + k, j * db + k)]).sum();
            }
        }
        out
    }

    /// Trace out the first factor of a `da ⊗ db` operator.
    pub fn partial_trace_a(&self, da: usize, db: usize) -> CMatrix {
        assert_eq!(da * db, self.n);
        let mut out = Self::zeros(db);
        for k in 0..db {
            for l in 0..db {
                out[(k, l)] = (0..da).map(|i| self[(i * db + k, i * db + l)]).sum();
            }
        }
        out
    }

    /// Eigen-decomposition of a Hermitian matrix. Eigenvalues ascending,
    /// eigenvectors as columns in the same order.
    pub fn eigh(&self) -> (Vec<f64>, Vec<Vec<C64>>) {
        let n = self.n;
        let m = 2 * n;
        let mut a = vec![0.0; m * m];
        let h = self.hermitian_part();
        for i in 0..n {
            for j in 0..n {
                let z = h[(i, j)];
                a[i * m + j] = z.re;
                a[(i + n) * m + (j + n)] = z.re;
                a[i * m + (j + n)] = -z.im;
                a[(i + n) * m + j] = z.im;
            }
        }
        let (vals, vecs) = jacobi_symmetric(m, a);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&x, &y| vals[x].total_cmp(&vals[y]));

        // Pick n vectors greedily, skipping those (nearly) in the span of
        // already accepted complex vectors; each eigenvalue is doubled in the
        // embedding as (u, v) and (-v, u), which span the same complex line.
        let mut out_vals = Vec::with_capacity(n);
        let mut out_vecs: Vec<Vec<C64>> = Vec::with_capacity(n);
        for &c in &order {
            if out_vecs.len() == n {
                break;
            }
            let mut z: Vec<C64> = (0..n)
                .map(|i| C64::new(vecs[i * m + c], vecs[(i + n) * m + c]))
                .collect();
            for u in &out_vecs {
                let ov: C64 = u.iter().zip(&z).map(|(a, b)| a.conj() * b).sum();
                for (zi, ui) in z.iter_mut().zip(u) {
                    *zi -= ov * ui;
                }
            }
            let norm = z.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            // Within a d-fold degenerate block some remaining vector keeps
            // at least 1/sqrt(d) of its norm, so this never starves.
            if norm < 0.9 / (n as f64).sqrt() {
                continue;
            }
            for zi in z.iter_mut() {
                *zi /= norm;
            }
            out_vals.push(vals[c]);
            out_vecs.push(z);
        }
        debug_assert_eq!(out_vecs.len(), n);
        (out_vals, out_vecs)
    }

    pub fn eigvalsh(&self) -> Vec<f64> {
        self.eigh().0
    }

    /// Apply `f` to the spectrum of a Hermitian matrix.
    pub fn hermitian_map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let (vals, vecs) = self.eigh();
        let mut out = Self::zeros(self.n);
        for (lam, v) in vals.iter().zip(&vecs) {
            out = out.add(&Self::outer(v).scale(f(*lam)));
        }
        out
    }

    /// Trace norm of a Hermitian matrix.
    pub fn trace_norm_hermitian(&self) -> f64 {
        self.eigvalsh().iter().map(|l| l.abs()).sum()
    }
}

impl core::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// Cyclic Jacobi for a real symmetric `m x m` matrix (row-major). Returns the
/// eigenvalues and the eigenvector matrix (eigenvectors in columns).
pub fn jacobi_symmetric(m: usize, mut a: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; m * m];
    for i in 0..m {
        v[i * m + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * m + j] * a[i * m + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p * m + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
                for k in 0..m {
                    let vkp = v[k * m + p];
                    let vkq = v[k * m + q];
                    v[k * m + p] = c * vkp - s * vkq;
                    v[k * m + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..m).map(|i| a[i * m + i]).collect(), v)
}

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// Von Neumann entropy in bits of a Hermitian PSD matrix.
pub fn von_neumann_entropy(rho: &CMatrix) -> f64 {
    rho.eigvalsh()
        .into_iter()
        .filter(|&l| l > 1e-15)
        .map(|l| -l * l.log2())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn arb_hermitian(n: usize) -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
            let m = CMatrix::from_rows(n, v.into_iter().map(|(a, b)| c(a, b)).collect());
            m.hermitian_part()
        })
    }

    #[test]
    fn diagonal_and_pauli_y() {
        let mut d = CMatrix::zeros(3);
        d[(0, 0)] = c(3.0, 0.0);
        d[(1, 1)] = c(-1.0, 0.0);
        d[(2, 2)] = c(2.0, 0.0);
        let vals = d.eigvalsh();
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[2] - 3.0).abs() < 1e-12);

        let y = CMatrix::from_rows(2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let (vals, vecs) = y.eigh();
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
        let yv = y.apply(&vecs[1]);
        for (a, b) in yv.iter().zip(&vecs[1]) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_operations_on_product() {
        let a = CMatrix::outer(&[c(0.6, 0.0), c(0.0, 0.8)]);
        let b = CMatrix::outer(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let ab = a.kron(&b);
        assert!(ab.partial_trace_b(2, 2).sub(&a).frobenius() < 1e-14);
        assert!(ab.partial_trace_a(2, 2).sub(&b).frobenius() < 1e-14);
        // Partial transpose of a product transposes the B factor only.
        let bt = CMatrix::outer(&[c(0.6, 0.0), c(0.0, 0.8)]);
        let pt = b.kron(&bt).partial_transpose_b(2, 2);
        let expected = {
            let mut t = CMatrix::zeros(2);
            for i in 0..2 {
                for j in 0..2 {
                    t[(i, j)] = bt[(j, i)];
                }
            }
            b.kron(&t)
        };
        assert!(pt.sub(&expected).frobenius() < 1e-14);
    }

    #[test]
    fn degenerate_spectrum_keeps_full_basis() {
        let (vals, vecs) = CMatrix::identity(4).eigh();
        assert_eq!(vals.len(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let ov: C64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a.conj() * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ov - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn entropies() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert!((von_neumann_entropy(&CMatrix::identity(4).scale(0.25)) - 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn eigh_reconstructs(m in arb_hermitian(4)) {
            let (vals, vecs) = m.eigh();
            prop_assert_eq!(vals.len(), 4);
            let mut r = CMatrix::zeros(4);
            for (l, v) in vals.iter().zip(&vecs) {
                r = r.add(&CMatrix::outer(v).scale(*l));
            }
            prop_assert!(r.sub(&m).frobenius() < 1e-10);
            for w in vals.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            let tr: f64 = vals.iter().sum();
            prop_assert!((tr - m.trace().re).abs() < 1e-10);
        }

        #[test]
        fn hermitian_map_square_root(m in arb_hermitian(4)) {
            let psd = m.mul(&m);
            let root = psd.hermitian_map(|l| l.max(0.0).sqrt());
            prop_assert!(root.mul(&root).sub(&psd).frobenius() < 1e-8);
        }
    }
}
