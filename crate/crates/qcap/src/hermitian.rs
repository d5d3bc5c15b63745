//! Dense complex-matrix kernel: Hermitian eigendecomposition (cyclic Jacobi),
//! matrix functions on the eigenbasis, tensor algebra, partial trace, and
//! Löwner-order comparisons.
//!
//! Everything operates on small dense matrices (dims up to a few hundred);
//! matrices are immutable values and all operations return fresh matrices.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{QcapError, Result};

pub type C64 = Complex<f64>;

/// Default cap on the dimension produced by tensor products (2^12).
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Relative kernel threshold: eigenvalues below `KERNEL_THRESHOLD * max|λ|`
/// are treated as part of the kernel when deciding supports.
pub const KERNEL_THRESHOLD: f64 = 1e-12;

/// Square complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            dim: self.dim,
            entries: self.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        if raw.dim == 0 || raw.entries.len() != raw.dim * raw.dim {
            return Err(serde::de::Error::custom(format!(
                "matrix must be square with dim >= 1; dim = {}, {} entries",
                raw.dim,
                raw.entries.len()
            )));
        }
        if raw.entries.iter().any(|[re, im]| !re.is_finite() || !im.is_finite()) {
            return Err(serde::de::Error::custom("non-finite matrix entry"));
        }
        Ok(ComplexMatrix {
            dim: raw.dim,
            entries: raw.entries.iter().map(|&[re, im]| C64::new(re, im)).collect(),
        })
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dim must be >= 1");
        Self { dim, entries: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// Rank-1 projector |v⟩⟨v| / ⟨v|v⟩.
    pub fn projector(v: &[C64]) -> Self {
        let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert!(norm_sq > 0.0, "projector of zero vector");
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj() / norm_sq)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| z * c).collect() }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        out
    }

    /// Apply to a column vector.
    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.entries[i * n + j] * v[j]).sum())
            .collect()
    }

    /// ⟨v| M |v⟩ for a column vector v.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let mv = self.matvec(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Max-norm of M - M†.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                dev = dev.max(d);
            }
        }
        dev
    }

    /// Entrywise max norm.
    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_norm_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_norm()
    }

    /// (M + M†)/2.
    pub fn symmetrized(&self) -> Self {
        self.add(&self.dagger()).scale_re(0.5)
    }

    /// Re Tr(AB); exact trace inner product for Hermitian A, B.
    pub fn trace_product_re(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let p = self.entries[i * n + j] * other.entries[j * n + i];
                acc += p.re;
            }
        }
        acc
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.dim + j]
    }
}

/// Eigendecomposition of a Hermitian matrix: U diag(λ) U† reconstructs the
/// input; eigenvalues are in non-decreasing order.
#[derive(Debug, Clone)]
pub struct HermitianEigensystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigensystem {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_to_eigenvalues(|x| x)
    }

    /// U f(diag(λ)) U†.
    pub fn apply_to_eigenvalues(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let u = &self.eigenvectors;
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| u[(i, k)] * vals[k] * u[(j, k)].conj()).sum()
        })
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Absolute eigenvalue cutoff below which the eigenvector counts as kernel.
    pub fn kernel_cutoff(&self) -> f64 {
        let scale = self.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
        KERNEL_THRESHOLD * scale
    }
}

const MAX_JACOBI_SWEEPS: usize = 128;

/// Cyclic Jacobi eigensolver for Hermitian matrices. The input is
/// symmetrized ((m + m†)/2) before the sweeps.
pub fn eig_hermitian(m: &ComplexMatrix, hermiticity_tol: f64) -> Result<HermitianEigensystem> {
    let dev = m.hermiticity_deviation();
    if dev > hermiticity_tol {
        return Err(QcapError::NotHermitian { deviation: dev, tol: hermiticity_tol });
    }
    let n = m.dim();
    let mut a = m.symmetrized();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.max_norm().max(1e-300);

    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-18 * scale {
                    continue;
                }
                let phase = apq / r; // e^{iφ}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = phase * s; // s e^{iφ}
                let spc = phase.conj() * s; // s e^{-iφ}

                // Column update: A <- A R
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c - aiq * spc;
                    a[(i, q)] = aip * sp + aiq * c;
                }
                // Row update: A <- R† A
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c - aqj * sp;
                    a[(q, j)] = apj * spc + aqj * c;
                }
                // Accumulate V <- V R
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * spc;
                    v[(i, q)] = vip * sp + viq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigensystem { eigenvalues, eigenvectors })
}

/// Scalar functions liftable to Hermitian matrices through the eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFunction {
    Log,
    Pow(f64),
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPolicy {
    /// Eigenvalues inside the kernel cutoff map to 0 (support-restricted
    /// log and powers).
    ZeroOnKernel,
    /// Fail when log or a negative power hits the kernel.
    Error,
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn matrix_function(
    m: &ComplexMatrix,
    f: MatrixFunction,
    kernel_policy: KernelPolicy,
) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(m, 1e-9)?;
    let cutoff = eig.kernel_cutoff();
    let needs_definite = match f {
        MatrixFunction::Log => true,
        MatrixFunction::Pow(p) => p < 0.0,
        MatrixFunction::Abs => false,
    };
    if needs_definite {
        for &lam in &eig.eigenvalues {
            if lam <= cutoff {
                match kernel_policy {
                    KernelPolicy::Error => {
                        return Err(QcapError::SingularMatrix { eigenvalue: lam })
                    }
                    KernelPolicy::ZeroOnKernel => {}
                }
            }
        }
    }
    let out = eig.apply_to_eigenvalues(|lam| {
        if lam.abs() <= cutoff {
            match f {
                // zero-on-kernel: supp-restricted function
                MatrixFunction::Log | MatrixFunction::Pow(_) => 0.0,
                MatrixFunction::Abs => 0.0,
            }
        } else {
            match f {
                MatrixFunction::Log => {
                    if lam <= 0.0 {
                        0.0 // negative part is outside the support by convention
                    } else {
                        lam.ln()
                    }
                }
                MatrixFunction::Pow(p) => {
                    if lam < 0.0 && p.fract() != 0.0 {
                        // fractional power of a negative eigenvalue: clamp to
                        // the support (callers guarantee PSD inputs)
                        0.0
                    } else {
                        lam.powf(p)
                    }
                }
                MatrixFunction::Abs => lam.abs(),
            }
        }
    });
    Ok(out)
}

/// Kronecker product; fails if the product dimension exceeds `cap`.
pub fn tensor_product_with_cap(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    cap: usize,
) -> Result<ComplexMatrix> {
    let dim = a
        .dim()
        .checked_mul(b.dim())
        .ok_or(QcapError::DimensionOverflow { dim: usize::MAX, cap })?;
    if dim > cap {
        return Err(QcapError::DimensionOverflow { dim, cap });
    }
    let db = b.dim();
    Ok(ComplexMatrix::from_fn(dim, |i, j| {
        a[(i / db, j / db)] * b[(i % db, j % db)]
    }))
}

pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    tensor_product_with_cap(a, b, DEFAULT_DIM_CAP)
}

/// Trace over the subsystems not listed in `keep`. `dims` are the subsystem
/// dimensions in tensor order; `keep` is a set of subsystem indices.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if total != m.dim() || dims.iter().any(|&d| d == 0) {
        return Err(QcapError::BadFactorization { dim: m.dim(), dims: dims.to_vec() });
    }
    let k = dims.len();
    let keep_mask: Vec<bool> = (0..k).map(|i| keep.contains(&i)).collect();
    let kept_dim: usize = (0..k).filter(|&i| keep_mask[i]).map(|i| dims[i]).product();
    let traced_dim: usize = total / kept_dim;

    // Strides of each subsystem in the flat index.
    let mut strides = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let kept: Vec<usize> = (0..k).filter(|&i| keep_mask[i]).collect();
    let traced: Vec<usize> = (0..k).filter(|&i| !keep_mask[i]).collect();

    let decode = |flat: usize, subsys: &[usize]| -> usize {
        // flat index within the listed subsystems -> full-space offset
        let mut rem = flat;
        let mut offset = 0usize;
        for &s in subsys {
            let sub_rest: usize = subsys
                .iter()
                .skip_while(|&&x| x != s)
                .skip(1)
                .map(|&x| dims[x])
                .product();
            let digit = rem / sub_rest;
            rem %= sub_rest;
            offset += digit * strides[s];
        }
        offset
    };

    let mut out = ComplexMatrix::zeros(kept_dim.max(1));
    for i in 0..kept_dim {
        let oi = decode(i, &kept);
        for j in 0..kept_dim {
            let oj = decode(j, &kept);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..traced_dim {
                let ot = decode(t, &traced);
                acc += m[(oi + ot, oj + ot)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Löwner order check: a ⪯ b iff min eigenvalue of (b - a) ≥ -tol.
pub fn loewner_leq(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    assert_eq!(a.dim(), b.dim(), "loewner_leq dimension mismatch");
    let diff = b.sub(a);
    match eig_hermitian(&diff, 1e-8) {
        Ok(eig) => eig.min_eigenvalue() >= -tol,
        Err(_) => false,
    }
}

/// Half the trace norm of (a - b); both arguments Hermitian.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let eig = eig_hermitian(&a.sub(b), 1e-8).expect("trace_distance of non-Hermitian pair");
    0.5 * eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>()
}

/// Random Hermitian matrix with Gaussian entries (test and probe helper).
pub fn random_hermitian(dim: usize, rng: &mut impl rand::Rng) -> ComplexMatrix {
    use rand_distr_normal::standard_normal;
    let g = ComplexMatrix::from_fn(dim, |_, _| {
        C64::new(standard_normal(rng), standard_normal(rng))
    });
    g.symmetrized()
}

/// Random pure state (unitarily invariant: normalized complex Gaussian).
pub fn random_pure_state(dim: usize, rng: &mut impl rand::Rng) -> Vec<C64> {
    use rand_distr_normal::standard_normal;
    loop {
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(standard_normal(rng), standard_normal(rng)))
            .collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

mod rand_distr_normal {
    // Box-Muller; avoids pulling in rand_distr for one distribution.
    pub fn standard_normal(rng: &mut impl rand::Rng) -> f64 {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, |i, j| {
            if i != j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
        })
    }

    #[test]
    fn eig_identity() {
        let eig = eig_hermitian(&ComplexMatrix::identity(2), 1e-12).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_pauli_x() {
        let eig = eig_hermitian(&pauli_x(), 1e-12).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-12);
        // eigenvectors are (|0⟩∓|1⟩)/√2 up to phase
        for k in 0..2 {
            let ratio = eig.eigenvectors[(1, k)] / eig.eigenvectors[(0, k)];
            let expected = if k == 0 { -1.0 } else { 1.0 };
            assert!((ratio.re - expected).abs() < 1e-10 && ratio.im.abs() < 1e-10);
        }
    }

    #[test]
    fn eig_diagonal() {
        let eig = eig_hermitian(&ComplexMatrix::diag(&[0.7, 0.3]), 1e-12).unwrap();
        assert!((eig.eigenvalues[0] - 0.3).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 0.7).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            eig_hermitian(&m, 1e-10),
            Err(QcapError::NotHermitian { .. })
        ));
    }

    #[test]
    fn eig_roundtrip_random() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for trial in 0..1000 {
            let dim = 1 + (trial % 64);
            let m = random_hermitian(dim, &mut rng);
            let eig = eig_hermitian(&m, 1e-9).unwrap();
            let recon = eig.reconstruct();
            assert!(
                recon.max_norm_diff(&m) <= 1e-10 * dim as f64,
                "roundtrip failed at dim {dim}"
            );
            // unitarity of U
            let u = &eig.eigenvectors;
            let utu = u.dagger().matmul(u);
            assert!(utu.max_norm_diff(&ComplexMatrix::identity(dim)) <= 1e-10 * dim as f64);
            // non-decreasing
            for w in eig.eigenvalues.windows(2) {
                assert!(w[0] <= w[1] + 1e-13);
            }
        }
    }

    #[test]
    fn matrix_function_examples() {
        let log_i = matrix_function(
            &ComplexMatrix::identity(2),
            MatrixFunction::Log,
            KernelPolicy::ZeroOnKernel,
        )
        .unwrap();
        assert!(log_i.max_norm() < 1e-12);

        let m = ComplexMatrix::diag(&[std::f64::consts::E, std::f64::consts::E.powi(2)]);
        let lm = matrix_function(&m, MatrixFunction::Log, KernelPolicy::ZeroOnKernel).unwrap();
        assert!(lm.max_norm_diff(&ComplexMatrix::diag(&[1.0, 2.0])) < 1e-12);

        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let h = random_hermitian(4, &mut rng);
        let p1 = matrix_function(&h, MatrixFunction::Pow(1.0), KernelPolicy::ZeroOnKernel).unwrap();
        assert!(p1.max_norm_diff(&h) < 1e-10);
    }

    #[test]
    fn matrix_function_singular_errors() {
        let m = ComplexMatrix::diag(&[1.0, 0.0]);
        assert!(matches!(
            matrix_function(&m, MatrixFunction::Pow(-1.0), KernelPolicy::Error),
            Err(QcapError::SingularMatrix { .. })
        ));
        assert!(matrix_function(&m, MatrixFunction::Log, KernelPolicy::ZeroOnKernel).is_ok());
    }

    #[test]
    fn sqrt_then_square_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..50 {
            let g = random_hermitian(5, &mut rng);
            let psd = g.matmul(&g); // PSD
            let half =
                matrix_function(&psd, MatrixFunction::Pow(0.5), KernelPolicy::ZeroOnKernel)
                    .unwrap();
            let back =
                matrix_function(&half, MatrixFunction::Pow(2.0), KernelPolicy::ZeroOnKernel)
                    .unwrap();
            assert!(back.max_norm_diff(&psd) < 1e-9 * psd.max_norm().max(1.0));
        }
    }

    #[test]
    fn tensor_examples() {
        let i2 = ComplexMatrix::identity(2);
        let i4 = tensor_product(&i2, &i2).unwrap();
        assert!(i4.max_norm_diff(&ComplexMatrix::identity(4)) < 1e-15);

        let a = ComplexMatrix::diag(&[1.0, 0.0]);
        let b = ComplexMatrix::diag(&[0.0, 1.0]);
        let ab = tensor_product(&a, &b).unwrap();
        assert!(ab.max_norm_diff(&ComplexMatrix::diag(&[0.0, 1.0, 0.0, 0.0])) < 1e-15);

        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..20 {
            let a = random_hermitian(3, &mut rng);
            let b = random_hermitian(4, &mut rng);
            let t = tensor_product(&a, &b).unwrap();
            let lhs = t.trace();
            let rhs = a.trace() * b.trace();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn tensor_associativity() {
        // Complex float multiplication is not exactly associative, so compare
        // up to rounding.
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let c = random_hermitian(2, &mut rng);
        let left = tensor_product(&tensor_product(&a, &b).unwrap(), &c).unwrap();
        let right = tensor_product(&a, &tensor_product(&b, &c).unwrap()).unwrap();
        assert!(left.max_norm_diff(&right) < 1e-14);
    }

    #[test]
    fn tensor_cap() {
        let big = ComplexMatrix::identity(100);
        assert!(matches!(
            tensor_product_with_cap(&big, &big, 4096),
            Err(QcapError::DimensionOverflow { .. })
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let rho = {
            let g = random_hermitian(2, &mut rng);
            let p = g.matmul(&g);
            p.scale_re(1.0 / p.trace().re)
        };
        let sigma = {
            let g = random_hermitian(3, &mut rng);
            let p = g.matmul(&g);
            p.scale_re(1.0 / p.trace().re)
        };
        let joint = tensor_product(&rho, &sigma).unwrap();
        let back = partial_trace(&joint, &[2, 3], &[0]).unwrap();
        assert!(back.max_norm_diff(&rho) < 1e-12);

        // Bell state marginals
        let inv = 1.0 / 2.0f64.sqrt();
        let bell = vec![
            C64::new(inv, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(inv, 0.0),
        ];
        let bell_rho = ComplexMatrix::projector(&bell);
        for keep in [0usize, 1] {
            let marg = partial_trace(&bell_rho, &[2, 2], &[keep]).unwrap();
            assert!(marg.max_norm_diff(&ComplexMatrix::identity(2).scale_re(0.5)) < 1e-12);
        }

        // trace preservation on random inputs
        for _ in 0..20 {
            let m = random_hermitian(12, &mut rng);
            let pt = partial_trace(&m, &[2, 3, 2], &[1]).unwrap();
            assert!((pt.trace() - m.trace()).norm() < 1e-10);
        }
    }

    #[test]
    fn partial_trace_bad_dims() {
        let m = ComplexMatrix::identity(6);
        assert!(matches!(
            partial_trace(&m, &[2, 2], &[0]),
            Err(QcapError::BadFactorization { .. })
        ));
    }

    #[test]
    fn loewner_examples() {
        let zero = ComplexMatrix::zeros(2);
        let id = ComplexMatrix::identity(2);
        assert!(loewner_leq(&zero, &id, 1e-12));
        assert!(!loewner_leq(&id, &id.scale_re(0.5), 1e-12));
        // reflexive
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..20 {
            let g = random_hermitian(3, &mut rng);
            let psd = g.matmul(&g);
            assert!(loewner_leq(&psd, &psd, 1e-12));
        }
    }

    #[test]
    fn matrix_json_roundtrip_rejects_nonfinite() {
        let m = ComplexMatrix::diag(&[0.3, 0.7]);
        let s = serde_json::to_string(&m).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
        let bad = r#"{"dim":1,"entries":[[1e999,0.0]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(bad).is_err());
    }
}
