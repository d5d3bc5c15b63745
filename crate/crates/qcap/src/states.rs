//! Density matrices, POVMs, CPTP channels in Kraus form, the named channel
//! families, and tensor-power composition.

use serde::{Deserialize, Serialize};

use crate::error::{QcapError, Result};
use crate::hermitian::{
    eig_hermitian, loewner_leq, tensor_product, ComplexMatrix, C64,
};

pub const DENSITY_TOL: f64 = 1e-10;
/// POVMs come out of constructive algorithms (PGM) with accumulated error,
/// so they get a looser tolerance than density matrices.
pub const POVM_TOL: f64 = 1e-9;
pub const CHANNEL_TOL: f64 = 1e-9;

/// Rectangular complex matrix (d_out × d_in Kraus operators).
#[derive(Debug, Clone, PartialEq)]
pub struct KrausOperator {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl KrausOperator {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = vec![C64::new(0.0, 0.0); rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                entries[i * cols + j] = f(i, j);
            }
        }
        Self { rows, cols, entries }
    }

    pub fn from_square(m: &ComplexMatrix) -> Self {
        Self::from_fn(m.dim(), m.dim(), |i, j| m[(i, j)])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.cols + j]
    }

    pub fn scale_re(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * c).collect(),
        }
    }

    /// K ρ K† for square ρ of dimension `cols`.
    pub fn conjugate_apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(rho.dim(), self.cols);
        let (r, c) = (self.rows, self.cols);
        // tmp = K ρ   (r × c)
        let mut tmp = vec![C64::new(0.0, 0.0); r * c];
        for i in 0..r {
            for k in 0..c {
                let a = self.get(i, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..c {
                    tmp[i * c + j] += a * rho[(k, j)];
                }
            }
        }
        ComplexMatrix::from_fn(r, |i, j| {
            (0..c).map(|k| tmp[i * c + k] * self.get(j, k).conj()).sum()
        })
    }

    /// K† X K for square X of dimension `rows` (adjoint channel action).
    pub fn adjoint_conjugate_apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.dim(), self.rows);
        let (r, c) = (self.rows, self.cols);
        // tmp = K† X   (c × r)
        let mut tmp = vec![C64::new(0.0, 0.0); c * r];
        for i in 0..c {
            for k in 0..r {
                let a = self.get(k, i).conj();
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..r {
                    tmp[i * r + j] += a * x[(k, j)];
                }
            }
        }
        ComplexMatrix::from_fn(c, |i, j| {
            (0..r).map(|k| tmp[i * r + k] * self.get(k, j)).sum()
        })
    }

    /// Accumulate K†K into `acc` (a cols × cols Hermitian accumulator).
    fn accumulate_gram(&self, acc: &mut ComplexMatrix) {
        assert_eq!(acc.dim(), self.cols);
        for i in 0..self.cols {
            for j in 0..self.cols {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..self.rows {
                    s += self.get(k, i).conj() * self.get(k, j);
                }
                acc[(i, j)] += s;
            }
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        Self::from_fn(r, c, |i, j| {
            self.get(i / other.rows, j / other.cols) * other.get(i % other.rows, j % other.cols)
        })
    }
}

/// Hermitian, PSD, unit-trace matrix on a finite Hilbert space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let dev = mat.hermiticity_deviation();
        if dev > DENSITY_TOL {
            return Err(QcapError::NotHermitian { deviation: dev, tol: DENSITY_TOL });
        }
        let eig = eig_hermitian(&mat, DENSITY_TOL)?;
        if eig.min_eigenvalue() < -DENSITY_TOL {
            return Err(QcapError::SingularArgument { eigenvalue: eig.min_eigenvalue() });
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(QcapError::BadParameter(format!(
                "density matrix trace {:.12} != 1",
                tr.re
            )));
        }
        Ok(Self { mat })
    }

    /// For internal constructions that are valid up to float drift:
    /// symmetrizes and renormalizes the trace before validating.
    pub(crate) fn normalized(mat: ComplexMatrix) -> Self {
        let sym = mat.symmetrized();
        let tr = sym.trace().re;
        assert!(tr > 0.0, "non-positive trace in density construction");
        Self { mat: sym.scale_re(1.0 / tr) }
    }

    pub fn pure(v: &[C64]) -> Self {
        Self { mat: ComplexMatrix::projector(v) }
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[index] = C64::new(1.0, 0.0);
        Self::pure(&v)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { mat: ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64) }
    }

    /// Diagonal state embedding a classical distribution; the entries are
    /// normalized to unit sum.
    pub fn classical(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(QcapError::BadParameter(
                "classical state needs nonnegative entries".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return Err(QcapError::BadParameter("classical state needs positive mass".into()));
        }
        let dim = probs.len();
        Ok(Self {
            mat: ComplexMatrix::from_fn(dim, |i, j| {
                if i == j {
                    C64::new(probs[i] / total, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        })
    }

    pub fn random(dim: usize, rng: &mut impl rand::Rng) -> Self {
        // Ginibre construction: G G† / Tr, full rank almost surely.
        let g = crate::hermitian::random_hermitian(dim, rng);
        let h = crate::hermitian::random_hermitian(dim, rng);
        let sum = g.matmul(&g).add(&h.matmul(&h));
        Self::normalized(sum)
    }

    pub fn random_pure(dim: usize, rng: &mut impl rand::Rng) -> Self {
        Self::pure(&crate::hermitian::random_pure_state(dim, rng))
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self { mat: tensor_product(&self.mat, &other.mat)? })
    }

    pub fn tensor_power(&self, k: usize) -> Result<Self> {
        assert!(k >= 1);
        let mut out = self.clone();
        for _ in 1..k {
            out = out.tensor(self)?;
        }
        Ok(out)
    }

    /// (1-δ)ρ + δ I/d; keeps the state full rank for inverse-power norms.
    pub fn regularized(&self, delta: f64) -> Self {
        let d = self.dim();
        Self {
            mat: self
                .mat
                .scale_re(1.0 - delta)
                .add(&ComplexMatrix::identity(d).scale_re(delta / d as f64)),
        }
    }

    pub fn trace_distance(&self, other: &Self) -> f64 {
        crate::hermitian::trace_distance(&self.mat, &other.mat)
    }
}

/// POVM: elements with 0 ⪯ E ⪯ I summing to the identity.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(QcapError::BadParameter("POVM needs at least one element".into()));
        }
        let dim = elements[0].dim();
        let id = ComplexMatrix::identity(dim);
        let zero = ComplexMatrix::zeros(dim);
        let mut sum = ComplexMatrix::zeros(dim);
        for e in &elements {
            if e.dim() != dim {
                return Err(QcapError::DimensionMismatch { expected: dim, got: e.dim() });
            }
            if !loewner_leq(&zero, e, POVM_TOL) || !loewner_leq(e, &id, POVM_TOL) {
                return Err(QcapError::BadParameter(
                    "POVM element violates 0 ⪯ E ⪯ I".into(),
                ));
            }
            sum = sum.add(e);
        }
        if sum.max_norm_diff(&id) > POVM_TOL {
            return Err(QcapError::BadParameter(format!(
                "POVM elements sum to identity only within {:.3e}",
                sum.max_norm_diff(&id)
            )));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn computational_basis(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|i| DensityMatrix::basis_state(dim, i).matrix().clone())
            .collect();
        Self { elements }
    }
}

/// Appends the "discard" element I - Σ E to a sub-normalized element list.
pub fn complete_povm(partial: &[ComplexMatrix], dim: usize) -> Result<Povm> {
    let id = ComplexMatrix::identity(dim);
    let zero = ComplexMatrix::zeros(dim);
    let mut sum = ComplexMatrix::zeros(dim);
    for e in partial {
        if e.dim() != dim {
            return Err(QcapError::DimensionMismatch { expected: dim, got: e.dim() });
        }
        if !loewner_leq(&zero, e, POVM_TOL) || !loewner_leq(e, &id, POVM_TOL) {
            return Err(QcapError::BadParameter("element violates 0 ⪯ E ⪯ I".into()));
        }
        sum = sum.add(e);
    }
    let residual = id.sub(&sum).symmetrized();
    let eig = eig_hermitian(&residual, POVM_TOL)?;
    if eig.min_eigenvalue() < -POVM_TOL {
        return Err(QcapError::ElementsExceedIdentity { excess: -eig.min_eigenvalue() });
    }
    // Clip float dust so the completed element is PSD.
    let clipped = eig.apply_to_eigenvalues(|x| x.max(0.0));
    let mut elements: Vec<ComplexMatrix> = partial.to_vec();
    elements.push(clipped);
    Povm::new(elements)
}

/// Finite ensemble of density matrices; the argument of the Holevo quantity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ensemble {
    pub probs: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(probs: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if probs.is_empty() || probs.len() != states.len() {
            return Err(QcapError::BadParameter(
                "ensemble needs matching, non-empty probs and states".into(),
            ));
        }
        if probs.iter().any(|&p| p < -1e-12) {
            return Err(QcapError::BadParameter("negative ensemble probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DENSITY_TOL {
            return Err(QcapError::BadParameter(format!(
                "ensemble probabilities sum to {total:.12}"
            )));
        }
        let dim = states[0].dim();
        if states.iter().any(|s| s.dim() != dim) {
            return Err(QcapError::BadParameter("ensemble states differ in dimension".into()));
        }
        Ok(Self { probs, states })
    }

    pub fn uniform(states: Vec<DensityMatrix>) -> Result<Self> {
        let n = states.len();
        Self::new(vec![1.0 / n as f64; n], states)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// Σ p_x ρ_x.
    pub fn average_state(&self) -> DensityMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for (p, s) in self.probs.iter().zip(&self.states) {
            acc = acc.add(&s.matrix().scale_re(*p));
        }
        DensityMatrix::normalized(acc)
    }
}

/// CPTP map in Kraus form.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    kraus: Vec<KrausOperator>,
    dim_in: usize,
    dim_out: usize,
}

impl QuantumChannel {
    pub fn kraus(&self) -> &[KrausOperator] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![KrausOperator::from_square(&ComplexMatrix::identity(dim))],
            dim_in: dim,
            dim_out: dim,
        }
    }

    /// Adjoint (Heisenberg-picture) action N†(X) = Σ K† X K.
    pub fn adjoint_apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim_in);
        for k in &self.kraus {
            acc = acc.add(&k.adjoint_conjugate_apply(x));
        }
        acc
    }

    /// Raw Kraus-sum action on an arbitrary (not necessarily density) matrix.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim_out);
        for k in &self.kraus {
            acc = acc.add(&k.conjugate_apply(m));
        }
        acc
    }

    /// Choi matrix Σ_{ij} |i⟩⟨j| ⊗ N(|i⟩⟨j|), dimension dim_in · dim_out.
    pub fn choi_matrix(&self) -> ComplexMatrix {
        let (di, dout) = (self.dim_in, self.dim_out);
        let mut choi = ComplexMatrix::zeros(di * dout);
        for k in &self.kraus {
            for i in 0..di {
                for j in 0..di {
                    for a in 0..dout {
                        for b in 0..dout {
                            choi[(i * dout + a, j * dout + b)] +=
                                k.get(a, i) * k.get(b, j).conj();
                        }
                    }
                }
            }
        }
        choi
    }
}

/// Validates a Kraus list as a CPTP map (both trace preservation and the
/// Choi PSD check).
pub fn validate_channel(kraus: Vec<KrausOperator>) -> Result<QuantumChannel> {
    if kraus.is_empty() {
        return Err(QcapError::BadParameter("empty Kraus list".into()));
    }
    let (dim_out, dim_in) = (kraus[0].rows(), kraus[0].cols());
    if kraus.iter().any(|k| k.rows() != dim_out || k.cols() != dim_in) {
        return Err(QcapError::BadParameter("non-uniform Kraus operator shapes".into()));
    }
    let mut gram = ComplexMatrix::zeros(dim_in);
    for k in &kraus {
        k.accumulate_gram(&mut gram);
    }
    let dev = gram.max_norm_diff(&ComplexMatrix::identity(dim_in));
    if dev > CHANNEL_TOL {
        return Err(QcapError::NotTracePreserving { deviation: dev });
    }
    let channel = QuantumChannel { kraus, dim_in, dim_out };
    let choi = channel.choi_matrix();
    let eig = eig_hermitian(&choi, CHANNEL_TOL * dim_in as f64)?;
    if eig.min_eigenvalue() < -CHANNEL_TOL * dim_in as f64 {
        return Err(QcapError::NotCompletelyPositive {
            min_choi_eigenvalue: eig.min_eigenvalue(),
        });
    }
    Ok(channel)
}

/// Σ K ρ K†; validated density output.
pub fn apply_channel(n: &QuantumChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != n.dim_in() {
        return Err(QcapError::DimensionMismatch { expected: n.dim_in(), got: rho.dim() });
    }
    Ok(DensityMatrix::normalized(n.apply_matrix(rho.matrix())))
}

const MAX_KRAUS_COUNT: usize = 1 << 20;

/// N^⊗k in Kraus form (all k-fold tensor products of the base operators).
pub fn channel_tensor_power(n: &QuantumChannel, k: usize) -> Result<QuantumChannel> {
    assert!(k >= 1);
    let dim_cap = crate::hermitian::DEFAULT_DIM_CAP;
    let mut dim = 1usize;
    for _ in 0..k {
        dim = dim
            .checked_mul(n.dim_out().max(n.dim_in()))
            .ok_or(QcapError::DimensionOverflow { dim: usize::MAX, cap: dim_cap })?;
        if dim > dim_cap {
            return Err(QcapError::DimensionOverflow { dim, cap: dim_cap });
        }
    }
    let mut count = 1usize;
    for _ in 0..k {
        count = count.saturating_mul(n.kraus().len());
        if count > MAX_KRAUS_COUNT {
            return Err(QcapError::DimensionOverflow { dim: count, cap: MAX_KRAUS_COUNT });
        }
    }
    let mut ops: Vec<KrausOperator> =
        vec![KrausOperator::from_square(&ComplexMatrix::identity(1))];
    for _ in 0..k {
        let mut next = Vec::with_capacity(ops.len() * n.kraus().len());
        for a in &ops {
            for b in n.kraus() {
                next.push(a.tensor(b));
            }
        }
        ops = next;
    }
    validate_channel(ops)
}

/// The channel families named alongside the converse results, plus the
/// constant (replacement) channel.
#[derive(Debug, Clone)]
pub enum ChannelFamily {
    Depolarizing { d: usize, p: f64 },
    /// Measure the input in the computational basis (or the supplied POVM)
    /// and prepare the corresponding signal state.
    Cq { signals: Vec<DensityMatrix>, povm: Option<Povm> },
    EntanglementBreaking { povm: Povm, preps: Vec<DensityMatrix> },
    Constant { sigma: DensityMatrix },
}

pub fn make_standard_channel(family: &ChannelFamily) -> Result<QuantumChannel> {
    match family {
        ChannelFamily::Depolarizing { d, p } => {
            let (d, p) = (*d, *p);
            if d < 2 {
                return Err(QcapError::BadParameter("depolarizing needs d >= 2".into()));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(QcapError::BadParameter(format!(
                    "depolarizing p = {p} outside [0, 1]"
                )));
            }
            let mut kraus = Vec::with_capacity(d * d + 1);
            kraus.push(KrausOperator::from_square(
                &ComplexMatrix::identity(d).scale_re((1.0 - p).sqrt()),
            ));
            if p > 0.0 {
                let w = 2.0 * std::f64::consts::PI / d as f64;
                let coeff = (p / (d * d) as f64).sqrt();
                for a in 0..d {
                    for b in 0..d {
                        // generalized Pauli X^a Z^b
                        let u = ComplexMatrix::from_fn(d, |i, j| {
                            if i == (j + a) % d {
                                C64::from_polar(1.0, w * (b * j) as f64)
                            } else {
                                C64::new(0.0, 0.0)
                            }
                        });
                        kraus.push(KrausOperator::from_square(&u.scale_re(coeff)));
                    }
                }
            }
            validate_channel(kraus)
        }
        ChannelFamily::Cq { signals, povm } => {
            if signals.is_empty() {
                return Err(QcapError::BadParameter("cq channel needs signal states".into()));
            }
            let povm = match povm {
                Some(p) => p.clone(),
                None => Povm::computational_basis(signals.len()),
            };
            make_standard_channel(&ChannelFamily::EntanglementBreaking {
                povm,
                preps: signals.clone(),
            })
        }
        ChannelFamily::EntanglementBreaking { povm, preps } => {
            if povm.len() != preps.len() {
                return Err(QcapError::BadParameter(
                    "entanglement-breaking channel needs one prep state per POVM element".into(),
                ));
            }
            let dim_out = preps[0].dim();
            if preps.iter().any(|s| s.dim() != dim_out) {
                return Err(QcapError::BadParameter("prep states differ in dimension".into()));
            }
            // measure-and-prepare: N(ρ) = Σ_x Tr(E_x ρ) σ_x
            let mut kraus = Vec::new();
            for (e, sigma) in povm.elements().iter().zip(preps) {
                let e_eig = eig_hermitian(e, POVM_TOL)?;
                let s_eig = eig_hermitian(sigma.matrix(), DENSITY_TOL)?;
                for (ke, &lam_e) in e_eig.eigenvalues.iter().enumerate() {
                    if lam_e <= 1e-14 {
                        continue;
                    }
                    for (ks, &lam_s) in s_eig.eigenvalues.iter().enumerate() {
                        if lam_s <= 1e-14 {
                            continue;
                        }
                        let coeff = (lam_e * lam_s).sqrt();
                        kraus.push(KrausOperator::from_fn(dim_out, e.dim(), |i, j| {
                            s_eig.eigenvectors[(i, ks)]
                                * e_eig.eigenvectors[(j, ke)].conj()
                                * coeff
                        }));
                    }
                }
            }
            validate_channel(kraus)
        }
        ChannelFamily::Constant { sigma } => {
            let dim = sigma.dim();
            let eig = eig_hermitian(sigma.matrix(), DENSITY_TOL)?;
            let mut kraus = Vec::new();
            for (j, &lam) in eig.eigenvalues.iter().enumerate() {
                if lam <= 1e-14 {
                    continue;
                }
                for k in 0..dim {
                    kraus.push(KrausOperator::from_fn(dim, dim, |i, c| {
                        if c == k {
                            eig.eigenvectors[(i, j)] * lam.sqrt()
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    }));
                }
            }
            validate_channel(kraus)
        }
    }
}

/// Random CPTP channel: Gaussian Kraus operators whitened by (ΣK†K)^{-1/2}.
pub fn random_channel(
    dim_in: usize,
    dim_out: usize,
    n_kraus: usize,
    rng: &mut impl rand::Rng,
) -> QuantumChannel {
    use crate::hermitian::{matrix_function, KernelPolicy, MatrixFunction};
    loop {
        let raw: Vec<KrausOperator> = (0..n_kraus)
            .map(|_| {
                KrausOperator::from_fn(dim_out, dim_in, |_, _| {
                    C64::new(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    )
                })
            })
            .collect();
        let mut gram = ComplexMatrix::zeros(dim_in);
        for k in &raw {
            k.accumulate_gram(&mut gram);
        }
        let eig = eig_hermitian(&gram, 1e-8).expect("gram is Hermitian");
        if eig.min_eigenvalue() < 1e-6 {
            continue; // near-singular draw, resample
        }
        let whitener =
            matrix_function(&gram, MatrixFunction::Pow(-0.5), KernelPolicy::Error).unwrap();
        let kraus: Vec<KrausOperator> = raw
            .iter()
            .map(|k| {
                // K S^{-1/2}
                KrausOperator::from_fn(dim_out, dim_in, |i, j| {
                    (0..dim_in).map(|m| k.get(i, m) * whitener[(m, j)]).sum()
                })
            })
            .collect();
        if let Ok(c) = validate_channel(kraus) {
            return c;
        }
    }
}

// --- JSON wire format ---------------------------------------------------

/// Channel file format: explicit Kraus form or named-family shorthand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpec {
    Family(FamilySpec),
    Kraus(KrausSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilySpec {
    Depolarizing { d: usize, p: f64 },
    Cq { signals: Vec<ComplexMatrix> },
    EntanglementBreaking { povm: Vec<ComplexMatrix>, preps: Vec<ComplexMatrix> },
    Constant { sigma: ComplexMatrix },
    Identity { d: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrausSpec {
    pub dim_in: usize,
    pub dim_out: usize,
    /// Row-major d_out × d_in entries per operator.
    pub kraus: Vec<Vec<[f64; 2]>>,
}

impl ChannelSpec {
    pub fn build(&self) -> Result<QuantumChannel> {
        match self {
            ChannelSpec::Family(f) => match f {
                FamilySpec::Depolarizing { d, p } => {
                    make_standard_channel(&ChannelFamily::Depolarizing { d: *d, p: *p })
                }
                FamilySpec::Cq { signals } => {
                    let states = signals
                        .iter()
                        .map(|m| DensityMatrix::new(m.clone()))
                        .collect::<Result<Vec<_>>>()?;
                    make_standard_channel(&ChannelFamily::Cq { signals: states, povm: None })
                }
                FamilySpec::EntanglementBreaking { povm, preps } => {
                    let povm = Povm::new(povm.clone())?;
                    let preps = preps
                        .iter()
                        .map(|m| DensityMatrix::new(m.clone()))
                        .collect::<Result<Vec<_>>>()?;
                    make_standard_channel(&ChannelFamily::EntanglementBreaking { povm, preps })
                }
                FamilySpec::Constant { sigma } => {
                    let sigma = DensityMatrix::new(sigma.clone())?;
                    make_standard_channel(&ChannelFamily::Constant { sigma })
                }
                FamilySpec::Identity { d } => Ok(QuantumChannel::identity(*d)),
            },
            ChannelSpec::Kraus(spec) => {
                let ops = spec
                    .kraus
                    .iter()
                    .map(|entries| {
                        if entries.len() != spec.dim_in * spec.dim_out {
                            return Err(QcapError::BadParameter(format!(
                                "kraus operator has {} entries, expected {}",
                                entries.len(),
                                spec.dim_in * spec.dim_out
                            )));
                        }
                        if entries.iter().any(|[re, im]| !re.is_finite() || !im.is_finite()) {
                            return Err(QcapError::BadParameter(
                                "non-finite kraus entry".into(),
                            ));
                        }
                        Ok(KrausOperator::from_fn(spec.dim_out, spec.dim_in, |i, j| {
                            let [re, im] = entries[i * spec.dim_in + j];
                            C64::new(re, im)
                        }))
                    })
                    .collect::<Result<Vec<_>>>()?;
                validate_channel(ops)
            }
        }
    }
}
