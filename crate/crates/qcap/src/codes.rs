//! Classical codes for quantum channels: block and general codewords,
//! pretty-good-measurement decoders, error evaluation, induced output
//! states, and exhaustive enumeration of tiny codes.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QcapError, Result};
use crate::hermitian::{
    matrix_function, tensor_product, ComplexMatrix, KernelPolicy, MatrixFunction,
    DEFAULT_DIM_CAP,
};
use crate::states::{complete_povm, DensityMatrix, Ensemble, Povm, QuantumChannel};

/// Hard cap on exhaustive code enumeration.
pub const ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Codeword {
    /// Product codeword given slot by slot; the full input is the tensor
    /// of the listed factors.
    Block(Vec<DensityMatrix>),
    /// Arbitrary (possibly entangled) state on the n-fold input space.
    General(DensityMatrix),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncoderKind {
    DeterministicBlock,
    DeterministicGeneral,
    /// Stochastic encoder stored pre-averaged: the codeword is already
    /// Σ_a p(a|m) ρ_a, which is all any bound here consumes.
    StochasticAveraged,
}

/// An (n, M) classical code: M codewords on the n-fold channel input and a
/// decoding POVM on the n-fold output. Decoder element m decodes message
/// m; elements beyond M are erasure outcomes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "CodeFile", into = "CodeFile")]
pub struct ClassicalQuantumCode {
    pub blocklength: usize,
    pub codewords: Vec<Codeword>,
    pub decoder: Povm,
    pub encoder_kind: EncoderKind,
}

/// On-disk format: {"n", "codewords", "decoder", "kind"}.
#[derive(Serialize, Deserialize)]
struct CodeFile {
    n: usize,
    codewords: Vec<Codeword>,
    decoder: Povm,
    kind: EncoderKind,
}

impl From<ClassicalQuantumCode> for CodeFile {
    fn from(c: ClassicalQuantumCode) -> Self {
        CodeFile {
            n: c.blocklength,
            codewords: c.codewords,
            decoder: c.decoder,
            kind: c.encoder_kind,
        }
    }
}

impl TryFrom<CodeFile> for ClassicalQuantumCode {
    type Error = QcapError;
    fn try_from(f: CodeFile) -> Result<Self> {
        ClassicalQuantumCode::new(f.n, f.codewords, f.decoder, f.kind)
    }
}

impl ClassicalQuantumCode {
    pub fn new(
        blocklength: usize,
        codewords: Vec<Codeword>,
        decoder: Povm,
        encoder_kind: EncoderKind,
    ) -> Result<Self> {
        if codewords.is_empty() {
            return Err(QcapError::BadParameter("code needs at least one codeword".into()));
        }
        if blocklength == 0 {
            return Err(QcapError::BadParameter("blocklength must be positive".into()));
        }
        if decoder.len() < codewords.len() {
            return Err(QcapError::BadParameter(format!(
                "decoder has {} elements for {} messages",
                decoder.len(),
                codewords.len()
            )));
        }
        let mut slot_dim: Option<usize> = None;
        for cw in &codewords {
            match cw {
                Codeword::Block(slots) => {
                    if slots.len() != blocklength {
                        return Err(QcapError::BadParameter(format!(
                            "block codeword has {} slots, blocklength is {blocklength}",
                            slots.len()
                        )));
                    }
                    for s in slots {
                        match slot_dim {
                            None => slot_dim = Some(s.dim()),
                            Some(d) if d != s.dim() => {
                                return Err(QcapError::DimensionMismatch {
                                    expected: d,
                                    got: s.dim(),
                                })
                            }
                            _ => {}
                        }
                    }
                }
                Codeword::General(_) => {}
            }
        }
        Ok(Self { blocklength, codewords, decoder, encoder_kind })
    }

    /// All codewords are per-slot products.
    pub fn is_block(&self) -> bool {
        self.codewords.iter().all(|c| matches!(c, Codeword::Block(_)))
    }

    pub fn num_messages(&self) -> usize {
        self.codewords.len()
    }

    /// Full input state of message m on the n-fold space.
    pub fn input_state(&self, m: usize) -> Result<DensityMatrix> {
        match &self.codewords[m] {
            Codeword::General(s) => Ok(s.clone()),
            Codeword::Block(slots) => {
                let mut acc = slots[0].matrix().clone();
                for s in &slots[1..] {
                    acc = tensor_product(&acc, s.matrix())?;
                }
                DensityMatrix::new(acc)
            }
        }
    }

    /// Channel output N^⊗n(ρ_m). Block codewords are pushed through the
    /// channel slot by slot before tensoring.
    pub fn output_state(&self, m: usize, n: &QuantumChannel) -> Result<DensityMatrix> {
        match &self.codewords[m] {
            Codeword::Block(slots) => {
                let mut acc: Option<ComplexMatrix> = None;
                for s in slots {
                    if s.dim() != n.dim_in() {
                        return Err(QcapError::DimensionMismatch {
                            expected: n.dim_in(),
                            got: s.dim(),
                        });
                    }
                    let out = n.apply_matrix(s.matrix());
                    acc = Some(match acc {
                        None => out,
                        Some(a) => tensor_product(&a, &out)?,
                    });
                }
                DensityMatrix::new(acc.expect("blocklength ≥ 1"))
            }
            Codeword::General(s) => {
                let big = crate::states::channel_tensor_power(n, self.blocklength)?;
                if s.dim() != big.dim_in() {
                    return Err(QcapError::DimensionMismatch {
                        expected: big.dim_in(),
                        got: s.dim(),
                    });
                }
                DensityMatrix::new(big.apply_matrix(s.matrix()))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodePerformance {
    pub max_error: f64,
    pub avg_error: f64,
    pub per_message: Vec<f64>,
}

/// I.i.d. random codebook: each of the M codewords draws `blocklength`
/// symbols from the ensemble. Deterministic given the seed.
pub fn random_codebook(
    n: &QuantumChannel,
    e: &Ensemble,
    blocklength: usize,
    m: usize,
    seed: u64,
) -> Result<Vec<Vec<DensityMatrix>>> {
    if m == 0 || blocklength == 0 {
        return Err(QcapError::BadParameter("need M ≥ 1 and blocklength ≥ 1".into()));
    }
    let total_dim = (n.dim_out() as u128).checked_pow(blocklength as u32);
    match total_dim {
        Some(d) if d <= DEFAULT_DIM_CAP as u128 => {}
        _ => {
            return Err(QcapError::DimensionOverflow {
                dim: usize::MAX,
                cap: DEFAULT_DIM_CAP,
            })
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dist = WeightedIndex::new(&e.probs)
        .map_err(|err| QcapError::BadParameter(format!("bad ensemble weights: {err}")))?;
    Ok((0..m)
        .map(|_| (0..blocklength).map(|_| e.states[dist.sample(&mut rng)].clone()).collect())
        .collect())
}

/// Pretty good measurement: E_m = S^{−1/2} p_m ρ_m S^{−1/2} with
/// S = Σ p_m ρ_m, the inverse square root taken on supp(S). The residual
/// I − ΣE_m (the projector onto ker S) becomes an erasure element.
pub fn pgm_decoder(output_states: &[DensityMatrix], priors: &[f64]) -> Result<Povm> {
    if output_states.is_empty() || output_states.len() != priors.len() {
        return Err(QcapError::BadParameter("PGM needs matching states and priors".into()));
    }
    let dim = output_states[0].dim();
    for s in output_states {
        if s.dim() != dim {
            return Err(QcapError::DimensionMismatch { expected: dim, got: s.dim() });
        }
    }
    let mut s_mat = ComplexMatrix::zeros(dim);
    for (p, rho) in priors.iter().zip(output_states) {
        s_mat = s_mat.add(&rho.matrix().scale_re(*p));
    }
    let s_inv_sqrt =
        matrix_function(&s_mat, MatrixFunction::Pow(-0.5), KernelPolicy::ZeroOnKernel)?;
    let elements: Vec<ComplexMatrix> = priors
        .iter()
        .zip(output_states)
        .map(|(p, rho)| {
            s_inv_sqrt
                .matmul(&rho.matrix().scale_re(*p))
                .matmul(&s_inv_sqrt)
                .symmetrized()
        })
        .collect();
    complete_povm(&elements, dim)
}

/// Per-message errors 1 − Tr(N^⊗n(ρ_m) E_m), with max and average.
pub fn evaluate_code(code: &ClassicalQuantumCode, n: &QuantumChannel) -> Result<CodePerformance> {
    let m = code.num_messages();
    let mut per_message = Vec::with_capacity(m);
    for i in 0..m {
        let out = code.output_state(i, n)?;
        if out.dim() != code.decoder.dim() {
            return Err(QcapError::DimensionMismatch {
                expected: code.decoder.dim(),
                got: out.dim(),
            });
        }
        let success = out.matrix().trace_product_re(&code.decoder.elements()[i]);
        per_message.push((1.0 - success).clamp(0.0, 1.0));
    }
    let max_error = per_message.iter().cloned().fold(0.0, f64::max);
    let avg_error = per_message.iter().sum::<f64>() / m as f64;
    Ok(CodePerformance { max_error, avg_error, per_message })
}

/// ω_n = (1/M) Σ_m N^⊗n(ρ_m), the output state induced by the code under
/// a uniform message prior.
pub fn induced_output_state(
    code: &ClassicalQuantumCode,
    n: &QuantumChannel,
) -> Result<DensityMatrix> {
    let m = code.num_messages();
    let mut acc: Option<ComplexMatrix> = None;
    for i in 0..m {
        let out = code.output_state(i, n)?;
        let scaled = out.matrix().scale_re(1.0 / m as f64);
        acc = Some(match acc {
            None => scaled,
            Some(a) => a.add(&scaled),
        });
    }
    DensityMatrix::new(acc.expect("M ≥ 1"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderFamily {
    /// One PGM decoder per codeword assignment (built from the codeword
    /// states themselves, uniform priors).
    Pgm,
    /// Every assignment of distinct computational-basis projectors to the
    /// M messages, remainder as erasure.
    AllProjectiveFromBasis,
}

/// Every deterministic block code with codeword slots drawn from
/// `symbol_set`, paired with decoders from the requested family.
pub fn enumerate_tiny_codes(
    symbol_set: &[DensityMatrix],
    blocklength: usize,
    m: usize,
    decoder_family: DecoderFamily,
) -> Result<Vec<ClassicalQuantumCode>> {
    if symbol_set.is_empty() || m == 0 || blocklength == 0 {
        return Err(QcapError::BadParameter("empty enumeration request".into()));
    }
    let k = symbol_set.len() as u128;
    let slots = (blocklength * m) as u32;
    let assignments = k
        .checked_pow(slots)
        .ok_or(QcapError::EnumerationTooLarge { size: u128::MAX, cap: ENUMERATION_CAP })?;
    let dim = symbol_set[0].dim();
    let total_dim = (dim as u128).pow(blocklength as u32);
    if total_dim > DEFAULT_DIM_CAP as u128 {
        return Err(QcapError::DimensionOverflow {
            dim: total_dim.min(usize::MAX as u128) as usize,
            cap: DEFAULT_DIM_CAP,
        });
    }
    let decoders_per_assignment = match decoder_family {
        DecoderFamily::Pgm => 1u128,
        DecoderFamily::AllProjectiveFromBasis => {
            // falling factorial D·(D−1)···(D−M+1)
            let d = total_dim;
            if (m as u128) > d {
                0
            } else {
                (0..m as u128).try_fold(1u128, |acc, i| acc.checked_mul(d - i)).ok_or(
                    QcapError::EnumerationTooLarge { size: u128::MAX, cap: ENUMERATION_CAP },
                )?
            }
        }
    };
    let size = assignments
        .checked_mul(decoders_per_assignment.max(1))
        .ok_or(QcapError::EnumerationTooLarge { size: u128::MAX, cap: ENUMERATION_CAP })?;
    if size > ENUMERATION_CAP {
        return Err(QcapError::EnumerationTooLarge { size, cap: ENUMERATION_CAP });
    }

    let dim_n = total_dim as usize;
    let mut codes = Vec::new();
    for idx in 0..assignments {
        let mut rem = idx;
        let mut codewords = Vec::with_capacity(m);
        for _ in 0..m {
            let mut slots_v = Vec::with_capacity(blocklength);
            for _ in 0..blocklength {
                slots_v.push(symbol_set[(rem % k) as usize].clone());
                rem /= k;
            }
            codewords.push(Codeword::Block(slots_v));
        }
        match decoder_family {
            DecoderFamily::Pgm => {
                let code_states: Vec<DensityMatrix> = (0..m)
                    .map(|i| match &codewords[i] {
                        Codeword::Block(slots) => {
                            let mut acc = slots[0].matrix().clone();
                            for s in &slots[1..] {
                                acc = tensor_product(&acc, s.matrix()).expect("dim cap checked");
                            }
                            DensityMatrix::new(acc).expect("tensor of densities")
                        }
                        Codeword::General(s) => s.clone(),
                    })
                    .collect();
                let priors = vec![1.0 / m as f64; m];
                let decoder = pgm_decoder(&code_states, &priors)?;
                codes.push(ClassicalQuantumCode::new(
                    blocklength,
                    codewords,
                    decoder,
                    EncoderKind::DeterministicBlock,
                )?);
            }
            DecoderFamily::AllProjectiveFromBasis => {
                for choice in distinct_tuples(dim_n, m) {
                    let elements: Vec<ComplexMatrix> = choice
                        .iter()
                        .map(|&b| DensityMatrix::basis_state(dim_n, b).matrix().clone())
                        .collect();
                    let decoder = complete_povm(&elements, dim_n)?;
                    codes.push(ClassicalQuantumCode::new(
                        blocklength,
                        codewords.clone(),
                        decoder,
                        EncoderKind::DeterministicBlock,
                    )?);
                }
            }
        }
    }
    Ok(codes)
}

/// All ordered m-tuples of distinct values in 0..d.
fn distinct_tuples(d: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(d: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for v in 0..d {
            if !cur.contains(&v) {
                cur.push(v);
                rec(d, m, cur, out);
                cur.pop();
            }
        }
    }
    rec(d, m, &mut cur, &mut out);
    out
}

/// Basis code: message i is encoded slot by slot as the base-`dim` digits
/// of i (computational-basis states) and decoded by the matching basis
/// projectors, erasure completing the POVM when m < dim^n. Needs the
/// channel to preserve the basis dimension (dim_in = dim_out = dim).
pub fn basis_code(n_slots: usize, m: usize, dim: usize) -> Result<ClassicalQuantumCode> {
    let mut dim_n: u128 = 1;
    for _ in 0..n_slots {
        dim_n = dim_n.saturating_mul(dim as u128);
    }
    if dim_n > DEFAULT_DIM_CAP as u128 {
        return Err(QcapError::DimensionOverflow {
            dim: dim_n.min(usize::MAX as u128) as usize,
            cap: DEFAULT_DIM_CAP,
        });
    }
    let dim_n = dim_n as usize;
    if m > dim_n {
        return Err(QcapError::BadParameter(format!(
            "basis code needs m ≤ dim^n, got m = {m} with dim^n = {dim_n}"
        )));
    }
    let digit = |i: usize, s: usize| (i / dim.pow(s as u32)) % dim;
    let codewords: Vec<Codeword> = (0..m)
        .map(|i| {
            Codeword::Block(
                (0..n_slots).map(|s| DensityMatrix::basis_state(dim, digit(i, s))).collect(),
            )
        })
        .collect();
    let elements: Vec<ComplexMatrix> = (0..m)
        .map(|i| {
            // tensor_product makes the first slot most significant
            let mut idx = 0usize;
            for s in 0..n_slots {
                idx = idx * dim + digit(i, s);
            }
            DensityMatrix::basis_state(dim_n, idx).matrix().clone()
        })
        .collect();
    let decoder = if m == dim_n {
        Povm::new(elements)?
    } else {
        complete_povm(&elements, dim_n)?
    };
    ClassicalQuantumCode::new(n_slots, codewords, decoder, EncoderKind::DeterministicBlock)
}

/// Finite-n surrogate for an asymptotically good code: an i.i.d. random
/// codebook from the given (typically capacity-achieving) ensemble at rate
/// `rate_fraction`·χ nats per slot, decoded by the PGM.
pub fn goodish_random_code(
    n: &QuantumChannel,
    e: &Ensemble,
    chi: f64,
    blocklength: usize,
    rate_fraction: f64,
    seed: u64,
) -> Result<ClassicalQuantumCode> {
    // ceil keeps ln M / n at or above the requested rate
    let m = ((rate_fraction * chi * blocklength as f64).exp().ceil() as usize).max(2);
    let book = random_codebook(n, e, blocklength, m, seed)?;
    let outputs: Vec<DensityMatrix> = book
        .iter()
        .map(|slots| {
            let mut acc: Option<ComplexMatrix> = None;
            for s in slots {
                let out = n.apply_matrix(s.matrix());
                acc = Some(match acc {
                    None => out,
                    Some(a) => tensor_product(&a, &out)?,
                });
            }
            DensityMatrix::new(acc.expect("blocklength ≥ 1"))
        })
        .collect::<Result<_>>()?;
    let priors = vec![1.0 / m as f64; m];
    let decoder = pgm_decoder(&outputs, &priors)?;
    let codewords = book.into_iter().map(Codeword::Block).collect();
    ClassicalQuantumCode::new(blocklength, codewords, decoder, EncoderKind::DeterministicBlock)
}
