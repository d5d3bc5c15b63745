//! Entropic functionals: von Neumann entropy, quantum relative entropy,
//! Holevo quantity, cq mutual information, Petz-Rényi divergence, the
//! measured Rényi divergence (variational lower bound), and weighted L_p
//! norms. All values are in nats.

use serde::{Deserialize, Serialize};

use crate::error::{QcapError, Result};
use crate::hermitian::{
    eig_hermitian, matrix_function, ComplexMatrix, HermitianEigensystem, KernelPolicy,
    MatrixFunction,
};
use crate::states::{apply_channel, DensityMatrix, Ensemble, QuantumChannel};

/// Mass of ρ on the kernel of σ above which D(ρ‖σ) is declared infinite.
pub(crate) const SUPPORT_MASS_TOL: f64 = 1e-9;

/// Extended-real divergence: finite non-negative nats, or +∞ on support
/// violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceValue {
    value: f64,
    support_violated: bool,
}

impl DivergenceValue {
    pub fn finite(value: f64) -> Self {
        Self { value, support_violated: false }
    }

    pub fn infinite() -> Self {
        Self { value: f64::INFINITY, support_violated: true }
    }

    pub fn is_finite(&self) -> bool {
        !self.support_violated
    }

    /// Finite value in nats; +∞ when the support condition fails.
    pub fn nats(&self) -> f64 {
        self.value
    }

    pub fn support_violated(&self) -> bool {
        self.support_violated
    }
}

impl Serialize for DivergenceValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(1))?;
        if self.support_violated {
            map.serialize_entry("infinite", &true)?;
        } else {
            map.serialize_entry("nats", &self.value)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for DivergenceValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            nats: Option<f64>,
            infinite: Option<bool>,
        }
        let raw = Raw::deserialize(d)?;
        match (raw.nats, raw.infinite) {
            (Some(v), None) => Ok(DivergenceValue::finite(v)),
            (None, Some(true)) => Ok(DivergenceValue::infinite()),
            _ => Err(serde::de::Error::custom("expected {\"nats\": x} or {\"infinite\": true}")),
        }
    }
}

/// −Σ λ ln λ with 0·ln 0 = 0; clamped into [0, ln dim].
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let eig = eig_hermitian(rho.matrix(), 1e-8).expect("density matrix is Hermitian");
    entropy_of_spectrum(&eig.eigenvalues).clamp(0.0, (rho.dim() as f64).ln().max(0.0))
}

fn entropy_of_spectrum(spectrum: &[f64]) -> f64 {
    -spectrum
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l * l.ln())
        .sum::<f64>()
}

/// Mass of ρ on the numerical kernel of σ.
fn kernel_mass(rho: &ComplexMatrix, sigma_eig: &HermitianEigensystem) -> f64 {
    let cutoff = sigma_eig.kernel_cutoff();
    let n = rho.dim();
    let u = &sigma_eig.eigenvectors;
    let mut mass = 0.0;
    for (k, &lam) in sigma_eig.eigenvalues.iter().enumerate() {
        if lam > cutoff {
            continue;
        }
        let col: Vec<_> = (0..n).map(|i| u[(i, k)]).collect();
        mass += rho.expectation(&col).re;
    }
    mass
}

/// Quantum relative entropy Tr(ρ ln ρ − ρ ln σ) with logs restricted to
/// supports; +∞ when supp(ρ) ⊄ supp(σ).
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> DivergenceValue {
    assert_eq!(rho.dim(), sigma.dim(), "relative_entropy dimension mismatch");
    let sigma_eig = eig_hermitian(sigma.matrix(), 1e-8).expect("sigma Hermitian");
    if kernel_mass(rho.matrix(), &sigma_eig) > SUPPORT_MASS_TOL {
        return DivergenceValue::infinite();
    }
    let rho_eig = eig_hermitian(rho.matrix(), 1e-8).expect("rho Hermitian");
    let tr_rho_ln_rho = -entropy_of_spectrum(&rho_eig.eigenvalues);
    let ln_sigma = {
        let cutoff = sigma_eig.kernel_cutoff();
        sigma_eig.apply_to_eigenvalues(|l| if l > cutoff { l.ln() } else { 0.0 })
    };
    let tr_rho_ln_sigma = rho.matrix().trace_product_re(&ln_sigma);
    DivergenceValue::finite(tr_rho_ln_rho - tr_rho_ln_sigma)
}

/// Internal-consistency thresholds for the two-route χ and I computations.
const CROSS_CHECK_WARN: f64 = 1e-8;
const CROSS_CHECK_FAIL: f64 = 1e-6;

/// Holevo quantity χ(N, {p_x, ρ_x}) computed by two routes (entropy
/// difference and average relative entropy to the mean output) and
/// cross-checked.
pub fn holevo_quantity(e: &Ensemble, n: &QuantumChannel) -> Result<f64> {
    let outputs: Vec<DensityMatrix> =
        e.states.iter().map(|s| apply_channel(n, s)).collect::<Result<_>>()?;
    mutual_information_two_routes(&e.probs, &outputs, "holevo_quantity")
}

/// cq mutual information Σ_m p_m D(ρ_m ‖ ρ̄) = H(ρ̄) − Σ p_m H(ρ_m).
pub fn cq_mutual_information(probs: &[f64], output_states: &[DensityMatrix]) -> Result<f64> {
    mutual_information_two_routes(probs, output_states, "cq_mutual_information")
}

fn mutual_information_two_routes(
    probs: &[f64],
    outputs: &[DensityMatrix],
    context: &str,
) -> Result<f64> {
    assert_eq!(probs.len(), outputs.len());
    assert!(!outputs.is_empty());
    let dim = outputs[0].dim();
    let mut mean = ComplexMatrix::zeros(dim);
    for (p, s) in probs.iter().zip(outputs) {
        mean = mean.add(&s.matrix().scale_re(*p));
    }
    let mean = DensityMatrix::normalized(mean);

    let entropy_route =
        von_neumann_entropy(&mean)
            - probs.iter().zip(outputs).map(|(p, s)| p * von_neumann_entropy(s)).sum::<f64>();

    let mut divergence_route = 0.0;
    for (p, s) in probs.iter().zip(outputs) {
        if *p <= 0.0 {
            continue;
        }
        let d = relative_entropy(s, &mean);
        if !d.is_finite() {
            return Err(QcapError::InternalInconsistency {
                context: format!("{context}: D(ρ_x‖ρ̄) infinite for an ensemble member"),
                discrepancy: f64::INFINITY,
            });
        }
        divergence_route += p * d.nats();
    }

    let discrepancy = (entropy_route - divergence_route).abs();
    if discrepancy > CROSS_CHECK_FAIL {
        return Err(QcapError::InternalInconsistency { context: context.into(), discrepancy });
    }
    debug_assert!(discrepancy <= CROSS_CHECK_WARN * (1.0 + divergence_route.abs()) * 100.0);
    Ok(divergence_route)
}

/// Petz-Rényi divergence (1/(α−1)) ln Tr(ρ^α σ^{1−α}) with powers on
/// supports. For α > 1 the support condition supp(ρ) ⊆ supp(σ) is required.
pub fn petz_renyi_divergence(
    alpha: f64,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> DivergenceValue {
    assert!(alpha > 0.0 && (alpha - 1.0).abs() > 1e-12, "alpha in (0,1) ∪ (1,∞)");
    assert_eq!(rho.dim(), sigma.dim());
    if alpha > 1.0 {
        let sigma_eig = eig_hermitian(sigma.matrix(), 1e-8).expect("sigma Hermitian");
        if kernel_mass(rho.matrix(), &sigma_eig) > SUPPORT_MASS_TOL {
            return DivergenceValue::infinite();
        }
    }
    let rho_a = matrix_function(rho.matrix(), MatrixFunction::Pow(alpha), KernelPolicy::ZeroOnKernel)
        .expect("rho PSD");
    let sigma_b = matrix_function(
        sigma.matrix(),
        MatrixFunction::Pow(1.0 - alpha),
        KernelPolicy::ZeroOnKernel,
    )
    .expect("sigma PSD");
    let q = rho_a.trace_product_re(&sigma_b);
    if q <= 1e-300 {
        // mutually singular for α < 1; empty overlap
        return DivergenceValue::infinite();
    }
    DivergenceValue::finite(q.ln() / (alpha - 1.0))
}

/// Configuration for the measured-Rényi variational ascent.
#[derive(Debug, Clone)]
pub struct MeasuredRenyiConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub fd_step: f64,
    pub regularization: f64,
    /// Extra positive-definite seeds for ω (POVM-element guesses).
    pub extra_seeds: Vec<ComplexMatrix>,
}

impl Default for MeasuredRenyiConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            tol: 1e-9,
            fd_step: 1e-5,
            regularization: 1e-9,
            extra_seeds: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeasuredRenyiResult {
    /// Certified lower bound on D_α^E (nats).
    pub value: f64,
    /// The maximizing ω found (positive definite).
    pub omega: ComplexMatrix,
    pub converged: bool,
}

/// Hermitian parameterization: dim real diagonal entries followed by
/// (re, im) pairs for the upper triangle.
fn hermitian_from_params(dim: usize, params: &[f64]) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        h[(i, i)] = num_complex::Complex::new(params[i], 0.0);
    }
    let mut idx = dim;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let z = num_complex::Complex::new(params[idx], params[idx + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            idx += 2;
        }
    }
    h
}

fn params_from_hermitian(h: &ComplexMatrix) -> Vec<f64> {
    let dim = h.dim();
    let mut p = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        p.push(h[(i, i)].re);
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            p.push(h[(i, j)].re);
            p.push(h[(i, j)].im);
        }
    }
    p
}

/// Variational objective (1/(α−1))(α ln Tr(ρ e^H) + (1−α) ln Tr(σ e^{α̂ H})).
fn measured_objective(
    alpha: f64,
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    h: &ComplexMatrix,
) -> f64 {
    let alpha_hat = alpha / (alpha - 1.0);
    let eig = eig_hermitian(h, 1e-7).expect("H Hermitian");
    let omega = eig.apply_to_eigenvalues(f64::exp);
    let omega_hat = eig.apply_to_eigenvalues(|l| (alpha_hat * l).exp());
    let t1 = rho.trace_product_re(&omega).max(1e-300);
    let t2 = sigma.trace_product_re(&omega_hat).max(1e-300);
    (alpha * t1.ln() + (1.0 - alpha) * t2.ln()) / (alpha - 1.0)
}

/// Lower bound on the measured α-Rényi divergence for α ∈ (0, 1), via
/// iterative ascent of the variational objective over ω = exp(H) > 0.
///
/// Any feasible ω yields a valid lower bound, so an approximate maximum
/// never overstates the divergence.
pub fn measured_renyi_divergence(
    alpha: f64,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    cfg: &MeasuredRenyiConfig,
) -> MeasuredRenyiResult {
    assert!(alpha > 0.0 && alpha < 1.0, "measured Rényi needs α in (0,1)");
    assert_eq!(rho.dim(), sigma.dim());
    let dim = rho.dim();
    let rho_r = rho.regularized(cfg.regularization);
    let sigma_r = sigma.regularized(cfg.regularization);
    let rho_m = rho_r.matrix();
    let sigma_m = sigma_r.matrix();

    let safe_log = |m: &ComplexMatrix| {
        matrix_function(m, MatrixFunction::Log, KernelPolicy::ZeroOnKernel).expect("PSD input")
    };
    // Seed with I, ρ, σ, the commuting-case optimum exp((α−1)(ln ρ − ln σ)),
    // and any caller-provided guesses.
    let ln_rho = safe_log(rho_m);
    let ln_sigma = safe_log(sigma_m);
    let mut seeds: Vec<ComplexMatrix> = vec![
        ComplexMatrix::zeros(dim),
        ln_rho.clone(),
        ln_sigma.clone(),
        ln_rho.sub(&ln_sigma).scale_re(alpha - 1.0),
    ];
    for s in &cfg.extra_seeds {
        let reg = s
            .symmetrized()
            .scale_re(1.0 - cfg.regularization)
            .add(&ComplexMatrix::identity(dim).scale_re(cfg.regularization / dim as f64));
        seeds.push(safe_log(&reg));
    }

    let eval = |params: &[f64]| {
        measured_objective(alpha, rho_m, sigma_m, &hermitian_from_params(dim, params))
    };

    let mut best_params = params_from_hermitian(&seeds[0]);
    let mut best_value = eval(&best_params);
    for s in &seeds[1..] {
        let p = params_from_hermitian(s);
        let v = eval(&p);
        if v > best_value {
            best_value = v;
            best_params = p;
        }
    }

    let n_params = dim * dim;
    let mut params = best_params;
    let mut value = best_value;
    let mut step = 1.0f64;
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        // central finite differences on the Hermitian parameter
        let mut grad = vec![0.0f64; n_params];
        for i in 0..n_params {
            let saved = params[i];
            params[i] = saved + cfg.fd_step;
            let fp = eval(&params);
            params[i] = saved - cfg.fd_step;
            let fm = eval(&params);
            params[i] = saved;
            grad[i] = (fp - fm) / (2.0 * cfg.fd_step);
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-12 {
            converged = true;
            break;
        }
        // step-halving line search
        let mut improved = false;
        let mut s = step;
        while s > 1e-12 {
            let trial: Vec<f64> =
                params.iter().zip(&grad).map(|(p, g)| p + s * g / gnorm).collect();
            let tv = eval(&trial);
            if tv > value {
                if (tv - value).abs() < cfg.tol {
                    converged = true;
                }
                params = trial;
                value = tv;
                improved = true;
                step = (s * 1.5).min(4.0);
                break;
            }
            s *= 0.5;
        }
        if !improved {
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    let h = hermitian_from_params(dim, &params);
    let omega = eig_hermitian(&h, 1e-7)
        .expect("H Hermitian")
        .apply_to_eigenvalues(f64::exp);
    MeasuredRenyiResult { value, omega, converged }
}

/// Weighted L_p norm ‖x‖_{p,σ} = Tr^{1/p}(|σ^{1/2p} x σ^{1/2p}|^p).
pub fn weighted_lp_norm(x: &ComplexMatrix, p: f64, sigma: &DensityMatrix) -> Result<f64> {
    assert!(p != 0.0, "p must be nonzero");
    let dev = x.hermiticity_deviation();
    if dev > 1e-8 {
        return Err(QcapError::NotHermitian { deviation: dev, tol: 1e-8 });
    }
    let sigma_eig = eig_hermitian(sigma.matrix(), 1e-8)?;
    if sigma_eig.min_eigenvalue() <= sigma_eig.kernel_cutoff() {
        return Err(QcapError::SingularArgument { eigenvalue: sigma_eig.min_eigenvalue() });
    }
    let weight = sigma_eig.apply_to_eigenvalues(|l| l.powf(1.0 / (2.0 * p)));
    let y = weight.matmul(x).matmul(&weight).symmetrized();
    let y_eig = eig_hermitian(&y, 1e-7)?;
    if p < 0.0 && y_eig.min_eigenvalue() <= y_eig.kernel_cutoff() {
        return Err(QcapError::SingularArgument { eigenvalue: y_eig.min_eigenvalue() });
    }
    let trace_pow: f64 = y_eig
        .eigenvalues
        .iter()
        .map(|&l| {
            let a = l.abs();
            if a == 0.0 { 0.0 } else { a.powf(p) }
        })
        .sum();
    Ok(trace_pow.powf(1.0 / p))
}
