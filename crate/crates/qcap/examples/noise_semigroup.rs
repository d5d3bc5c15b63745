//! The depolarizing-type semigroup maps used by the converse proof:
//! Ψ_t dominates Φ_{t,σ} in the Löwner order, and Ψ_t^⊗n(I) has a closed
//! form that tensorizes.

use qcap::bounds::{semigroup_apply, semigroup_product_apply, SemigroupMap};
use qcap::hermitian::{loewner_leq, ComplexMatrix};
use qcap::states::DensityMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(3);

    for trial in 0..5 {
        let d = rng.gen_range(2..=4);
        let t = rng.gen_range(0.05..2.0);
        let sigma = DensityMatrix::random(d, &mut rng);
        let e = DensityMatrix::random_pure(d, &mut rng).matrix().clone();

        let psi = semigroup_apply(&SemigroupMap::psi(d, t), &e).unwrap();
        let phi = semigroup_apply(&SemigroupMap::phi(sigma, t), &e).unwrap();
        let dominated = loewner_leq(&phi, &psi, 1e-10);
        println!("trial {trial}: d = {d}, t = {t:.3}, Psi >= Phi: {dominated}");
        assert!(dominated);
    }

    // Psi^⊗n(I) = (e^{−t} + d(1−e^{−t}))^n I
    let (d, n, t) = (2usize, 3usize, 0.7f64);
    let maps: Vec<SemigroupMap> = (0..n).map(|_| SemigroupMap::psi(d, t)).collect();
    let total = d.pow(n as u32);
    let out = semigroup_product_apply(&maps, &ComplexMatrix::identity(total)).unwrap();
    let scalar = ((-t).exp() + d as f64 * (1.0 - (-t).exp())).powi(n as i32);
    let diff = out.max_norm_diff(&ComplexMatrix::identity(total).scale_re(scalar));
    println!("\nPsi^(x{n})(I) vs closed form ({scalar:.6} I): max deviation = {diff:.2e}");
    assert!(diff < 1e-10);
}
