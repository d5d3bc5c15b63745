//! Divergence ordering on random state pairs: measured Rényi ≤ Petz Rényi
//! at the same order, and Petz at α → 1 recovers the relative entropy.

use qcap::entropy::{
    measured_renyi_divergence, petz_renyi_divergence, relative_entropy, MeasuredRenyiConfig,
};
use qcap::states::DensityMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let cfg = MeasuredRenyiConfig::default();

    println!("{:>5} {:>12} {:>12} {:>12}", "alpha", "measured", "petz", "D(rho||sig)");
    for _ in 0..4 {
        let rho = DensityMatrix::random(3, &mut rng);
        let sigma = DensityMatrix::random(3, &mut rng);
        let d = relative_entropy(&rho, &sigma).nats();
        for alpha in [0.3, 0.6, 0.9] {
            let meas = measured_renyi_divergence(alpha, &rho, &sigma, &cfg);
            let petz = petz_renyi_divergence(alpha, &rho, &sigma).nats();
            assert!(meas.value <= petz + 1e-7, "measured must not exceed Petz");
            assert!(petz <= d + 1e-7, "Petz below 1 must not exceed relative entropy");
            println!("{alpha:>5.2} {:>12.6} {petz:>12.6} {d:>12.6}", meas.value);
        }
        // α → 1 bracket
        let lo = petz_renyi_divergence(1.0 - 1e-4, &rho, &sigma).nats();
        let hi = petz_renyi_divergence(1.0 + 1e-4, &rho, &sigma).nats();
        assert!(lo - 1e-3 <= d && d <= hi + 1e-3);
        println!("      bracket at alpha = 1 +/- 1e-4: [{lo:.6}, {hi:.6}]\n");
    }
}
