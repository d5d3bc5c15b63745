//! Build a random block code, decode it with the pretty good measurement,
//! and compare the binary case against the Helstrom optimum.

use qcap::codes::{evaluate_code, goodish_random_code, pgm_decoder, ClassicalQuantumCode, Codeword, EncoderKind};
use qcap::capacity::{holevo_capacity, SolverConfig};
use qcap::hermitian::C64;
use qcap::states::{make_standard_channel, ChannelFamily, DensityMatrix, QuantumChannel};

fn binary_pgm_vs_helstrom() {
    let theta = (0.5f64).acos();
    let psi1 = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let psi2 = DensityMatrix::pure(&[C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)]);
    let states = vec![psi1, psi2];
    let decoder = pgm_decoder(&states, &[0.5, 0.5]).unwrap();
    let code = ClassicalQuantumCode::new(
        1,
        states.iter().cloned().map(|s| Codeword::Block(vec![s])).collect(),
        decoder,
        EncoderKind::DeterministicBlock,
    )
    .unwrap();
    let perf = evaluate_code(&code, &QuantumChannel::identity(2)).unwrap();
    // Helstrom: (1 − √(1 − |⟨ψ1|ψ2⟩|²)) / 2; PGM coincides for two
    // equal-prior pure states
    let helstrom = (1.0 - (1.0f64 - 0.25).sqrt()) / 2.0;
    println!("binary overlap 1/2: PGM avg error = {:.6}, Helstrom = {:.6}", perf.avg_error, helstrom);
    assert!((perf.avg_error - helstrom).abs() < 1e-8);
}

fn main() {
    binary_pgm_vs_helstrom();

    let channel = make_standard_channel(&ChannelFamily::Depolarizing { d: 2, p: 0.1 }).unwrap();
    let cap = holevo_capacity(&channel, &SolverConfig::default()).unwrap();
    println!("chi = {:.6} nats", cap.chi);

    for n in 1..=5 {
        let code = goodish_random_code(&channel, &cap.ensemble, cap.chi, n, 0.5, 99).unwrap();
        let perf = evaluate_code(&code, &channel).unwrap();
        println!(
            "n = {n}: M = {:>2}, max error = {:.4}, avg error = {:.4}",
            code.num_messages(),
            perf.max_error,
            perf.avg_error
        );
    }
}
