//! Walk the eight-step inequality chain behind the second-order converse
//! on a concrete code, printing each step's two sides.

use qcap::bounds::{assembled_lower_bound, proof_chain_verify};
use qcap::codes::{basis_code, evaluate_code};
use qcap::states::{make_standard_channel, ChannelFamily};

fn main() {
    let channel = make_standard_channel(&ChannelFamily::Depolarizing { d: 2, p: 0.2 }).unwrap();
    let code = basis_code(2, 4, 2).unwrap();
    let perf = evaluate_code(&code, &channel).unwrap();
    println!("code: n = 2, M = 4, eps_max = {:.4}\n", perf.max_error);

    let (alpha, t) = (0.25, 1.0);
    let reports = proof_chain_verify(&code, &channel, alpha, t, 1e-9).unwrap();
    for r in &reports {
        println!("{:<44} lhs = {:>10.5}  rhs = {:>10.5}  slack = {:+.2e}", r.name, r.lhs, r.rhs, r.slack);
        assert!(r.holds, "{} failed", r.name);
    }

    // the assembled bound peaks near t* = sqrt(-ln(1-eps) / (n(d-1)))
    let eps = perf.max_error;
    let t_star = (-(1.0 - eps).ln() / (2.0 * 1.0)).sqrt();
    println!("\nt* = {t_star:.4}");
    for t in [0.05, 0.1, 0.2, t_star, 0.5, 1.0] {
        println!("  assembled bound at t = {t:.4}: {:.5}", assembled_lower_bound(t, eps, 2, 2, 4));
    }
}
