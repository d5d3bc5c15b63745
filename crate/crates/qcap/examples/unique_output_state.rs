//! Optimal input ensembles are not unique, but the averaged output state
//! ω̄ is. Restart the solver from independent random seeds and measure how
//! far apart the returned ω̄'s land.

use qcap::capacity::uniqueness_probe;
use qcap::hermitian::C64;
use qcap::states::{make_standard_channel, ChannelFamily, DensityMatrix};

fn main() {
    let dep = make_standard_channel(&ChannelFamily::Depolarizing { d: 2, p: 0.3 }).unwrap();
    let d1 = uniqueness_probe(&dep, 8, 42).unwrap();
    println!("depolarizing(2, 0.3): max pairwise ||omega_bar||_tr over 8 restarts = {d1:.3e}");

    // cq channel with two signal states at overlap 1/2
    let theta = (0.5f64).acos();
    let signals = vec![
        DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
        DensityMatrix::pure(&[C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)]),
    ];
    let cq = make_standard_channel(&ChannelFamily::Cq { signals, povm: None }).unwrap();
    let d2 = uniqueness_probe(&cq, 8, 42).unwrap();
    println!("cq overlap 0.5:       max pairwise ||omega_bar||_tr over 8 restarts = {d2:.3e}");

    assert!(d1 <= 1e-5 && d2 <= 1e-5);
}
