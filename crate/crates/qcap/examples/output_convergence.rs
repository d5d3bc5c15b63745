//! Output-state convergence for codes at a fixed fraction of capacity:
//! D(ω_n‖ω̄^⊗n) ≤ n·χ + ln 2 − (1−ε)·ln M, and the normalized divergence
//! (1/n)·D should shrink as the blocklength grows.

use qcap::bounds::theorem1_check;
use qcap::capacity::{holevo_capacity, SolverConfig};
use qcap::codes::goodish_random_code;
use qcap::states::{make_standard_channel, ChannelFamily};

fn main() {
    let channel = make_standard_channel(&ChannelFamily::Depolarizing { d: 2, p: 0.1 }).unwrap();
    let cap = holevo_capacity(&channel, &SolverConfig::default()).unwrap();
    println!("chi = {:.6} nats\n", cap.chi);
    println!("{:>2} {:>4} {:>10} {:>10} {:>10} {:>10}", "n", "M", "lhs", "rhs", "slack", "lhs/n");

    for n in 1..=5 {
        // median of a few random codebooks at rate 0.5 chi
        let mut per_n: Vec<f64> = Vec::new();
        let mut last = None;
        for trial in 0..5u64 {
            let code =
                goodish_random_code(&channel, &cap.ensemble, cap.chi, n, 0.5, 1000 * n as u64 + trial)
                    .unwrap();
            let report = theorem1_check(&code, &channel, &cap).unwrap();
            assert!(report.holds);
            per_n.push(report.lhs / n as f64);
            last = Some((code.num_messages(), report));
        }
        per_n.sort_by(f64::total_cmp);
        let (m, report) = last.unwrap();
        println!(
            "{:>2} {:>4} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            n,
            m,
            report.lhs,
            report.rhs,
            report.slack,
            per_n[per_n.len() / 2]
        );
    }
}
