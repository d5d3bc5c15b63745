//! Drive a bound sweep through the same runner the `qcap` binary uses and
//! read back the CSV it writes.

use qcap::capacity::SolverConfig;
use qcap::experiment::{run_experiment, ExperimentConfig, SweepConfig, Task};
use qcap::states::{ChannelSpec, FamilySpec};

fn main() {
    let prefix = std::env::temp_dir().join("qcap-sweep-example");
    let cfg = ExperimentConfig {
        channel: ChannelSpec::Family(FamilySpec::Depolarizing { d: 2, p: 0.1 }),
        task: Some(Task::Theorem1),
        sweep: Some(SweepConfig {
            n_values: vec![1, 2, 3, 4],
            rates: Some(vec![0.5]),
            m_values: None,
            trials: 3,
        }),
        seed: 2024,
        solver: SolverConfig::default(),
        output: Some(prefix.to_string_lossy().into_owned()),
    };

    let out = run_experiment(&cfg).unwrap();
    println!("all bounds hold: {}", out.all_hold);
    println!("report:  {}", out.report_path.display());
    println!("summary: {}\n", out.summary_path.display());
    print!("{}", std::fs::read_to_string(&out.summary_path).unwrap());
    assert!(out.all_hold);
    assert_eq!(out.rows.len(), 4 * 3);
}
