use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qcap::experiment::{run_experiment, ExperimentConfig, Task};
use qcap::QcapError;

const EXIT_CODE_HELP: &str = "Exit codes:
  0  success; every asserted bound and invariant held
  1  a checked bound or invariant failed
  2  configuration error (bad config file, task, or parameters)
  3  dimension exceeds a configured cap
  4  solver did not converge
  5  other runtime error";

#[derive(Parser)]
#[command(
    name = "qcap",
    about = "Capacities, certificates, codes, and converse bounds for quantum channels",
    after_help = EXIT_CODE_HELP
)]
struct Cli {
    /// Task: capacity | certify | uniqueness | simulate | theorem1 |
    /// theorem2 | lemma5 | proof-chain
    task: String,

    /// JSON experiment config
    #[arg(long)]
    config: PathBuf,

    /// Override the config's seed
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads for parallel sweeps
    #[arg(long)]
    jobs: Option<usize>,

    /// Override the config's output prefix
    #[arg(long)]
    out: Option<String>,

    /// Display entropic quantities in bits (report files stay in nats)
    #[arg(long)]
    bits: bool,
}

fn exit_code_for(e: &QcapError) -> u8 {
    match e {
        QcapError::Config(_) | QcapError::BadParameter(_) | QcapError::ParameterOutOfRange(_)
        | QcapError::Json(_) => 2,
        QcapError::DimensionOverflow { .. } | QcapError::EnumerationTooLarge { .. } => 3,
        QcapError::NotConverged { .. } => 4,
        _ => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.jobs {
        // ignore the error if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
    }

    let task = match Task::parse(&cli.task) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut cfg = match ExperimentConfig::from_file(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    cfg.task = Some(task);
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.out.is_some() {
        cfg.output = cli.out;
    }

    match run_experiment(&cfg) {
        Ok(out) => {
            let (scale, unit) = if cli.bits {
                (std::f64::consts::LN_2.recip(), "bits")
            } else {
                (1.0, "nats")
            };
            for (name, value) in &out.headline {
                println!("{name} = {:.9} {unit}", value * scale);
            }
            println!(
                "{} summary rows, {} failed reports",
                out.rows.len(),
                out.failed_reports
            );
            println!("wrote {}", out.report_path.display());
            println!("wrote {}", out.summary_path.display());
            if out.all_hold {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
