//! Config-driven experiment runner behind the `qcap` binary: parses a
//! JSON config, executes one task, and writes `<prefix>.report.json`
//! plus `<prefix>.summary.csv`. All stored quantities are in nats; any
//! base-2 conversion is display-only and lives in the binary.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{
    lemma5_check, proof_chain_verify, second_order_converse_check, theorem1_check, BoundReport,
};
use crate::capacity::{
    holevo_capacity, lemma2_certificate, uniqueness_probe, CapacityResult, SolverConfig,
};
use crate::codes::{
    basis_code, evaluate_code, goodish_random_code, pgm_decoder, random_codebook,
    ClassicalQuantumCode, CodePerformance, Codeword, EncoderKind,
};
use crate::error::{QcapError, Result};
use crate::hermitian::{tensor_product, ComplexMatrix};
use crate::states::{ChannelSpec, DensityMatrix, Ensemble, QuantumChannel};

/// Certificate gap a `certify` run must reach to exit 0.
pub const CERTIFICATE_GAP_TOL: f64 = 1e-5;
/// Max pairwise ω̄ trace distance a `uniqueness` run must stay under.
pub const UNIQUENESS_TOL: f64 = 1e-5;
/// POVM regularization used by the proof-chain task.
pub const PROOF_CHAIN_DELTA: f64 = 1e-9;

pub const PROOF_CHAIN_ALPHAS: [f64; 3] = [0.1, 0.25, 0.4];
pub const PROOF_CHAIN_TS: [f64; 3] = [0.1, 0.5, 1.0];

/// The (α, t) grid points where the hypercontractivity exponent
/// q = 1 + (α̂ − 1)e^{−t} stays positive (α̂ = α/(α−1)); the remaining
/// combinations are outside the proof's parameter region and are skipped.
pub fn chain_parameter_grid() -> Vec<(f64, f64)> {
    let mut grid = Vec::new();
    for &alpha in &PROOF_CHAIN_ALPHAS {
        for &t in &PROOF_CHAIN_TS {
            let alpha_hat = alpha / (alpha - 1.0);
            let q = 1.0 + (alpha_hat - 1.0) * (-t).exp();
            if q > 1e-9 {
                grid.push((alpha, t));
            }
        }
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Capacity,
    Certify,
    Uniqueness,
    Simulate,
    Theorem1,
    Theorem2,
    Lemma5,
    ProofChain,
}

impl Task {
    pub const ALL: [Task; 8] = [
        Task::Capacity,
        Task::Certify,
        Task::Uniqueness,
        Task::Simulate,
        Task::Theorem1,
        Task::Theorem2,
        Task::Lemma5,
        Task::ProofChain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Capacity => "capacity",
            Task::Certify => "certify",
            Task::Uniqueness => "uniqueness",
            Task::Simulate => "simulate",
            Task::Theorem1 => "theorem1",
            Task::Theorem2 => "theorem2",
            Task::Lemma5 => "lemma5",
            Task::ProofChain => "proof-chain",
        }
    }

    pub fn parse(s: &str) -> Result<Task> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Task::ALL.iter().map(|t| t.name()).collect();
                QcapError::Config(format!("unknown task '{s}'; expected one of {names:?}"))
            })
    }
}

fn default_n_values() -> Vec<usize> {
    vec![1]
}

fn default_trials() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(default = "default_n_values")]
    pub n_values: Vec<usize>,
    /// Code rates as fractions of the certified χ.
    #[serde(default)]
    pub rates: Option<Vec<f64>>,
    /// Explicit message counts (mutually exclusive with `rates`).
    #[serde(default)]
    pub m_values: Option<Vec<usize>>,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { n_values: default_n_values(), rates: None, m_values: None, trials: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub channel: ChannelSpec,
    /// Optional here so the CLI positional can supply it.
    #[serde(default)]
    pub task: Option<Task>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Output path prefix; `<prefix>.report.json` and `<prefix>.summary.csv`.
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| QcapError::Config(format!("{}: {e}", path.display())))
    }
}

/// One summary.csv row. Non-sweep tasks emit a single row reusing the
/// columns: capacity puts χ in lhs/rhs and the certificate gap in slack;
/// uniqueness puts the max pairwise ω̄ distance in lhs and its tolerance
/// in rhs.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub m: usize,
    pub eps_max: f64,
    pub eps_avg: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub lhs_per_n: f64,
}

impl SummaryRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n, self.m, self.eps_max, self.eps_avg, self.lhs, self.rhs, self.slack,
            self.lhs_per_n
        )
    }
}

pub struct RunOutcome {
    pub task: Task,
    pub report_path: PathBuf,
    pub summary_path: PathBuf,
    pub rows: Vec<SummaryRow>,
    /// true iff every asserted bound/invariant in the run held.
    pub all_hold: bool,
    pub failed_reports: usize,
    /// Headline entropic quantities in nats, for display only.
    pub headline: Vec<(String, f64)>,
}

fn derived_seed(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(stream)
}

#[derive(Debug, Clone, Copy)]
enum CodePlan {
    /// Full basis code with M = d^n (needs dim_in = dim_out).
    Basis,
    /// Random PGM code at the given fraction of the certified χ.
    Rate(f64),
    /// Random PGM code with an explicit message count.
    FixedM(usize),
}

#[derive(Debug, Clone, Copy)]
struct SweepPoint {
    n: usize,
    plan: CodePlan,
    trial: usize,
    seed: u64,
}

fn build_points(seed: u64, sweep: &SweepConfig) -> Result<Vec<SweepPoint>> {
    if sweep.rates.is_some() && sweep.m_values.is_some() {
        return Err(QcapError::Config("give either rates or m_values, not both".into()));
    }
    if sweep.n_values.is_empty() {
        return Err(QcapError::Config("sweep.n_values must be non-empty".into()));
    }
    if sweep.trials == 0 {
        return Err(QcapError::Config("sweep.trials must be positive".into()));
    }
    let plans: Vec<CodePlan> = match (&sweep.rates, &sweep.m_values) {
        (Some(rates), None) => {
            if rates.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
                return Err(QcapError::Config("rates must be positive and finite".into()));
            }
            rates.iter().map(|&r| CodePlan::Rate(r)).collect()
        }
        (None, Some(ms)) => {
            if ms.iter().any(|&m| m == 0) {
                return Err(QcapError::Config("m_values must be positive".into()));
            }
            ms.iter().map(|&m| CodePlan::FixedM(m)).collect()
        }
        _ => vec![CodePlan::Basis],
    };
    let mut points = Vec::new();
    let mut stream = 0u64;
    for &n in &sweep.n_values {
        if n == 0 {
            return Err(QcapError::Config("n_values must be positive".into()));
        }
        for &plan in &plans {
            for trial in 0..sweep.trials {
                stream += 1;
                points.push(SweepPoint { n, plan, trial, seed: derived_seed(seed, stream) });
            }
        }
    }
    Ok(points)
}

/// Random PGM code with a fixed message count (the rate-driven variant is
/// `goodish_random_code`).
fn fixed_m_code(
    n: &QuantumChannel,
    e: &Ensemble,
    blocklength: usize,
    m: usize,
    seed: u64,
) -> Result<ClassicalQuantumCode> {
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

fn make_code(
    channel: &QuantumChannel,
    cap: Option<&CapacityResult>,
    pt: &SweepPoint,
) -> Result<ClassicalQuantumCode> {
    match pt.plan {
        CodePlan::Basis => {
            if channel.dim_in() != channel.dim_out() {
                return Err(QcapError::Config(
                    "basis-code sweeps need dim_in = dim_out; give rates or m_values".into(),
                ));
            }
            let d = channel.dim_in();
            let m = d.checked_pow(pt.n as u32).ok_or(QcapError::DimensionOverflow {
                dim: usize::MAX,
                cap: crate::hermitian::DEFAULT_DIM_CAP,
            })?;
            basis_code(pt.n, m, d)
        }
        CodePlan::Rate(r) => {
            let cap = cap.expect("rate sweeps compute the capacity first");
            goodish_random_code(channel, &cap.ensemble, cap.chi, pt.n, r, pt.seed)
        }
        CodePlan::FixedM(m) => {
            let cap = cap.expect("m sweeps compute the capacity first");
            fixed_m_code(channel, &cap.ensemble, pt.n, m, pt.seed)
        }
    }
}

fn plan_json(plan: CodePlan) -> Value {
    match plan {
        CodePlan::Basis => json!({"kind": "basis"}),
        CodePlan::Rate(r) => json!({"kind": "rate", "rate": r}),
        CodePlan::FixedM(m) => json!({"kind": "fixed-m", "m": m}),
    }
}

struct PointOutput {
    detail: Value,
    row: SummaryRow,
    holds: bool,
    failed: usize,
}

fn row_from_report(
    pt: &SweepPoint,
    m: usize,
    perf: &CodePerformance,
    r: &BoundReport,
) -> SummaryRow {
    SummaryRow {
        n: pt.n,
        m,
        eps_max: perf.max_error,
        eps_avg: perf.avg_error,
        lhs: r.lhs,
        rhs: r.rhs,
        slack: r.slack,
        lhs_per_n: r.lhs / pt.n as f64,
    }
}

fn run_point(
    task: Task,
    channel: &QuantumChannel,
    cap: Option<&CapacityResult>,
    pt: &SweepPoint,
) -> Result<PointOutput> {
    let code = make_code(channel, cap, pt)?;
    let m = code.num_messages();
    let perf = evaluate_code(&code, channel)?;
    let base = json!({
        "n": pt.n,
        "M": m,
        "trial": pt.trial,
        "seed": pt.seed,
        "plan": plan_json(pt.plan),
        "eps_max": perf.max_error,
        "eps_avg": perf.avg_error,
    });
    let mut detail = base.as_object().cloned().expect("object literal");
    match task {
        Task::Simulate => {
            let cap = cap.expect("simulate computes the capacity first");
            let lhs = (m as f64).ln();
            let rhs = cap.chi * pt.n as f64;
            detail.insert("per_message".into(), json!(perf.per_message));
            Ok(PointOutput {
                detail: Value::Object(detail),
                row: SummaryRow {
                    n: pt.n,
                    m,
                    eps_max: perf.max_error,
                    eps_avg: perf.avg_error,
                    lhs,
                    rhs,
                    slack: rhs - lhs,
                    lhs_per_n: lhs / pt.n as f64,
                },
                holds: true,
                failed: 0,
            })
        }
        Task::Theorem1 | Task::Theorem2 | Task::Lemma5 => {
            let report = match task {
                Task::Theorem1 => {
                    theorem1_check(&code, channel, cap.expect("theorem1 needs the capacity"))?
                }
                Task::Theorem2 => second_order_converse_check(&code, channel)?,
                _ => lemma5_check(&code, channel, cap.expect("lemma5 needs the capacity"))?,
            };
            let row = row_from_report(pt, m, &perf, &report);
            let holds = report.holds;
            detail.insert("report".into(), serde_json::to_value(&report)?);
            Ok(PointOutput {
                detail: Value::Object(detail),
                row,
                holds,
                failed: usize::from(!holds),
            })
        }
        Task::ProofChain => {
            let mut all_steps = Vec::new();
            let mut worst: Option<BoundReport> = None;
            let mut failed = 0;
            for (alpha, t) in chain_parameter_grid() {
                let steps = proof_chain_verify(&code, channel, alpha, t, PROOF_CHAIN_DELTA)?;
                failed += steps.iter().filter(|s| !s.holds).count();
                for s in &steps {
                    let replace = match &worst {
                        None => true,
                        Some(w) => s.slack < w.slack,
                    };
                    if replace {
                        worst = Some(s.clone());
                    }
                }
                all_steps.push(json!({
                    "alpha": alpha,
                    "t": t,
                    "steps": serde_json::to_value(&steps)?,
                }));
            }
            let worst = worst.ok_or_else(|| {
                QcapError::Config("proof-chain parameter grid is empty".into())
            })?;
            let row = row_from_report(pt, m, &perf, &worst);
            detail.insert("grid".into(), Value::Array(all_steps));
            detail.insert("worst_step".into(), serde_json::to_value(&worst)?);
            Ok(PointOutput {
                detail: Value::Object(detail),
                row,
                holds: failed == 0,
                failed,
            })
        }
        _ => unreachable!("non-sweep tasks handled in run_experiment"),
    }
}

fn write_artifacts(prefix: &str, report: &Value, rows: &[SummaryRow]) -> Result<(PathBuf, PathBuf)> {
    let report_path = PathBuf::from(format!("{prefix}.report.json"));
    let summary_path = PathBuf::from(format!("{prefix}.summary.csv"));
    if let Some(parent) = report_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut json_text = serde_json::to_string_pretty(report)?;
    json_text.push('\n');
    fs::write(&report_path, json_text)?;
    let mut csv = String::from("n,M,eps_max,eps_avg,lhs,rhs,slack,lhs_per_n\n");
    for row in rows {
        csv.push_str(&row.csv_line());
        csv.push('\n');
    }
    fs::write(&summary_path, csv)?;
    Ok((report_path, summary_path))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let task = cfg
        .task
        .ok_or_else(|| QcapError::Config("no task given (config field or CLI argument)".into()))?;
    let channel = cfg.channel.build()?;
    let prefix = cfg.output.clone().unwrap_or_else(|| "qcap-run".into());
    let sweep = cfg.sweep.clone().unwrap_or_default();

    // The top-level seed governs the whole run, including the solver.
    let mut solver = cfg.solver.clone();
    solver.seed = cfg.seed;

    let uses_random_codes = sweep.rates.is_some() || sweep.m_values.is_some();
    let needs_cap = uses_random_codes
        || matches!(
            task,
            Task::Capacity | Task::Certify | Task::Simulate | Task::Theorem1 | Task::Lemma5
        );
    let cap: Option<CapacityResult> = if needs_cap {
        let c = holevo_capacity(&channel, &solver)?;
        if !c.converged {
            return Err(QcapError::NotConverged {
                iterations: c.iterations,
                gap: c.certificate_gap,
            });
        }
        Some(c)
    } else {
        None
    };

    let (report, rows, all_hold, failed, mut headline): (
        Value,
        Vec<SummaryRow>,
        bool,
        usize,
        Vec<(String, f64)>,
    ) = match task {
        Task::Capacity => {
            let cap = cap.as_ref().expect("computed above");
            let report = json!({
                "task": task.name(),
                "seed": cfg.seed,
                "capacity": serde_json::to_value(cap)?,
            });
            let rows = vec![SummaryRow {
                n: 1,
                m: cap.ensemble.states.len(),
                eps_max: 0.0,
                eps_avg: 0.0,
                lhs: cap.chi,
                rhs: cap.chi,
                slack: cap.certificate_gap,
                lhs_per_n: cap.chi,
            }];
            let headline = vec![
                ("chi".to_string(), cap.chi),
                ("certificate_gap".to_string(), cap.certificate_gap),
            ];
            (report, rows, true, 0, headline)
        }
        Task::Certify => {
            let cap = cap.as_ref().expect("computed above");
            let cert = lemma2_certificate(
                &channel,
                cap.chi,
                &cap.omega_bar,
                solver.probes,
                derived_seed(cfg.seed, 1),
            );
            let ok = cert.gap <= CERTIFICATE_GAP_TOL;
            let report = json!({
                "task": task.name(),
                "seed": cfg.seed,
                "chi": cap.chi,
                "probes": solver.probes,
                "certificate": {
                    "gap": cert.gap,
                    "best_divergence": cert.best_divergence,
                    "tol": CERTIFICATE_GAP_TOL,
                    "holds": ok,
                },
                "capacity": serde_json::to_value(cap)?,
            });
            let rows = vec![SummaryRow {
                n: 1,
                m: cap.ensemble.states.len(),
                eps_max: 0.0,
                eps_avg: 0.0,
                lhs: cap.chi,
                rhs: cap.chi + cert.gap,
                slack: cert.gap,
                lhs_per_n: cap.chi,
            }];
            let headline = vec![
                ("chi".to_string(), cap.chi),
                ("certificate_gap".to_string(), cert.gap),
            ];
            (report, rows, ok, usize::from(!ok), headline)
        }
        Task::Uniqueness => {
            let restarts = cfg.sweep.as_ref().map(|s| s.trials).unwrap_or(20).max(2);
            let max_dist = uniqueness_probe(&channel, restarts, cfg.seed)?;
            let ok = max_dist <= UNIQUENESS_TOL;
            let report = json!({
                "task": task.name(),
                "seed": cfg.seed,
                "restarts": restarts,
                "max_pairwise_trace_distance": max_dist,
                "tol": UNIQUENESS_TOL,
                "holds": ok,
            });
            let rows = vec![SummaryRow {
                n: 1,
                m: restarts,
                eps_max: 0.0,
                eps_avg: 0.0,
                lhs: max_dist,
                rhs: UNIQUENESS_TOL,
                slack: UNIQUENESS_TOL - max_dist,
                lhs_per_n: max_dist,
            }];
            (report, rows, ok, usize::from(!ok), Vec::new())
        }
        Task::Simulate | Task::Theorem1 | Task::Theorem2 | Task::Lemma5 | Task::ProofChain => {
            let points = build_points(cfg.seed, &sweep)?;
            let outputs: Vec<Result<PointOutput>> = points
                .par_iter()
                .map(|pt| run_point(task, &channel, cap.as_ref(), pt))
                .collect();
            let mut details = Vec::with_capacity(outputs.len());
            let mut rows = Vec::with_capacity(outputs.len());
            let mut all_hold = true;
            let mut failed = 0;
            for out in outputs {
                let out = out?;
                all_hold &= out.holds;
                failed += out.failed;
                details.push(out.detail);
                rows.push(out.row);
            }
            let report = json!({
                "task": task.name(),
                "seed": cfg.seed,
                "chi": cap.as_ref().map(|c| c.chi),
                "sweep": serde_json::to_value(&sweep)?,
                "points": details,
            });
            let min_slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
            let mut headline = Vec::new();
            if let Some(c) = &cap {
                headline.push(("chi".to_string(), c.chi));
            }
            headline.push(("min_slack".to_string(), min_slack));
            (report, rows, all_hold, failed, headline)
        }
    };

    headline.retain(|(_, v)| v.is_finite());
    let (report_path, summary_path) = write_artifacts(&prefix, &report, &rows)?;
    Ok(RunOutcome { task, report_path, summary_path, rows, all_hold, failed_reports: failed, headline })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::FamilySpec;

    fn tmp_prefix(name: &str) -> String {
        let dir = std::env::temp_dir().join("qcap-experiment-tests");
        fs::create_dir_all(&dir).unwrap();
        dir.join(name).to_string_lossy().into_owned()
    }

    fn depolarizing_cfg(task: Task, prefix: &str) -> ExperimentConfig {
        ExperimentConfig {
            channel: ChannelSpec::Family(FamilySpec::Depolarizing { d: 2, p: 0.5 }),
            task: Some(task),
            sweep: None,
            seed: 7,
            solver: SolverConfig::default(),
            output: Some(tmp_prefix(prefix)),
        }
    }

    #[test]
    fn grid_keeps_only_positive_q() {
        let grid = chain_parameter_grid();
        assert!(!grid.is_empty());
        for (alpha, t) in &grid {
            let alpha_hat = alpha / (alpha - 1.0);
            assert!(1.0 + (alpha_hat - 1.0) * (-t).exp() > 0.0);
        }
        // t = 0.1 excludes every shipped α: e^{-0.1} > 1 - 0.1
        assert!(grid.iter().all(|&(_, t)| t > 0.1));
    }

    #[test]
    fn capacity_task_matches_depolarizing_oracle() {
        let cfg = depolarizing_cfg(Task::Capacity, "cap-dep");
        let out = run_experiment(&cfg).unwrap();
        assert!(out.all_hold);
        // χ(depolarizing(2, p)) = ln 2 − h(p/2)
        let q: f64 = 0.25;
        let oracle = 2.0f64.ln() + q * q.ln() + (1.0 - q) * (1.0 - q).ln();
        assert!((out.rows[0].lhs - oracle).abs() < 1e-5, "chi = {}", out.rows[0].lhs);
        assert!(out.report_path.exists() && out.summary_path.exists());
    }

    #[test]
    fn theorem1_basis_sweep_matches_closed_form() {
        let mut cfg = ExperimentConfig {
            channel: ChannelSpec::Family(FamilySpec::Identity { d: 2 }),
            task: Some(Task::Theorem1),
            sweep: Some(SweepConfig {
                n_values: vec![1, 2, 3],
                rates: None,
                m_values: None,
                trials: 1,
            }),
            seed: 0,
            solver: SolverConfig::default(),
            output: Some(tmp_prefix("thm1-basis")),
        };
        cfg.solver.probes = 2000;
        let out = run_experiment(&cfg).unwrap();
        assert!(out.all_hold);
        assert_eq!(out.rows.len(), 3);
        for row in &out.rows {
            assert!(row.lhs.abs() < 1e-7);
            assert!((row.slack - 2.0f64.ln()).abs() < 1e-6, "slack = {}", row.slack);
            assert_eq!(row.m, 1 << row.n);
        }
    }

    #[test]
    fn sweep_row_count_and_reproducibility() {
        let mut cfg = depolarizing_cfg(Task::Theorem2, "thm2-rows");
        cfg.sweep = Some(SweepConfig {
            n_values: vec![1, 2],
            rates: Some(vec![0.5, 0.9]),
            m_values: None,
            trials: 2,
        });
        let out1 = run_experiment(&cfg).unwrap();
        assert!(out1.all_hold);
        assert_eq!(out1.rows.len(), 2 * 2 * 2);
        let report1 = fs::read(&out1.report_path).unwrap();
        let csv1 = fs::read(&out1.summary_path).unwrap();
        let out2 = run_experiment(&cfg).unwrap();
        assert_eq!(report1, fs::read(&out2.report_path).unwrap());
        assert_eq!(csv1, fs::read(&out2.summary_path).unwrap());
    }

    #[test]
    fn rejects_conflicting_sweep_and_missing_task() {
        let mut cfg = depolarizing_cfg(Task::Simulate, "bad-sweep");
        cfg.sweep = Some(SweepConfig {
            n_values: vec![1],
            rates: Some(vec![0.5]),
            m_values: Some(vec![2]),
            trials: 1,
        });
        assert!(matches!(run_experiment(&cfg), Err(QcapError::Config(_))));

        let mut cfg = depolarizing_cfg(Task::Capacity, "no-task");
        cfg.task = None;
        assert!(matches!(run_experiment(&cfg), Err(QcapError::Config(_))));
    }

    #[test]
    fn proof_chain_task_holds_on_fixed_m_codes() {
        let mut cfg = depolarizing_cfg(Task::ProofChain, "chain-m");
        cfg.sweep = Some(SweepConfig {
            n_values: vec![1, 2],
            rates: None,
            m_values: Some(vec![2]),
            trials: 1,
        });
        let out = run_experiment(&cfg).unwrap();
        assert!(out.all_hold, "failed step reports: {}", out.failed_reports);
        assert_eq!(out.rows.len(), 2);
    }

    #[test]
    fn task_names_roundtrip() {
        for t in Task::ALL {
            assert_eq!(Task::parse(t.name()).unwrap(), t);
        }
        assert!(Task::parse("bogus").is_err());
        // serde uses the same kebab-case names the CLI accepts
        let v = serde_json::to_value(Task::ProofChain).unwrap();
        assert_eq!(v, serde_json::json!("proof-chain"));
    }
}
