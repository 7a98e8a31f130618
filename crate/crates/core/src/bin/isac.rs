use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use isac_core::experiment::{self, ExperimentConfig, SolverChoice, SolverId, TrialStatus};
use isac_core::sca::{PowerConstraint, SolveResult};
use isac_core::IsacError;

const EXIT_CONFIG: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_NONCONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "isac", version, about = "ISAC beamforming: sum rate versus CRLB trade-off")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one sampled instance and print its metrics as JSON.
    Solve(Common),
    /// Run the configured sweep and write CSV plus a JSON summary.
    Sweep(Common),
    /// Run the invariant suite on freshly solved instances.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML). Defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed of the instance for `solve`, first seed otherwise.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// CSV path for `sweep`, JSON report path for `solve` and `verify`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    solver: Option<SolverChoice>,
    #[arg(long, value_enum)]
    power_constraint: Option<PowerArg>,
    /// Treat hitting the iteration cap as an error (exit code 3).
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PowerArg {
    Total,
    PerAntenna,
}

impl From<PowerArg> for PowerConstraint {
    fn from(p: PowerArg) -> Self {
        match p {
            PowerArg::Total => PowerConstraint::Total,
            PowerArg::PerAntenna => PowerConstraint::PerAntenna,
        }
    }
}

fn load(args: &Common) -> Result<ExperimentConfig, IsacError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if let Some(solver) = args.solver {
        cfg.solver = solver;
    }
    if let Some(p) = args.power_constraint {
        cfg.power_constraint = Some(p.into());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(path: Option<&PathBuf>, value: &serde_json::Value) -> Result<(), IsacError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| IsacError::Io(e.into()))?;
    match path {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => writeln!(std::io::stdout(), "{text}")?,
    }
    Ok(())
}

fn solve_cmd(args: &Common) -> Result<u8, IsacError> {
    let cfg = load(args)?;
    let scene = cfg.scene_spec(cfg.base_seed).build()?;
    let weights = cfg.weights()?;
    let solver_cfg = cfg.solver_config();
    let ids: &[SolverId] = match cfg.solver {
        SolverChoice::Full => &[SolverId::Full],
        SolverChoice::Lowdim => &[SolverId::Lowdim],
        SolverChoice::Both => &[SolverId::Full, SolverId::Lowdim],
    };
    let mut runs = Vec::new();
    let mut stalled = false;
    for &id in ids {
        let (result, status): (SolveResult, TrialStatus) = match id.run(&scene, &weights, &solver_cfg) {
            Ok(r) => (r, TrialStatus::Converged),
            Err(IsacError::NonConvergence { result, .. }) => {
                stalled = true;
                (*result, TrialStatus::MaxIters)
            }
            Err(e) => return Err(e),
        };
        runs.push(serde_json::json!({
            "solver": id.as_str(),
            "status": status.as_str(),
            "seed": cfg.base_seed,
            "sum_rate_nats": result.sum_rate,
            "crlb_trace": finite_or_null(result.crlb_trace),
            "objective": result.objective,
            "iterations": result.iterations,
            "power": result.beamformer.power(),
            "wall_ms": result.timings.total_ms(),
            "per_iteration_ms": result.per_iteration_ms(),
        }));
    }
    emit(args.out.as_ref(), &serde_json::Value::Array(runs))?;
    Ok(if stalled && args.strict { EXIT_NONCONVERGED } else { 0 })
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() { serde_json::json!(x) } else { serde_json::Value::Null }
}

fn sweep_cmd(args: &Common) -> Result<u8, IsacError> {
    let cfg = load(args)?;
    let output = experiment::run_experiment(&cfg)?;
    match &cfg.out {
        Some(path) => {
            let json = experiment::write_outputs(&output, path)?;
            eprintln!("wrote {} and {}", path.display(), json.display());
        }
        None => experiment::write_csv(&output.records, std::io::stdout().lock())?,
    }
    let failed = output.records.iter().filter(|r| r.status == TrialStatus::Failed).count();
    let stalled = output.records.iter().filter(|r| r.status == TrialStatus::MaxIters).count();
    if failed + stalled > 0 {
        eprintln!("{failed} failed and {stalled} non-converged of {} trials", output.records.len());
    }
    Ok(if stalled > 0 && args.strict { EXIT_NONCONVERGED } else { 0 })
}

fn verify_cmd(args: &Common) -> Result<u8, IsacError> {
    let cfg = load(args)?;
    let report = experiment::verify(&cfg)?;
    for c in &report.checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        let detail = c.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default();
        eprintln!("{mark} {} value={:e} threshold={:e}{detail}", c.name, c.value, c.threshold);
    }
    if let Some(path) = &args.out {
        let value = serde_json::to_value(&report).map_err(|e| IsacError::Io(e.into()))?;
        emit(Some(path), &value)?;
    }
    let failures = report.failures().count();
    eprintln!("{} checks, {failures} failed", report.checks.len());
    Ok(if failures > 0 { EXIT_VERIFY } else { 0 })
}

fn run(cli: &Cli) -> u8 {
    let outcome = match &cli.command {
        Command::Solve(a) => solve_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Verify(a) => verify_cmd(a),
    };
    match outcome {
        Ok(code) => code,
        Err(IsacError::NonConvergence { iterations, .. }) => {
            eprintln!("error: no convergence after {iterations} iterations");
            EXIT_NONCONVERGED
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(&Cli::parse()))
}
