//! Configuration-driven sweeps over seeded scenes, CSV/JSON emission and the
//! verification suite behind `isac verify`.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, obs_residuals, SignalAverage, VerificationReport};
use crate::error::{IsacError, Result};
use crate::lowdim::solve_ld;
use crate::metrics::{fim, objective, Weights};
use crate::model::QFault;
use crate::sca::{solve, PowerConstraint, SolveResult, SolverConfig};
use crate::scene::{build_steering_set, ArrayGeometry, ElevationSampling, Scene, SceneSpec};

pub const CSV_HEADER: &str = "sweep_axis,sweep_value,seed,solver,status,sum_rate_nats,crlb_trace,objective,iterations,wall_ms";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Communication weight δ_c.
    #[default]
    WeightComm,
    /// Number of sensing streams N_s.
    SensingStreams,
    /// Number of transmit antennas, arranged as a near-square array.
    Antennas,
    Users,
    PowerDbm,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::WeightComm => "weight-comm",
            Self::SensingStreams => "sensing-streams",
            Self::Antennas => "antennas",
            Self::Users => "users",
            Self::PowerDbm => "power-dbm",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, Self::SensingStreams | Self::Antennas | Self::Users)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    #[default]
    Full,
    Lowdim,
    Both,
}

impl SolverChoice {
    fn ids(self) -> &'static [SolverId] {
        match self {
            Self::Full => &[SolverId::Full],
            Self::Lowdim => &[SolverId::Lowdim],
            Self::Both => &[SolverId::Full, SolverId::Lowdim],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverId {
    Full,
    Lowdim,
}

impl SolverId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::Lowdim => "lowdim",
        }
    }

    pub fn run(self, scene: &Scene, weights: &Weights, cfg: &SolverConfig) -> Result<SolveResult> {
        match self {
            Self::Full => solve(scene, weights, cfg),
            Self::Lowdim => solve_ld(scene, weights, cfg),
        }
    }
}

/// Flat experiment document. Scene keys mirror [`SceneSpec`]; solver keys are
/// optional overrides of [`SolverConfig`] defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub tx_horizontal: usize,
    pub tx_vertical: usize,
    pub rx_horizontal: usize,
    pub rx_vertical: usize,
    pub users: usize,
    pub targets: usize,
    pub slots: usize,
    pub power_dbm: f64,
    pub noise_radar_dbm: f64,
    pub noise_comm_dbm: f64,
    pub elevation_sampling: ElevationSampling,
    pub weight_comm: f64,
    pub weight_sensing: f64,

    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    pub solver: SolverChoice,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_constraint: Option<PowerConstraint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sensing_streams: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_safety: Option<f64>,

    /// CSV destination; the summary goes next to it with a `.json` extension.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// When false the wall_ms column is written as 0 so that reruns are
    /// byte-identical.
    pub record_wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let s = SceneSpec::default();
        let w = Weights::default();
        Self {
            tx_horizontal: s.tx_horizontal,
            tx_vertical: s.tx_vertical,
            rx_horizontal: s.rx_horizontal,
            rx_vertical: s.rx_vertical,
            users: s.users,
            targets: s.targets,
            slots: s.slots,
            power_dbm: s.power_dbm,
            noise_radar_dbm: s.noise_radar_dbm,
            noise_comm_dbm: s.noise_comm_dbm,
            elevation_sampling: s.elevation_sampling,
            weight_comm: w.comm,
            weight_sensing: w.sensing,
            sweep_axis: SweepAxis::WeightComm,
            sweep_values: vec![w.comm],
            trials: 50,
            base_seed: 0,
            solver: SolverChoice::Full,
            max_iters: None,
            tol: None,
            power_constraint: None,
            sensing_streams: None,
            lambda_safety: None,
            out: None,
            record_wall_time: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| IsacError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| IsacError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| IsacError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(IsacError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.sweep_values.is_empty() {
            return bad("sweep_values must not be empty".into());
        }
        if self.sweep_values.iter().any(|v| !v.is_finite()) {
            return bad("sweep_values must be finite".into());
        }
        if self.sweep_values.windows(2).any(|p| p[0] > p[1]) {
            return bad("sweep_values must be sorted ascending".into());
        }
        if self.sweep_axis.is_integer() && self.sweep_values.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
            return bad(format!("{} values must be nonnegative integers", self.sweep_axis));
        }
        if self.sweep_axis == SweepAxis::Antennas && self.sweep_values.contains(&0.0) {
            return bad("antenna counts must be positive".into());
        }
        if self.solver != SolverChoice::Full {
            if self.sweep_axis == SweepAxis::SensingStreams || self.sensing_streams.is_some() {
                return bad("the low-dimensional solver fixes its own stream count".into());
            }
            if self.power_constraint == Some(PowerConstraint::PerAntenna) {
                return bad("the low-dimensional solver supports only the total power constraint".into());
            }
        }
        for &v in &self.sweep_values {
            let (scene_spec, weights, solver) = self.point(v, self.base_seed);
            weights.map_err(|e| IsacError::Config(e.to_string()))?;
            solver.validate().map_err(|e| IsacError::Config(e.to_string()))?;
            let dims = scene_spec.dims();
            ArrayGeometry::new(dims.tx.n_horizontal, dims.tx.n_vertical).map_err(|e| IsacError::Config(e.to_string()))?;
            ArrayGeometry::new(dims.rx.n_horizontal, dims.rx.n_vertical).map_err(|e| IsacError::Config(e.to_string()))?;
            if dims.slots == 0 || scene_spec.powers().power_dbm.abs() > 300.0 {
                return bad("slots must be positive and powers usable dBm values".into());
            }
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            tol: self.tol.unwrap_or(d.tol),
            power_constraint: self.power_constraint.unwrap_or(d.power_constraint),
            sensing_streams: self.sensing_streams.or(d.sensing_streams),
            lambda_safety: self.lambda_safety.unwrap_or(d.lambda_safety),
            ..d
        }
    }

    pub fn scene_spec(&self, seed: u64) -> SceneSpec {
        SceneSpec {
            seed,
            tx_horizontal: self.tx_horizontal,
            tx_vertical: self.tx_vertical,
            rx_horizontal: self.rx_horizontal,
            rx_vertical: self.rx_vertical,
            users: self.users,
            targets: self.targets,
            slots: self.slots,
            power_dbm: self.power_dbm,
            noise_radar_dbm: self.noise_radar_dbm,
            noise_comm_dbm: self.noise_comm_dbm,
            elevation_sampling: self.elevation_sampling,
            target: Vec::new(),
        }
    }

    pub fn weights(&self) -> Result<Weights> {
        Weights::new(self.weight_comm, self.weight_sensing)
    }

    /// Scene, weights and solver settings for one sweep value.
    fn point(&self, value: f64, seed: u64) -> (SceneSpec, Result<Weights>, SolverConfig) {
        let mut spec = self.scene_spec(seed);
        let mut weights = self.weights();
        let mut solver = self.solver_config();
        match self.sweep_axis {
            SweepAxis::WeightComm => weights = Weights::new(value, self.weight_sensing),
            SweepAxis::SensingStreams => solver.sensing_streams = Some(value as usize),
            SweepAxis::Antennas => {
                let (h, v) = near_square(value as usize);
                spec.tx_horizontal = h;
                spec.tx_vertical = v;
            }
            SweepAxis::Users => spec.users = value as usize,
            SweepAxis::PowerDbm => spec.power_dbm = value,
        }
        (spec, weights, solver)
    }

    fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.trials as u64).map(|t| self.base_seed.wrapping_add(t))
    }
}

fn near_square(n: usize) -> (usize, usize) {
    ArrayGeometry::near_square(n)
        .map(|g| (g.n_horizontal, g.n_vertical))
        .unwrap_or((n, 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialStatus {
    Converged,
    /// Hit the iteration cap; metrics are those of the last iterate.
    MaxIters,
    Failed,
}

impl TrialStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIters => "max-iters",
            Self::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub sweep_axis: SweepAxis,
    pub sweep_value: f64,
    pub seed: u64,
    pub solver: SolverId,
    pub status: TrialStatus,
    pub sum_rate: f64,
    pub crlb_trace: f64,
    pub objective: f64,
    pub iterations: usize,
    pub wall_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TrialRecord {
    fn csv_row(&self) -> [String; 10] {
        [
            self.sweep_axis.to_string(),
            self.sweep_value.to_string(),
            self.seed.to_string(),
            self.solver.as_str().to_string(),
            self.status.as_str().to_string(),
            self.sum_rate.to_string(),
            self.crlb_trace.to_string(),
            self.objective.to_string(),
            self.iterations.to_string(),
            format!("{:.3}", self.wall_ms),
        ]
    }
}

/// Mean and standard error over the finite samples of one column.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub count: usize,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
        let n = v.len();
        if n == 0 {
            return Self::default();
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            Some((var / n as f64).sqrt())
        } else {
            None
        };
        Self { mean: Some(mean), stderr, count: n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub sweep_value: f64,
    pub solver: SolverId,
    pub trials: usize,
    pub failed: usize,
    pub max_iters: usize,
    pub sum_rate: Stat,
    pub crlb_trace: Stat,
    pub objective: Stat,
    pub iterations: Stat,
    pub wall_ms: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub sweep_axis: SweepAxis,
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn row(&self, value: f64, solver: SolverId) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.sweep_value == value && r.solver == solver)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

fn run_trial(cfg: &ExperimentConfig, value: f64, seed: u64, solver: SolverId) -> TrialRecord {
    let start = Instant::now();
    let (spec, weights, solver_cfg) = cfg.point(value, seed);
    let outcome = weights.and_then(|w| spec.build().and_then(|scene| solver.run(&scene, &w, &solver_cfg)));
    let wall_ms = if cfg.record_wall_time { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    let mut record = TrialRecord {
        sweep_axis: cfg.sweep_axis,
        sweep_value: value,
        seed,
        solver,
        status: TrialStatus::Failed,
        sum_rate: f64::NAN,
        crlb_trace: f64::NAN,
        objective: f64::NAN,
        iterations: 0,
        wall_ms,
        error: None,
    };
    let (result, status) = match outcome {
        Ok(r) => (r, TrialStatus::Converged),
        Err(IsacError::NonConvergence { result, .. }) => (*result, TrialStatus::MaxIters),
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    record.status = status;
    record.sum_rate = result.sum_rate;
    record.crlb_trace = result.crlb_trace;
    record.objective = result.objective;
    record.iterations = result.iterations;
    record
}

/// Runs every (sweep value, seed, solver) trial in parallel. Output order is
/// fixed by that key, so thread scheduling never changes the result.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let jobs: Vec<(f64, u64, SolverId)> = cfg
        .sweep_values
        .iter()
        .flat_map(|&v| cfg.seeds().flat_map(move |s| cfg.solver.ids().iter().map(move |&id| (v, s, id))))
        .collect();
    let mut records: Vec<TrialRecord> = jobs.par_iter().map(|&(v, s, id)| run_trial(cfg, v, s, id)).collect();
    records.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(a.seed.cmp(&b.seed))
            .then(a.solver.cmp(&b.solver))
    });
    let summary = summarize(cfg.sweep_axis, &records);
    Ok(ExperimentOutput { records, summary })
}

pub fn summarize(axis: SweepAxis, records: &[TrialRecord]) -> Summary {
    let mut keys: Vec<(f64, SolverId)> = records.iter().map(|r| (r.sweep_value, r.solver)).collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keys.dedup();
    let rows = keys
        .into_iter()
        .map(|(value, solver)| {
            let group: Vec<&TrialRecord> = records.iter().filter(|r| r.sweep_value == value && r.solver == solver).collect();
            let ok: Vec<&&TrialRecord> = group.iter().filter(|r| r.status != TrialStatus::Failed).collect();
            SummaryRow {
                sweep_value: value,
                solver,
                trials: group.len(),
                failed: group.len() - ok.len(),
                max_iters: ok.iter().filter(|r| r.status == TrialStatus::MaxIters).count(),
                sum_rate: Stat::of(ok.iter().map(|r| r.sum_rate)),
                crlb_trace: Stat::of(ok.iter().map(|r| r.crlb_trace)),
                objective: Stat::of(ok.iter().map(|r| r.objective)),
                iterations: Stat::of(ok.iter().map(|r| r.iterations as f64)),
                wall_ms: Stat::of(ok.iter().map(|r| r.wall_ms)),
            }
        })
        .collect();
    Summary { sweep_axis: axis, rows }
}

pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| IsacError::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER.split(',')).map_err(io)?;
    for r in records {
        w.write_record(r.csv_row()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(summary: &Summary, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, summary).map_err(|e| IsacError::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

/// Writes `<path>` (CSV) and `<path>.json`-style summary next to it.
pub fn write_outputs(output: &ExperimentOutput, path: &Path) -> Result<PathBuf> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_csv(&output.records, std::io::BufWriter::new(std::fs::File::create(path)?))?;
    let json = path.with_extension("json");
    write_summary(&output.summary, std::io::BufWriter::new(std::fs::File::create(&json)?))?;
    Ok(json)
}

/// Settings used by [`verify`] unless the config overrides them.
pub const VERIFY_TOL: f64 = 1e-8;
pub const VERIFY_MAX_ITERS: usize = 200_000;

const MONOTONE_SLACK: f64 = 1e-9;
const POWER_TOL: f64 = 1e-9;
const GRADIENT_TOL: f64 = 1e-5;
const FIM_TOL: f64 = 1e-5;
const ADJOINT_TOL: f64 = 1e-8;
const STRUCTURE_TOL: f64 = 1e-2;
const PARITY_TOL: f64 = 1e-2;

/// Runs the invariant suite on `trials` freshly solved instances of the base
/// configuration (sweep settings are ignored).
pub fn verify(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    verify_with_fault(cfg, None)
}

#[doc(hidden)]
pub fn verify_with_fault(cfg: &ExperimentConfig, fault: Option<QFault>) -> Result<VerificationReport> {
    cfg.validate()?;
    let weights = cfg.weights().map_err(|e| IsacError::Config(e.to_string()))?;
    let solver_cfg = SolverConfig {
        tol: cfg.tol.unwrap_or(VERIFY_TOL),
        max_iters: cfg.max_iters.unwrap_or(VERIFY_MAX_ITERS),
        ..cfg.solver_config()
    };
    let seeds: Vec<u64> = cfg.seeds().collect();
    let parts: Vec<VerificationReport> = seeds
        .par_iter()
        .map(|&seed| verify_instance(cfg, seed, &weights, &solver_cfg, fault))
        .collect();
    let mut report = VerificationReport::default();
    for p in parts {
        report.checks.extend(p.checks);
    }
    Ok(report)
}

fn verify_instance(cfg: &ExperimentConfig, seed: u64, weights: &Weights, solver_cfg: &SolverConfig, fault: Option<QFault>) -> VerificationReport {
    let mut rep = VerificationReport::default();
    let tag = |name: &str| format!("{name}[seed={seed}]");
    let scene = match cfg.scene_spec(seed).build() {
        Ok(s) => s,
        Err(e) => {
            rep.failure(tag("scene"), e.to_string());
            return rep;
        }
    };
    let steering = match build_steering_set(&scene) {
        Ok(s) => s,
        Err(e) => {
            rep.failure(tag("steering"), e.to_string());
            return rep;
        }
    };

    let full = match solve(&scene, weights, solver_cfg) {
        Ok(r) => {
            rep.push(tag("converged"), r.iterations as f64, solver_cfg.max_iters as f64, true, None);
            Some(r)
        }
        Err(IsacError::NonConvergence { iterations, last_change, .. }) => {
            rep.push(
                tag("converged"),
                iterations as f64,
                solver_cfg.max_iters as f64,
                false,
                Some(format!("no convergence after {iterations} iterations, last change {last_change:e}")),
            );
            None
        }
        Err(e) => {
            rep.failure(tag("converged"), e.to_string());
            None
        }
    };

    if let Some(r) = &full {
        let worst_drop = r
            .objective_trace
            .windows(2)
            .map(|p| (p[0] - p[1]) / p[0].abs().max(1.0))
            .fold(0.0f64, f64::max);
        rep.at_most(tag("monotone"), worst_drop, MONOTONE_SLACK);

        let w = &r.beamformer;
        let pt = w.power_budget();
        let power_err = match solver_cfg.power_constraint {
            PowerConstraint::Total => (w.power() - pt).abs() / pt,
            PowerConstraint::PerAntenna => {
                let target = pt / w.n_antennas() as f64;
                w.matrix().row_iter().map(|row| (row.norm_squared() - target).abs() / target).fold(0.0, f64::max)
            }
        };
        rep.at_most(tag("full_power"), power_err, POWER_TOL);

        match objective(&scene, &steering, &w.scaled(0.99), weights) {
            Ok(f_in) => {
                let gain = r.objective - f_in;
                rep.push(tag("inward_scaling"), gain, 0.0, gain > 0.0, None);
            }
            Err(e) => rep.failure(tag("inward_scaling"), e.to_string()),
        }

        match analysis::fd_gradient_gap(&scene, &steering, w, weights, GRADIENT_TOL) {
            Ok((rel, step)) => {
                let passed = rel <= GRADIENT_TOL;
                rep.push(tag("gradient_fd"), rel, GRADIENT_TOL, passed, Some(format!("step {step:e}")));
            }
            Err(e) => rep.failure(tag("gradient_fd"), e.to_string()),
        }

        if scene.n_targets() > 0 {
            match (
                fim(&scene, &steering, w),
                analysis::fd_fim(&scene, &steering, w, 1e-6, SignalAverage::Exact),
            ) {
                (Ok(f), Ok(oracle)) => {
                    let rel = (f.matrix() - &oracle).norm() / f.matrix().norm().max(f64::MIN_POSITIVE);
                    rep.at_most(tag("fim_oracle"), rel, FIM_TOL);
                }
                (Err(e), _) | (_, Err(e)) => rep.failure(tag("fim_oracle"), e.to_string()),
            }
            let phi = analysis::random_symmetric(4 * scene.n_targets(), seed ^ 0xad10);
            let gap = analysis::adjoint_residual(&scene, &steering, w.matrix(), &phi, fault);
            rep.at_most(tag("adjoint"), gap, ADJOINT_TOL);
        }

        if solver_cfg.power_constraint == PowerConstraint::Total {
            match obs_residuals(&scene, &steering, w, weights, pt.sqrt()) {
                Ok(obs) => {
                    rep.at_most(tag("stationarity"), obs.stationarity, STRUCTURE_TOL);
                    rep.at_most(tag("obs_comm"), obs.comm_residual, STRUCTURE_TOL);
                    rep.at_most(tag("obs_sensing"), obs.sensing_residual, STRUCTURE_TOL);
                    let bound = 3 * scene.n_targets();
                    rep.push(tag("sensing_rank"), obs.sensing_rank as f64, bound as f64, obs.sensing_rank <= bound, None);
                }
                Err(e) => rep.failure(tag("obs"), e.to_string()),
            }
        }
    }

    if cfg.solver != SolverChoice::Full {
        let ld_cfg = SolverConfig { sensing_streams: None, ..solver_cfg.clone() };
        match solve_ld(&scene, weights, &ld_cfg) {
            Ok(ld) => {
                if let Some(r) = &full {
                    let rel = (r.objective - ld.objective).abs() / r.objective.abs().max(1e-12);
                    rep.at_most(tag("lowdim_parity"), rel, PARITY_TOL);
                }
            }
            Err(e) => rep.failure(tag("lowdim_converged"), e.to_string()),
        }
    }
    rep
}
