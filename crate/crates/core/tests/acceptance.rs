//! Acceptance suite. Every criterion prints one PASS/FAIL line with the
//! measured values; the process exits nonzero if any criterion fails.
//!
//! Run a subset with `cargo test --test acceptance -- c04 c06`.

use std::panic::{self, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use isac_core::analysis::{self, obs_residuals, SignalAverage};
use isac_core::experiment::{run_experiment, ExperimentConfig, SolverChoice, SolverId, Stat, SweepAxis};
use isac_core::linalg::{complex_gaussian_matrix, frob};
use isac_core::lowdim::solve_ld;
use isac_core::metrics::{crlb_trace_auto, fim, objective, user_rate, Beamformer, Weights};
use isac_core::model::QFault;
use isac_core::sca::{
    comm_aux, crlb_surrogate, project_total_power, rate_surrogate, sensing_aux, solve, trace_quadratic_minorant, SolveResult,
    SolverConfig,
};
use isac_core::scene::{build_steering_set, sample_scene, ArrayGeometry, PowerSettings, Scene, SceneDims, SteeringSet};
use isac_core::IsacError;

// Targets and tolerances, pinned.
const REFERENCE_FULL: (f64, f64) = (15.07, 1.13);
const REFERENCE_LOWDIM: (f64, f64) = (15.04, 1.14);
const REFERENCE_BAND: f64 = 0.10;
const REFERENCE_SEEDS: usize = 50;
const MONOTONE_SLACK: f64 = 1e-9;
const MONOTONE_INSTANCES: u64 = 100;
const POWER_TOL: f64 = 1e-9;
const INWARD_SCALE: f64 = 0.99;
const GRADIENT_TOL: f64 = 1e-5;
const GRADIENT_INSTANCES: u64 = 20;
const FIM_TOL: f64 = 1e-5;
const FIM_INSTANCES: u64 = 20;
const ADJOINT_TOL: f64 = 1e-8;
const ADJOINT_PAIRS: u64 = 100;
const TANGENCY_TOL: f64 = 1e-9;
const BOUND_SLACK: f64 = 1e-10;
const PERTURBATIONS: u64 = 100;
const PARITY_TOL: f64 = 0.01;
const PARITY_INSTANCES: u64 = 50;
const TIMING_ANTENNAS: (usize, usize) = (8, 8);
const TIMING_ITERS: usize = 60;
const TIMING_SEEDS: u64 = 3;
const FLAT_TOL: f64 = 0.01;
const STREAM_SEEDS: usize = 20;
const OBS_TOL: f64 = 1e-2;
const OBS_SOLVER_TOL: f64 = 1e-8;
const OBS_INSTANCES: u64 = 20;
const FRONTIER_SEEDS: usize = 20;
const FRONTIER_NEAR: f64 = 0.05;

struct Outcome {
    passed: bool,
    summary: String,
}

impl Outcome {
    fn new(passed: bool, summary: impl Into<String>) -> Self {
        Self { passed, summary: summary.into() }
    }
}

/// Solver output, accepting the last iterate when the iteration cap is hit.
fn run(scene: &Scene, weights: &Weights, cfg: &SolverConfig) -> (SolveResult, bool) {
    match solve(scene, weights, cfg) {
        Ok(r) => (r, true),
        Err(IsacError::NonConvergence { result, .. }) => (*result, false),
        Err(e) => panic!("solver failed: {e}"),
    }
}

fn default_instance(seed: u64) -> (Scene, SteeringSet) {
    let scene = sample_scene(seed, &SceneDims::default(), &PowerSettings::default()).unwrap();
    let st = build_steering_set(&scene).unwrap();
    (scene, st)
}

fn random_beamformer(scene: &Scene, ns: usize, seed: u64) -> Beamformer {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let w = complex_gaussian_matrix(scene.n_tx(), scene.n_users() + ns, &mut rng);
    Beamformer::new(project_total_power(&w, scene.power_budget).unwrap(), scene.n_users(), scene.power_budget).unwrap()
}

fn perturbed(w0: &Beamformer, seed: u64) -> Beamformer {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let e = complex_gaussian_matrix(w0.n_antennas(), w0.matrix().ncols(), &mut rng);
    // Magnitudes from 1e-3 to 1 of the beamformer norm.
    let t = 10f64.powf(-3.0 * (seed % 7) as f64 / 6.0);
    let step = e.scale(t * frob(w0.matrix()) / frob(&e));
    w0.with_matrix(w0.matrix() + step).unwrap()
}

fn small_instance(seed: u64) -> (Scene, SteeringSet, usize) {
    let shapes = [(2, 1), (2, 2), (3, 2), (2, 3), (1, 4), (3, 1)];
    let (h, v) = shapes[seed as usize % shapes.len()];
    let dims = SceneDims {
        tx: ArrayGeometry::new(h, v).unwrap(),
        rx: ArrayGeometry::new(2, 2).unwrap(),
        users: 1 + seed as usize % 3,
        targets: 1 + seed as usize % 2,
        slots: 32,
    };
    let scene = sample_scene(1000 + seed, &dims, &PowerSettings::default()).unwrap();
    let st = build_steering_set(&scene).unwrap();
    (scene, st, seed as usize % 3)
}

const WEIGHT_SETTINGS: [(f64, f64); 4] = [(0.25, 1.0), (1.0, 0.25), (1e-7, 1.0), (1.0, 1e-7)];

/// Solutions of the 100 default instances shared by criteria 2 and 3.
fn monotone_runs() -> &'static Vec<(u64, Weights, SolveResult, bool)> {
    static RUNS: OnceLock<Vec<(u64, Weights, SolveResult, bool)>> = OnceLock::new();
    RUNS.get_or_init(|| {
        (0..MONOTONE_INSTANCES)
            .map(|seed| {
                let (c, s) = WEIGHT_SETTINGS[seed as usize % WEIGHT_SETTINGS.len()];
                let weights = Weights::new(c, s).unwrap();
                let (scene, _) = default_instance(seed);
                let (r, ok) = run(&scene, &weights, &SolverConfig::default());
                (seed, weights, r, ok)
            })
            .collect()
    })
}

fn c01_default_means() -> Outcome {
    let base = ExperimentConfig { trials: REFERENCE_SEEDS, record_wall_time: false, ..ExperimentConfig::default() };
    let full_cfg = ExperimentConfig {
        sweep_axis: SweepAxis::SensingStreams,
        sweep_values: vec![6.0],
        ..base.clone()
    };
    let ld_cfg = ExperimentConfig { solver: SolverChoice::Lowdim, ..base };
    let full = run_experiment(&full_cfg).unwrap();
    let ld = run_experiment(&ld_cfg).unwrap();
    let row_full = &full.summary.rows[0];
    let row_ld = &ld.summary.rows[0];
    let within = |x: Option<f64>, target: f64| x.is_some_and(|x| (x - target).abs() <= REFERENCE_BAND * target);
    let median = |v: Vec<f64>| {
        let mut v = v;
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let med_sr = median(full.records.iter().map(|r| r.sum_rate).collect());
    let med_crlb = median(full.records.iter().map(|r| r.crlb_trace).collect());
    let passed = within(row_full.sum_rate.mean, REFERENCE_FULL.0)
        && within(row_full.crlb_trace.mean, REFERENCE_FULL.1)
        && within(row_ld.sum_rate.mean, REFERENCE_LOWDIM.0)
        && within(row_ld.crlb_trace.mean, REFERENCE_LOWDIM.1);
    Outcome::new(
        passed,
        format!(
            "full mean (SR {:.3}, CRLB {:.4e}) vs {REFERENCE_FULL:?}; lowdim mean (SR {:.3}, CRLB {:.4e}) vs {REFERENCE_LOWDIM:?}; \
             band ±{:.0}%; full median (SR {med_sr:.3}, CRLB {med_crlb:.3}); {} of {} full runs hit the iteration cap",
            row_full.sum_rate.mean.unwrap_or(f64::NAN),
            row_full.crlb_trace.mean.unwrap_or(f64::NAN),
            row_ld.sum_rate.mean.unwrap_or(f64::NAN),
            row_ld.crlb_trace.mean.unwrap_or(f64::NAN),
            REFERENCE_BAND * 100.0,
            row_full.max_iters,
            row_full.trials,
        ),
    )
}

fn c02_monotone() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    let mut steps = 0usize;
    for (seed, _, r, _) in monotone_runs() {
        for p in r.objective_trace.windows(2) {
            steps += 1;
            let drop = (p[0] - p[1]) / p[0].abs();
            if p[1] < p[0] - MONOTONE_SLACK * p[0].abs() {
                bad.push(*seed);
            }
            if drop.is_finite() {
                worst = worst.max(drop);
            }
        }
    }
    bad.dedup();
    Outcome::new(
        bad.is_empty(),
        format!(
            "{MONOTONE_INSTANCES} instances over weights {WEIGHT_SETTINGS:?}, {steps} steps; worst relative drop {worst:.3e} \
             (slack {MONOTONE_SLACK:e}); violating seeds {bad:?}"
        ),
    )
}

fn c03_full_power() -> Outcome {
    let mut worst_power: f64 = 0.0;
    let mut not_decreasing = Vec::new();
    let mut min_gain = f64::INFINITY;
    let mut capped = 0;
    for (seed, weights, r, ok) in monotone_runs() {
        if !ok {
            capped += 1;
        }
        let w = &r.beamformer;
        worst_power = worst_power.max((w.power() - w.power_budget()).abs() / w.power_budget());
        let (scene, st) = default_instance(*seed);
        let inner = objective(&scene, &st, &w.scaled(INWARD_SCALE), weights).unwrap();
        let gain = r.objective - inner;
        min_gain = min_gain.min(gain / r.objective.abs().max(f64::MIN_POSITIVE));
        if !(gain > 0.0) {
            not_decreasing.push(*seed);
        }
    }
    Outcome::new(
        worst_power <= POWER_TOL && not_decreasing.is_empty(),
        format!(
            "{MONOTONE_INSTANCES} solutions ({capped} at the iteration cap); max |P−Pt|/Pt {worst_power:.2e} (tol {POWER_TOL:e}); \
             smallest relative loss from scaling by {INWARD_SCALE} is {min_gain:.3e}; non-decreasing seeds {not_decreasing:?}"
        ),
    )
}

fn c04_gradient() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..GRADIENT_INSTANCES {
        let (scene, st, ns) = small_instance(seed);
        let w = random_beamformer(&scene, ns, seed + 77);
        let (c, s) = WEIGHT_SETTINGS[seed as usize % WEIGHT_SETTINGS.len()];
        let weights = Weights::new(c, s).unwrap();
        let (gap, _) = analysis::fd_gradient_gap(&scene, &st, &w, &weights, GRADIENT_TOL).unwrap();
        worst = worst.max(gap);
    }
    Outcome::new(
        worst <= GRADIENT_TOL,
        format!("{GRADIENT_INSTANCES} instances (N_t ≤ 6, M ≤ 2, K ≤ 3); worst relative error {worst:.3e} (tol {GRADIENT_TOL:e})"),
    )
}

fn c05_fim() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..FIM_INSTANCES {
        let m = 1 + seed as usize % 2;
        let dims = SceneDims { targets: m, ..SceneDims::default() };
        let scene = sample_scene(2000 + seed, &dims, &PowerSettings::default()).unwrap();
        let st = build_steering_set(&scene).unwrap();
        let w = random_beamformer(&scene, seed as usize % 4, seed);
        let f = fim(&scene, &st, &w).unwrap();
        let oracle = analysis::fd_fim(&scene, &st, &w, 1e-6, SignalAverage::Exact).unwrap();
        worst = worst.max((f.matrix() - &oracle).norm() / f.matrix().norm());
    }
    Outcome::new(
        worst <= FIM_TOL,
        format!("{FIM_INSTANCES} instances, M ∈ {{1, 2}}; worst relative error {worst:.3e} (tol {FIM_TOL:e})"),
    )
}

fn c06_adjoint() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut caught = 0;
    for seed in 0..ADJOINT_PAIRS {
        let m = 1 + seed as usize % 3;
        let dims = SceneDims { targets: m, ..SceneDims::default() };
        let scene = sample_scene(3000 + seed, &dims, &PowerSettings::default()).unwrap();
        let st = build_steering_set(&scene).unwrap();
        let w = random_beamformer(&scene, seed as usize % 5, seed);
        let phi = analysis::random_symmetric(4 * m, seed);
        worst = worst.max(analysis::adjoint_residual(&scene, &st, w.matrix(), &phi, None));
        let fault = QFault { kind_a: 1, kind_b: 2 };
        if analysis::adjoint_residual(&scene, &st, w.matrix(), &phi, Some(fault)) > ADJOINT_TOL {
            caught += 1;
        }
    }
    Outcome::new(
        worst <= ADJOINT_TOL,
        format!(
            "{ADJOINT_PAIRS} (W, Φ) pairs; worst |tr(ΦF) − Re tr(R_x Q)| / (‖Φ‖‖F‖) {worst:.3e} (tol {ADJOINT_TOL:e}); \
             a flipped φ-φ Q block is flagged on {caught}/{ADJOINT_PAIRS}"
        ),
    )
}

fn c07_surrogates() -> Outcome {
    let weights_seed = |k: u64| k * 31 + 5;
    let (mut rate_tan, mut crlb_tan, mut quad_tan): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let (mut rate_bad, mut crlb_bad, mut quad_bad) = (0, 0, 0);
    let bases = 10u64;
    let per_base = PERTURBATIONS / bases + 1;
    let mut checked = 0;
    for b in 0..bases {
        let (scene, st) = default_instance(4000 + b);
        let w0 = random_beamformer(&scene, 2, weights_seed(b));
        let comm = comm_aux(&scene, &w0).unwrap();
        let sens = sensing_aux(&scene, &st, &w0, None).unwrap();
        let crlb0 = crlb_trace_auto(&fim(&scene, &st, &w0).unwrap()).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
        for k in 0..scene.n_users() {
            rate_tan = rate_tan.max(rel(rate_surrogate(&scene, &comm, &w0, k).unwrap(), user_rate(&scene, &w0, k).unwrap()));
        }
        crlb_tan = crlb_tan.max(rel(crlb_surrogate(&scene, &st, &sens, &w0).unwrap(), -crlb0));
        let quad0 = (w0.matrix() * w0.matrix().adjoint() * &sens.q).trace().re;
        quad_tan = quad_tan.max(rel(trace_quadratic_minorant(&sens.q, w0.matrix(), w0.matrix()), quad0));
        for j in 0..per_base {
            let w = perturbed(&w0, b * 1000 + j);
            checked += 1;
            for k in 0..scene.n_users() {
                let exact = user_rate(&scene, &w, k).unwrap();
                if rate_surrogate(&scene, &comm, &w, k).unwrap() > exact + BOUND_SLACK * exact.abs().max(1.0) {
                    rate_bad += 1;
                }
            }
            let neg_crlb = -crlb_trace_auto(&fim(&scene, &st, &w).unwrap()).unwrap();
            if crlb_surrogate(&scene, &st, &sens, &w).unwrap() < neg_crlb - BOUND_SLACK * neg_crlb.abs() {
                crlb_bad += 1;
            }
            let quad = (w.matrix() * w.matrix().adjoint() * &sens.q).trace().re;
            if trace_quadratic_minorant(&sens.q, w0.matrix(), w.matrix()) > quad + BOUND_SLACK * quad.abs().max(1.0) {
                quad_bad += 1;
            }
        }
    }
    let tangent = rate_tan <= TANGENCY_TOL && crlb_tan <= TANGENCY_TOL && quad_tan <= TANGENCY_TOL;
    Outcome::new(
        tangent && rate_bad + crlb_bad + quad_bad == 0 && checked >= PERTURBATIONS as usize,
        format!(
            "tangency gaps: rate {rate_tan:.2e}, CRLB {crlb_tan:.2e}, trace-quadratic {quad_tan:.2e} (tol {TANGENCY_TOL:e}); \
             bound violations over {checked} perturbations: rate (lower) {rate_bad}, CRLB (upper on −tr F⁻¹) {crlb_bad}, \
             trace-quadratic (lower) {quad_bad}"
        ),
    )
}

fn c08_parity_and_timing() -> Outcome {
    let cfg = SolverConfig::default();
    let weights = Weights::default();
    let mut worst: f64 = 0.0;
    let mut worst_seed = 0;
    for seed in 0..PARITY_INSTANCES {
        let (scene, _) = default_instance(seed);
        let (full, _) = run(&scene, &weights, &cfg);
        let ld = match solve_ld(&scene, &weights, &cfg) {
            Ok(r) => r,
            Err(IsacError::NonConvergence { result, .. }) => *result,
            Err(e) => panic!("{e}"),
        };
        let gap = (full.objective - ld.objective).abs() / full.objective.abs();
        if gap > worst {
            worst = gap;
            worst_seed = seed;
        }
    }

    let dims = SceneDims {
        tx: ArrayGeometry::new(TIMING_ANTENNAS.0, TIMING_ANTENNAS.1).unwrap(),
        ..SceneDims::default()
    };
    let timing_cfg = SolverConfig { tol: 0.0, max_iters: TIMING_ITERS, ..SolverConfig::default() };
    let (mut t_full, mut t_ld) = (Vec::new(), Vec::new());
    for seed in 0..TIMING_SEEDS {
        let scene = sample_scene(seed, &dims, &PowerSettings::default()).unwrap();
        for (id, sink) in [(SolverId::Full, &mut t_full), (SolverId::Lowdim, &mut t_ld)] {
            let r = match id.run(&scene, &weights, &timing_cfg) {
                Err(IsacError::NonConvergence { result, .. }) => *result,
                other => panic!("expected the iteration cap, got {:?}", other.map(|r| r.iterations)),
            };
            sink.push(r.per_iteration_ms());
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mf, ml) = (mean(&t_full), mean(&t_ld));
    Outcome::new(
        worst <= PARITY_TOL && ml < mf,
        format!(
            "{PARITY_INSTANCES} default instances: worst objective gap {:.3}% (seed {worst_seed}, tol {:.0}%); \
             per-iteration time at N_t = {}: full {mf:.3} ms, lowdim {ml:.3} ms",
            worst * 100.0,
            PARITY_TOL * 100.0,
            TIMING_ANTENNAS.0 * TIMING_ANTENNAS.1,
        ),
    )
}

fn sweep_streams(base: ExperimentConfig, values: Vec<f64>) -> Vec<(f64, Stat)> {
    let cfg = ExperimentConfig {
        sweep_axis: SweepAxis::SensingStreams,
        sweep_values: values,
        trials: STREAM_SEEDS,
        record_wall_time: false,
        ..base
    };
    run_experiment(&cfg).unwrap().summary.rows.iter().map(|r| (r.sweep_value, r.objective)).collect()
}

fn c09_stream_threshold() -> Outcome {
    // Sensing only: no users, three targets, 128 slots.
    let sensing = ExperimentConfig {
        users: 0,
        targets: 3,
        slots: 128,
        weight_comm: 0.0,
        weight_sensing: 1.0,
        ..ExperimentConfig::default()
    };
    let values: Vec<f64> = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 16.0];
    let rows = sweep_streams(sensing.clone(), values);
    let flat: Vec<f64> = rows.iter().filter(|(v, _)| *v >= 3.0).map(|(_, s)| s.mean.unwrap()).collect();
    let (lo, hi) = flat.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let spread = (hi - lo) / hi.abs().max(lo.abs());

    // Rank of W_s at every converged sensing-only point with N_s = N_t.
    let cfg = SolverConfig { sensing_streams: Some(16), ..SolverConfig::default() };
    let mut max_rank = 0;
    let dims = SceneDims { users: 0, targets: 3, slots: 128, ..SceneDims::default() };
    for seed in 0..STREAM_SEEDS as u64 {
        let scene = sample_scene(seed, &dims, &PowerSettings::default()).unwrap();
        let (r, _) = run(&scene, &Weights::new(0.0, 1.0).unwrap(), &cfg);
        max_rank = max_rank.max(analysis::rank_check(&r.beamformer.sensing(), analysis::DEFAULT_RANK_RATIO));
    }

    // ISAC with K = 4 users and M = 2 targets: sensing streams add nothing.
    let isac = sweep_streams(ExperimentConfig::default(), vec![0.0, 1.0, 2.0, 3.0, 6.0]);
    let base = isac[0].1.mean.unwrap();
    let best_gain = isac[1..]
        .iter()
        .map(|(_, s)| (s.mean.unwrap() - base) / base.abs())
        .fold(f64::NEG_INFINITY, f64::max);

    let fmt_rows = |rows: &[(f64, Stat)]| {
        rows.iter().map(|(v, s)| format!("{v}:{:.4e}", s.mean.unwrap())).collect::<Vec<_>>().join(" ")
    };
    Outcome::new(
        spread <= FLAT_TOL && max_rank <= 9 && best_gain <= FLAT_TOL,
        format!(
            "sensing-only mean objective by N_s [{}], spread over N_s ≥ 3 {:.3}% (tol {:.0}%); max rank(W_s) at N_s = 16: {max_rank} (≤ 9); \
             ISAC K = 4 [{}], best gain over N_s = 0 {:.3}%",
            fmt_rows(&rows),
            spread * 100.0,
            FLAT_TOL * 100.0,
            fmt_rows(&isac),
            best_gain * 100.0,
        ),
    )
}

fn c10_obs() -> Outcome {
    let cfg = SolverConfig { tol: OBS_SOLVER_TOL, max_iters: 200_000, ..SolverConfig::default() };
    let weights = Weights::default();
    let (mut worst_comm, mut worst_sens, mut worst_stat): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut random_passing = Vec::new();
    let mut min_random: f64 = f64::INFINITY;
    let mut capped = 0;
    for seed in 0..OBS_INSTANCES {
        let (scene, st) = default_instance(seed);
        let (r, ok) = run(&scene, &weights, &cfg);
        if !ok {
            capped += 1;
        }
        let eps = scene.power_budget.sqrt();
        let rep = obs_residuals(&scene, &st, &r.beamformer, &weights, eps).unwrap();
        worst_comm = worst_comm.max(rep.comm_residual);
        worst_sens = worst_sens.max(rep.sensing_residual);
        worst_stat = worst_stat.max(rep.stationarity);

        let w = random_beamformer(&scene, scene.n_tx(), seed + 500);
        let rnd = obs_residuals(&scene, &st, &w, &weights, eps).unwrap();
        let structural = rnd.comm_residual.max(rnd.sensing_residual);
        min_random = min_random.min(structural);
        if structural <= OBS_TOL {
            random_passing.push(seed);
        }
    }
    Outcome::new(
        worst_comm <= OBS_TOL && worst_sens <= OBS_TOL && random_passing.is_empty() && capped == 0,
        format!(
            "{OBS_INSTANCES} instances at tol {OBS_SOLVER_TOL:e} ({capped} capped): worst W_c residual {worst_comm:.2e}, \
             W_s residual {worst_sens:.2e}, stationarity {worst_stat:.2e} (tol {OBS_TOL:e}); random points: smallest structural \
             residual {min_random:.2e}, passing seeds {random_passing:?}"
        ),
    )
}

fn c11_frontier() -> Outcome {
    let values: Vec<f64> = (-7..=5).map(|e| 10f64.powi(e)).collect();
    let base = ExperimentConfig {
        trials: FRONTIER_SEEDS,
        weight_sensing: 1.0,
        record_wall_time: false,
        ..ExperimentConfig::default()
    };
    let sweep = run_experiment(&ExperimentConfig { sweep_values: values.clone(), ..base.clone() }).unwrap();
    let reference = |c: f64, s: f64| {
        let cfg = ExperimentConfig {
            weight_comm: c,
            weight_sensing: s,
            sweep_axis: SweepAxis::Users,
            sweep_values: vec![4.0],
            ..base.clone()
        };
        run_experiment(&cfg).unwrap().summary.rows[0].sum_rate.mean.unwrap()
    };
    let sensing_only = reference(0.0, 1.0);
    let comm_only = reference(1.0, 0.0);

    let rows = &sweep.summary.rows;
    let mut violations = Vec::new();
    for p in rows.windows(2) {
        for (name, a, b) in [("SR", p[0].sum_rate, p[1].sum_rate), ("CRLB", p[0].crlb_trace, p[1].crlb_trace)] {
            let (ma, mb) = (a.mean.unwrap(), b.mean.unwrap());
            let se = a.stderr.unwrap_or(0.0).max(b.stderr.unwrap_or(0.0));
            if mb < ma - se {
                violations.push(format!("{name} {}→{}", p[0].sweep_value, p[1].sweep_value));
            }
        }
    }
    let first = rows[0].sum_rate.mean.unwrap();
    let last = rows[rows.len() - 1].sum_rate.mean.unwrap();
    let near_low = (first - sensing_only).abs() <= FRONTIER_NEAR * comm_only;
    let near_high = (last - comm_only).abs() <= FRONTIER_NEAR * comm_only;
    let capped: usize = rows.iter().map(|r| r.max_iters).sum();
    let table = rows
        .iter()
        .map(|r| format!("{:e}:({:.3}, {:.3e})", r.sweep_value, r.sum_rate.mean.unwrap(), r.crlb_trace.mean.unwrap()))
        .collect::<Vec<_>>()
        .join(" ");
    Outcome::new(
        violations.is_empty() && near_low && near_high,
        format!(
            "{FRONTIER_SEEDS} seeds, δ_c → (mean SR, mean CRLB): {table}; SR {first:.3} vs sensing-only {sensing_only:.3}, \
             {last:.3} vs communication-only {comm_only:.3} (within {:.0}% of the latter); monotonicity violations {violations:?}; \
             {capped} runs hit the iteration cap",
            FRONTIER_NEAR * 100.0
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("c01 default-config-means", c01_default_means),
        ("c02 monotone-convergence", c02_monotone),
        ("c03 full-power", c03_full_power),
        ("c04 gradient-oracle", c04_gradient),
        ("c05 fim-oracle", c05_fim),
        ("c06 adjoint-identity", c06_adjoint),
        ("c07 surrogate-tangency", c07_surrogates),
        ("c08 lowdim-parity", c08_parity_and_timing),
        ("c09 sensing-stream-threshold", c09_stream_threshold),
        ("c10 obs-residuals", c10_obs),
        ("c11 tradeoff-frontier", c11_frontier),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (name, check) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Outcome::new(false, format!("panicked: {msg}"))
            });
        let mark = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{mark} {name} [{:.1}s]: {}", start.elapsed().as_secs_f64(), outcome.summary);
        if !outcome.passed {
            failed.push(name);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: {} criteria failed: {}", failed.len(), failed.join(", "));
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
