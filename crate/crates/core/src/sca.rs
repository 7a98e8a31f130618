//! Two-layer SCA beamforming solver.
//!
//! Each iteration linearizes the rates and the CRLB trace at the current
//! point, adds the shift λ‖W‖² to make the quadratic part concave, and takes
//! the closed-form maximizer of the resulting linear function over the power
//! sphere. Equivalently W⁺ = Π(W + ∇f(W)/(2λ)).
//!
//! Gradient convention: ∇f = ∂f/∂Re W + j ∂f/∂Im W, so that
//! f(W + dW) ≈ f(W) + Re tr(∇fᴴ dW).

use std::time::Instant;

use nalgebra::{Cholesky, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::linalg::{
    complex_gaussian_matrix, dominant_eigenvalue_magnitude, frob_sq, hermitian_part, real_inner, symmetric_part,
    CMat, CVec, PowerIterationSettings, RMat, C64,
};
use crate::metrics::{Beamformer, FisherInfo, Weights};
use crate::model::IsacModel;
use crate::scene::{Scene, SteeringSet};

/// Per-user quantities of the rate surrogate, all evaluated at the expansion point.
#[derive(Debug, Clone, PartialEq)]
pub struct CommAux {
    /// SINR ξ_k
    pub xi: Vec<f64>,
    /// η_k = ξ_k / (h_kᴴ w_k)
    pub eta: Vec<C64>,
    /// β_k = ξ_k / (total received power)
    pub beta: Vec<f64>,
}

impl CommAux {
    pub fn n_users(&self) -> usize {
        self.xi.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensingAux {
    /// Φ = F⁻¹ F⁻¹
    pub phi: RMat,
    /// Q(Φ), Hermitian
    pub q: CMat,
    /// tr(F⁻¹) at the expansion point
    pub crlb: f64,
    /// Regularization used when inverting F
    pub jitter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerConstraint {
    #[default]
    Total,
    PerAntenna,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitMode {
    /// h_k/‖h_k‖ for users, normalized steering vectors and their derivatives
    /// (cycled) for sensing streams.
    #[default]
    MatchedFilter,
    Random { seed: u64 },
    Supplied(CMat),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop once |Δ objective| ≤ tol. Zero disables the test, so the solver
    /// always runs to `max_iters`.
    pub tol: f64,
    pub init: InitMode,
    pub power_constraint: PowerConstraint,
    pub lambda_safety: f64,
    pub lambda_floor: f64,
    pub power_iteration: PowerIterationSettings,
    /// Number of dedicated sensing streams; `None` means one per transmit antenna.
    /// The low-dimensional solver always uses 3M.
    pub sensing_streams: Option<usize>,
    /// Double λ and retake the step whenever the objective would decrease.
    pub ascent_safeguard: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            tol: 1e-4,
            init: InitMode::MatchedFilter,
            power_constraint: PowerConstraint::Total,
            lambda_safety: 1.1,
            lambda_floor: 1e-8,
            power_iteration: PowerIterationSettings::default(),
            sensing_streams: None,
            ascent_safeguard: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(IsacError::Config("max_iters must be at least 1".into()));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(IsacError::Config(format!("tolerance {} must be nonnegative", self.tol)));
        }
        if !(self.lambda_safety >= 1.0 && self.lambda_safety.is_finite()) {
            return Err(IsacError::Config("lambda_safety must be at least 1".into()));
        }
        if !(self.lambda_floor > 0.0 && self.lambda_floor.is_finite()) {
            return Err(IsacError::Config("lambda_floor must be positive".into()));
        }
        if self.power_iteration.max_iters == 0 {
            return Err(IsacError::Config("power iteration needs at least one step".into()));
        }
        Ok(())
    }

    pub fn n_sensing(&self, scene: &Scene) -> usize {
        self.sensing_streams.unwrap_or(scene.n_tx())
    }
}

/// Milliseconds spent in each part of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub setup_ms: f64,
    pub aux_ms: f64,
    pub shift_ms: f64,
    pub update_ms: f64,
    pub evaluate_ms: f64,
    /// Everything after setup.
    pub loop_ms: f64,
}

impl PhaseTimings {
    pub fn total_ms(&self) -> f64 {
        self.setup_ms + self.loop_ms
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub beamformer: Beamformer,
    /// Objective at the initial point followed by one entry per iteration.
    pub objective_trace: Vec<f64>,
    pub lambda_trace: Vec<f64>,
    pub objective: f64,
    pub sum_rate: f64,
    /// tr(F⁻¹) of the final beamformer, infinite when F is singular or there
    /// are no targets.
    pub crlb_trace: f64,
    pub iterations: usize,
    pub converged: bool,
    pub timings: PhaseTimings,
}

impl SolveResult {
    pub fn per_iteration_ms(&self) -> f64 {
        self.timings.loop_ms / self.iterations.max(1) as f64
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub(crate) fn comm_aux_model(model: &IsacModel, w: &CMat) -> CommAux {
    let g = model.channel_gains(w);
    let k_users = model.n_users();
    let mut aux = CommAux {
        xi: vec![0.0; k_users],
        eta: vec![C64::new(0.0, 0.0); k_users],
        beta: vec![0.0; k_users],
    };
    for (k, (s, i)) in model.user_powers(w).into_iter().enumerate() {
        let gkk = g[(k, k)];
        if gkk.norm_sqr() == 0.0 {
            continue;
        }
        let xi = s / i;
        aux.xi[k] = xi;
        aux.eta[k] = xi / gkk;
        aux.beta[k] = xi / (s + i);
    }
    aux
}

/// Rate-surrogate auxiliaries at `w`.
pub fn comm_aux(scene: &Scene, w: &Beamformer) -> Result<CommAux> {
    check_shape(scene, w.matrix(), w.n_comm())?;
    let model = comm_only_model(scene);
    Ok(comm_aux_model(&model, w.matrix()))
}

fn comm_only_model(scene: &Scene) -> IsacModel {
    let empty = SteeringSet {
        a: CMat::zeros(scene.n_tx(), 0),
        b: CMat::zeros(scene.n_rx(), 0),
        a_dtheta: CMat::zeros(scene.n_tx(), 0),
        a_dphi: CMat::zeros(scene.n_tx(), 0),
        b_dtheta: CMat::zeros(scene.n_rx(), 0),
        b_dphi: CMat::zeros(scene.n_rx(), 0),
        rcs: DVector::zeros(0),
    };
    IsacModel::new(scene, &empty)
}

fn check_shape(scene: &Scene, w: &CMat, n_comm: usize) -> Result<()> {
    if w.nrows() != scene.n_tx() || n_comm != scene.n_users() || w.ncols() < n_comm {
        return Err(IsacError::DimensionMismatch(format!(
            "beamformer {}x{} with {} user columns does not fit {} antennas and {} users",
            w.nrows(),
            w.ncols(),
            n_comm,
            scene.n_tx(),
            scene.n_users()
        )));
    }
    Ok(())
}

fn fim_inverse(model: &IsacModel, w: &CMat, jitter: Option<f64>) -> Result<(RMat, f64)> {
    if model.n_targets() == 0 {
        return Err(IsacError::InvalidInput("sensing terms need at least one target".into()));
    }
    let fi = FisherInfo::new(symmetric_part(&model.fim(w)))?;
    match jitter {
        Some(j) => fi.inverse(j).map(|inv| (inv, j)),
        None => fi.inverse_auto(),
    }
}

pub(crate) fn sensing_aux_model(model: &IsacModel, w: &CMat, jitter: Option<f64>) -> Result<SensingAux> {
    let (inv, used) = fim_inverse(model, w, jitter)?;
    Ok(sensing_aux_from_inverse(model, inv, used))
}

fn sensing_aux_from_inverse(model: &IsacModel, inv: RMat, jitter: f64) -> SensingAux {
    let phi = symmetric_part(&(&inv * &inv));
    let q = hermitian_part(&model.sensing_q(&phi));
    SensingAux {
        phi,
        q,
        crlb: inv.trace(),
        jitter,
    }
}

/// Φ and Q at `w`. `jitter = None` regularizes F only when it is numerically singular.
pub fn sensing_aux(scene: &Scene, steering: &SteeringSet, w: &Beamformer, jitter: Option<f64>) -> Result<SensingAux> {
    check_shape(scene, w.matrix(), w.n_comm())?;
    sensing_aux_model(&IsacModel::new(scene, steering), w.matrix(), jitter)
}

/// S = δ_s Q − δ_c H diag(β) Hᴴ, the Hermitian curvature term of the surrogate.
/// The shift parameter is computed from this matrix.
pub(crate) fn curvature_model(model: &IsacModel, comm: &CommAux, sensing: Option<&SensingAux>, weights: &Weights) -> CMat {
    let n = model.dim();
    let mut s = match sensing {
        Some(aux) if weights.sensing > 0.0 => aux.q.scale(weights.sensing),
        _ => CMat::zeros(n, n),
    };
    if weights.comm > 0.0 && comm.n_users() > 0 {
        let h = model.channels();
        let mut hb = h.clone();
        for (k, mut col) in hb.column_iter_mut().enumerate() {
            col *= C64::from(weights.comm * comm.beta[k]);
        }
        s -= hb * h.adjoint();
    }
    hermitian_part(&s)
}

pub fn curvature_matrix(
    scene: &Scene,
    steering: &SteeringSet,
    comm: &CommAux,
    sensing: Option<&SensingAux>,
    weights: &Weights,
) -> CMat {
    curvature_model(&IsacModel::new(scene, steering), comm, sensing, weights)
}

/// C₁ = [δ_c H diag(η)ᴴ, 0] with `ncols` columns in total.
pub(crate) fn linear_term_model(model: &IsacModel, comm: &CommAux, weights: &Weights, ncols: usize) -> CMat {
    let mut c1 = CMat::zeros(model.dim(), ncols);
    for k in 0..comm.n_users() {
        let scale = weights.comm * comm.eta[k].conj();
        c1.column_mut(k).copy_from(&(model.channels().column(k) * scale));
    }
    c1
}

/// max(floor, safety · |dominant eigenvalue|) of a Hermitian matrix.
pub fn shift_parameter(matrix: &CMat, cfg: &SolverConfig) -> f64 {
    let h = hermitian_part(matrix);
    let rho = dominant_eigenvalue_magnitude(h.nrows(), &cfg.power_iteration, |v| &h * v);
    (cfg.lambda_safety * rho).max(cfg.lambda_floor)
}

/// √(P_t / tr(XXᴴ)) · X
pub fn project_total_power(x: &CMat, power_budget: f64) -> Result<CMat> {
    let p = frob_sq(x);
    if !(p > 0.0) || !p.is_finite() {
        return Err(IsacError::DegenerateProjection("cannot scale a zero matrix onto the power sphere".into()));
    }
    Ok(x.scale((power_budget / p).sqrt()))
}

/// Scales every row to squared norm P_t / N_t.
pub fn project_per_antenna(x: &CMat, power_budget: f64) -> Result<CMat> {
    let per_row = power_budget / x.nrows() as f64;
    let mut out = x.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        let p = row.norm_squared();
        if !(p > 0.0) || !p.is_finite() {
            return Err(IsacError::DegenerateProjection(format!("row {i} has zero power")));
        }
        row *= C64::from((per_row / p).sqrt());
    }
    Ok(out)
}

/// Columns used for the matched-filter start of the sensing streams.
fn sensing_pool(model: &IsacModel) -> Vec<CVec> {
    let mut pool = Vec::new();
    for block in [model.steering(), model.steering_dtheta(), model.steering_dphi()] {
        for col in block.column_iter() {
            let n = col.norm();
            if n > 0.0 {
                pool.push(col.unscale(n));
            }
        }
    }
    if pool.is_empty() {
        for col in model.channels().column_iter() {
            let n = col.norm();
            if n > 0.0 {
                pool.push(col.unscale(n));
            }
        }
    }
    pool
}

pub(crate) fn initial_point(model: &IsacModel, ncols: usize, budget: f64, cfg: &SolverConfig) -> Result<CMat> {
    let n = model.dim();
    let k_users = model.n_users();
    let raw = match &cfg.init {
        InitMode::MatchedFilter => {
            let mut w = CMat::zeros(n, ncols);
            for k in 0..k_users {
                let h = model.channels().column(k);
                let norm = h.norm();
                if norm > 0.0 {
                    w.column_mut(k).copy_from(&h.unscale(norm));
                }
            }
            let pool = sensing_pool(model);
            if !pool.is_empty() {
                for j in k_users..ncols {
                    w.column_mut(j).copy_from(&pool[(j - k_users) % pool.len()]);
                }
            }
            w
        }
        InitMode::Random { seed } => {
            let mut rng = ChaCha20Rng::seed_from_u64(*seed);
            complex_gaussian_matrix(n, ncols, &mut rng)
        }
        InitMode::Supplied(w) => {
            if w.nrows() != n || w.ncols() != ncols {
                return Err(IsacError::DimensionMismatch(format!(
                    "initial point is {}x{}, expected {n}x{ncols}",
                    w.nrows(),
                    w.ncols()
                )));
            }
            w.clone()
        }
    };
    match cfg.power_constraint {
        PowerConstraint::Total => project_total_power(&raw, budget),
        PowerConstraint::PerAntenna => project_per_antenna(&raw, budget),
    }
}

/// Feasible set of the iterate: the Euclidean sphere (or per-antenna rows) in
/// W-space, or the ellipsoid tr(PᴴGP) = P_t in coefficient space.
pub(crate) enum Geometry {
    Euclidean(PowerConstraint),
    Gram { gram: CMat, chol: Cholesky<C64, Dyn> },
}

pub(crate) struct Evaluation {
    pub objective: f64,
    inverse: Option<(RMat, f64)>,
}

pub(crate) struct Surrogate {
    pub c1: CMat,
    pub curvature: CMat,
}

pub(crate) struct Engine<'a> {
    pub model: &'a IsacModel,
    pub weights: Weights,
    pub budget: f64,
    pub geometry: Geometry,
    pub cfg: &'a SolverConfig,
}

pub(crate) struct EngineOutput {
    pub x: CMat,
    pub trace: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub last_change: f64,
    pub timings: PhaseTimings,
}

impl Engine<'_> {
    pub fn evaluate(&self, x: &CMat) -> Result<Evaluation> {
        let mut objective = self.weights.comm * self.model.sum_rate(x);
        let mut inverse = None;
        if self.weights.sensing > 0.0 {
            let (inv, jitter) = fim_inverse(self.model, x, None)?;
            objective -= self.weights.sensing * inv.trace();
            inverse = Some((inv, jitter));
        }
        Ok(Evaluation { objective, inverse })
    }

    pub fn surrogate(&self, x: &CMat, eval: &Evaluation) -> Surrogate {
        let comm = comm_aux_model(self.model, x);
        let sensing = eval
            .inverse
            .as_ref()
            .map(|(inv, jitter)| sensing_aux_from_inverse(self.model, inv.clone(), *jitter));
        let curvature = curvature_model(self.model, &comm, sensing.as_ref(), &self.weights);
        let c1 = linear_term_model(self.model, &comm, &self.weights, x.ncols());
        Surrogate { c1, curvature }
    }

    pub fn shift(&self, curvature: &CMat) -> f64 {
        match &self.geometry {
            Geometry::Euclidean(_) => shift_parameter(curvature, self.cfg),
            Geometry::Gram { chol, .. } => {
                // dominant eigenvalue of the pencil (S, G) via L⁻¹ S L⁻ᴴ
                let l = chol.l();
                let lh = l.adjoint();
                let rho = dominant_eigenvalue_magnitude(curvature.nrows(), &self.cfg.power_iteration, |v| {
                    let y = lh.solve_upper_triangular(v).unwrap_or_else(|| v.clone());
                    let z = curvature * y;
                    l.solve_lower_triangular(&z).unwrap_or(z)
                });
                (self.cfg.lambda_safety * rho).max(self.cfg.lambda_floor)
            }
        }
    }

    /// C₁ + C₂ X with C₂ = λM + S, M the metric of the geometry.
    pub fn linear_target(&self, x: &CMat, sur: &Surrogate, lambda: f64) -> CMat {
        let metric_x = match &self.geometry {
            Geometry::Euclidean(_) => x.clone(),
            Geometry::Gram { gram, .. } => gram * x,
        };
        &sur.c1 + metric_x.scale(lambda) + &sur.curvature * x
    }

    pub fn project(&self, target: &CMat) -> Result<CMat> {
        match &self.geometry {
            Geometry::Euclidean(PowerConstraint::Total) => project_total_power(target, self.budget),
            Geometry::Euclidean(PowerConstraint::PerAntenna) => project_per_antenna(target, self.budget),
            Geometry::Gram { chol, .. } => {
                let dir = chol.solve(target);
                let power = real_inner(target, &dir);
                if !(power > 0.0) || !power.is_finite() {
                    return Err(IsacError::DegenerateProjection("zero coefficient update".into()));
                }
                Ok(dir.scale((self.budget / power).sqrt()))
            }
        }
    }

    pub fn run(&self, x0: CMat) -> Result<EngineOutput> {
        let mut timings = PhaseTimings::default();
        let loop_start = Instant::now();
        let t = Instant::now();
        let mut eval = self.evaluate(&x0)?;
        timings.evaluate_ms += ms_since(t);
        let mut x = x0;
        let mut trace = vec![eval.objective];
        let mut lambdas = Vec::new();
        let mut converged = false;
        let mut last_change = f64::INFINITY;
        let mut iterations = 0;
        while iterations < self.cfg.max_iters {
            iterations += 1;
            let t = Instant::now();
            let sur = self.surrogate(&x, &eval);
            timings.aux_ms += ms_since(t);

            let t = Instant::now();
            let mut lambda = self.shift(&sur.curvature);
            timings.shift_ms += ms_since(t);

            let (x_new, eval_new) = loop {
                let t = Instant::now();
                let candidate = self.project(&self.linear_target(&x, &sur, lambda))?;
                timings.update_ms += ms_since(t);
                let t = Instant::now();
                let e = self.evaluate(&candidate);
                timings.evaluate_ms += ms_since(t);
                let acceptable = match &e {
                    Ok(e) => e.objective >= eval.objective,
                    Err(IsacError::SingularFim) => false,
                    Err(_) => true,
                };
                if acceptable || !self.cfg.ascent_safeguard || lambda > 1e12 * (1.0 + trace[0].abs()) {
                    break (candidate, e?);
                }
                lambda *= 2.0;
            };
            lambdas.push(lambda);
            last_change = (eval_new.objective - eval.objective).abs();
            trace.push(eval_new.objective);
            x = x_new;
            eval = eval_new;
            if self.cfg.tol > 0.0 && last_change <= self.cfg.tol {
                converged = true;
                break;
            }
        }
        timings.loop_ms = ms_since(loop_start);
        Ok(EngineOutput {
            x,
            trace,
            lambdas,
            iterations,
            converged,
            last_change,
            timings,
        })
    }
}

/// Final metrics of a beamformer as reported in a [`SolveResult`].
pub(crate) fn final_metrics(model: &IsacModel, w: &CMat, weights: &Weights) -> (f64, f64, f64) {
    let sum_rate = model.sum_rate(w);
    let crlb = if model.n_targets() > 0 {
        fim_inverse(model, w, None).map(|(inv, _)| inv.trace()).unwrap_or(f64::INFINITY)
    } else {
        f64::INFINITY
    };
    let mut objective = weights.comm * sum_rate;
    if weights.sensing > 0.0 {
        objective -= weights.sensing * crlb;
    }
    (sum_rate, crlb, objective)
}

pub(crate) fn finish(
    out: EngineOutput,
    w: CMat,
    n_comm: usize,
    model: &IsacModel,
    weights: &Weights,
    budget: f64,
    setup_ms: f64,
) -> Result<SolveResult> {
    let (sum_rate, crlb_trace, objective) = final_metrics(model, &w, weights);
    let mut timings = out.timings;
    timings.setup_ms = setup_ms;
    let result = SolveResult {
        beamformer: Beamformer::new(w, n_comm, budget)?,
        objective_trace: out.trace,
        lambda_trace: out.lambdas,
        objective,
        sum_rate,
        crlb_trace,
        iterations: out.iterations,
        converged: out.converged,
        timings,
    };
    if result.converged {
        Ok(result)
    } else {
        Err(IsacError::NonConvergence {
            iterations: out.iterations,
            last_change: out.last_change,
            result: Box::new(result),
        })
    }
}

fn validate_problem(scene: &Scene, weights: &Weights) -> Result<()> {
    scene.validate()?;
    Weights::new(weights.comm, weights.sensing)?;
    if weights.sensing > 0.0 && scene.n_targets() == 0 {
        return Err(IsacError::InvalidInput("a positive sensing weight needs at least one target".into()));
    }
    Ok(())
}

/// One SCA iteration from `w`. Returns the next iterate and the shift λ used.
pub fn sca_step(
    scene: &Scene,
    steering: &SteeringSet,
    w: &Beamformer,
    weights: &Weights,
    cfg: &SolverConfig,
) -> Result<(Beamformer, f64)> {
    check_shape(scene, w.matrix(), w.n_comm())?;
    let model = IsacModel::new(scene, steering);
    let engine = Engine {
        model: &model,
        weights: *weights,
        budget: scene.power_budget,
        geometry: Geometry::Euclidean(cfg.power_constraint),
        cfg,
    };
    let eval = engine.evaluate(w.matrix())?;
    let sur = engine.surrogate(w.matrix(), &eval);
    let lambda = engine.shift(&sur.curvature);
    let next = engine.project(&engine.linear_target(w.matrix(), &sur, lambda))?;
    Ok((w.with_matrix(next)?, lambda))
}

/// Runs the full-dimension solver from the configured initial point.
pub fn solve(scene: &Scene, weights: &Weights, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    validate_problem(scene, weights)?;
    let setup = Instant::now();
    let steering = crate::scene::build_steering_set(scene)?;
    let model = IsacModel::new(scene, &steering);
    let ncols = scene.n_users() + cfg.n_sensing(scene);
    let x0 = initial_point(&model, ncols, scene.power_budget, cfg)?;
    let engine = Engine {
        model: &model,
        weights: *weights,
        budget: scene.power_budget,
        geometry: Geometry::Euclidean(cfg.power_constraint),
        cfg,
    };
    let setup_ms = ms_since(setup);
    let out = engine.run(x0)?;
    let w = out.x.clone();
    finish(out, w, scene.n_users(), &model, weights, scene.power_budget, setup_ms)
}

/// ∇f(W) = 2C₁ + 2SW.
pub fn analytic_gradient(scene: &Scene, steering: &SteeringSet, w: &Beamformer, weights: &Weights) -> Result<CMat> {
    check_shape(scene, w.matrix(), w.n_comm())?;
    let model = IsacModel::new(scene, steering);
    Ok(gradient_model(&model, w.matrix(), weights)?)
}

pub(crate) fn gradient_model(model: &IsacModel, w: &CMat, weights: &Weights) -> Result<CMat> {
    let comm = comm_aux_model(model, w);
    let sensing = if weights.sensing > 0.0 {
        Some(sensing_aux_model(model, w, None)?)
    } else {
        None
    };
    let s = curvature_model(model, &comm, sensing.as_ref(), weights);
    let c1 = linear_term_model(model, &comm, weights, w.ncols());
    Ok((c1 + s * w).scale(2.0))
}

/// Rate surrogate r_k(W) built at the point where `aux` was computed:
/// log(1+ξ) − ξ + 2 Re{η h_kᴴ w_k} − β (Σ_j |h_kᴴ w_j|² + σ_k²).
pub fn rate_surrogate(scene: &Scene, aux: &CommAux, w: &Beamformer, k: usize) -> Result<f64> {
    check_shape(scene, w.matrix(), w.n_comm())?;
    if k >= aux.n_users() {
        return Err(IsacError::DimensionMismatch(format!("user {k} of {}", aux.n_users())));
    }
    let g = scene.channels.column(k).adjoint() * w.matrix();
    let total: f64 = g.iter().map(|z| z.norm_sqr()).sum::<f64>() + scene.noise_comm[k];
    let xi = aux.xi[k];
    Ok(xi.ln_1p() - xi + 2.0 * (aux.eta[k] * g[(0, k)]).re - aux.beta[k] * total)
}

/// tr(Φ F(W)) − 2 tr(F_t⁻¹), an upper bound on −tr(F(W)⁻¹) that is tight at the
/// point where `aux` was computed.
pub fn crlb_surrogate(scene: &Scene, steering: &SteeringSet, aux: &SensingAux, w: &Beamformer) -> Result<f64> {
    check_shape(scene, w.matrix(), w.n_comm())?;
    let f = IsacModel::new(scene, steering).fim(w.matrix());
    Ok(aux.phi.component_mul(&f).sum() - 2.0 * aux.crlb)
}

/// 2 Re tr(W₀ Wᴴ C) − tr(W₀ W₀ᴴ C), the tangent minorant of tr(W Wᴴ C) at W₀
/// for positive semidefinite C.
pub fn trace_quadratic_minorant(c: &CMat, w0: &CMat, w: &CMat) -> f64 {
    2.0 * (w0 * w.adjoint() * c).trace().re - (w0 * w0.adjoint() * c).trace().re
}
