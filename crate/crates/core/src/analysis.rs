//! Checks on computed beamformers: stationarity and the optimal-structure
//! residuals, numerical rank, and brute-force oracles for the gradient and the
//! Fisher information.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::linalg::{complex_gaussian_matrix, frob, real_inner, CMat, RMat, C64};
use crate::metrics::{objective, Beamformer, Weights};
use crate::model::{IsacModel, QFault};
use crate::sca::{self, project_total_power};
use crate::scene::{Scene, SteeringSet};

/// Residuals of the stationarity conditions on the power sphere,
/// ∇f(W) = 2μW, split into the closed-form W_c structure and the eigen
/// structure of W_s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObsReport {
    pub multiplier: f64,
    /// ‖∇f − 2μW‖ / ‖∇f‖
    pub stationarity: f64,
    /// ‖(μI − S) W_c − C₁‖ / (max(‖S‖₂, |μ|)·‖W_c‖ + ‖C₁‖)
    pub comm_residual: f64,
    /// ‖S W_s − μ W_s‖ / max(‖W_s‖, ε), relative to ‖S‖₂
    pub sensing_residual: f64,
    pub sensing_rank: usize,
}

impl ObsReport {
    pub fn max_residual(&self) -> f64 {
        self.stationarity.max(self.comm_residual).max(self.sensing_residual)
    }
}

/// μ = Re⟨W, ∇f⟩ / (2 P_t), the least-squares fit of ∇f ≈ 2μW on the sphere.
pub fn recover_multiplier(w: &Beamformer, gradient: &CMat) -> f64 {
    real_inner(w.matrix(), gradient) / (2.0 * w.power_budget())
}

/// Number of singular values above `threshold_ratio` times the largest one.
pub fn rank_check(m: &CMat, threshold_ratio: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > threshold_ratio * top).count()
}

pub const DEFAULT_RANK_RATIO: f64 = 1e-6;

/// Evaluates the optimal-structure conditions at `w`.
///
/// Both structural residuals are relative to max(‖S‖₂, |μ|). `epsilon` floors
/// the ‖W_s‖ normalization; callers pass the beamformer scale √P_t so that a
/// vanishing sensing block counts as the zero solution.
pub fn obs_residuals(
    scene: &Scene,
    steering: &SteeringSet,
    w: &Beamformer,
    weights: &Weights,
    epsilon: f64,
) -> Result<ObsReport> {
    let model = IsacModel::new(scene, steering);
    let x = w.matrix();
    let comm = sca::comm_aux_model(&model, x);
    let sensing = if weights.sensing > 0.0 {
        Some(sca::sensing_aux_model(&model, x, None)?)
    } else {
        None
    };
    let s = sca::curvature_model(&model, &comm, sensing.as_ref(), weights);
    let c1 = sca::linear_term_model(&model, &comm, weights, x.ncols());
    let gradient = (&c1 + &s * x).scale(2.0);
    let mu = recover_multiplier(w, &gradient);
    let g_norm = frob(&gradient);
    let stationarity = if g_norm > 0.0 {
        frob(&(&gradient - x.scale(2.0 * mu))) / g_norm
    } else {
        0.0
    };

    let n = x.nrows();
    let k = w.n_comm();
    let wc = w.comm();
    let spectral = s.clone().singular_values().max().max(mu.abs());
    // Backward error of (μI − S) W_c = C1_c. Whenever W_s ≠ 0, μ lies on the
    // spectrum of S and the inverse form amplifies rounding without bound.
    let comm_residual = if k == 0 || frob(&wc) == 0.0 {
        0.0
    } else {
        let shifted = CMat::identity(n, n).scale(mu) - &s;
        let rhs = c1.columns(0, k).into_owned();
        let denom = spectral * frob(&wc) + frob(&rhs);
        if denom > 0.0 { frob(&(&shifted * &wc - &rhs)) / denom } else { 0.0 }
    };

    let ws = w.sensing();
    let sensing_residual = if ws.ncols() == 0 {
        0.0
    } else {
        let denom = frob(&ws).max(epsilon) * spectral;
        if denom > 0.0 {
            frob(&(&s * &ws - ws.scale(mu))) / denom
        } else {
            0.0
        }
    };

    Ok(ObsReport {
        multiplier: mu,
        stationarity,
        comm_residual,
        sensing_residual,
        sensing_rank: rank_check(&ws, DEFAULT_RANK_RATIO),
    })
}

/// Richardson combination (4 D(h) − D(2h)) / 3 of two central-difference
/// gradients, which removes the O(h²) term. Useful when the objective is so
/// large that round-off leaves no usable step for plain central differences.
pub fn fd_gradient_richardson(scene: &Scene, steering: &SteeringSet, w: &Beamformer, weights: &Weights, step: f64) -> Result<CMat> {
    let fine = fd_gradient(scene, steering, w, weights, step)?;
    let coarse = fd_gradient(scene, steering, w, weights, 2.0 * step)?;
    Ok((fine.scale(4.0) - coarse).unscale(3.0))
}

/// Relative gap between the analytic gradient and the Richardson oracle over a
/// short grid of steps proportional to √P_t, stopping at the first step within
/// `tol`. Returns the smallest gap seen and its step.
pub fn fd_gradient_gap(scene: &Scene, steering: &SteeringSet, w: &Beamformer, weights: &Weights, tol: f64) -> Result<(f64, f64)> {
    let an = sca::analytic_gradient(scene, steering, w, weights)?;
    let norm = frob(&an).max(f64::MIN_POSITIVE);
    let mut best = (f64::INFINITY, f64::NAN);
    for factor in [1e-4, 3e-4, 3e-5, 1e-3, 1e-5, 3e-3] {
        let step = factor * w.power_budget().sqrt();
        let fd = fd_gradient_richardson(scene, steering, w, weights, step)?;
        let rel = frob(&(&fd - &an)) / norm;
        if rel < best.0 {
            best = (rel, step);
        }
        if rel <= tol {
            break;
        }
    }
    Ok(best)
}

/// Central differences of the objective over every real and imaginary
/// coordinate, assembled as ∂f/∂Re W + j ∂f/∂Im W.
pub fn fd_gradient(scene: &Scene, steering: &SteeringSet, w: &Beamformer, weights: &Weights, step: f64) -> Result<CMat> {
    if !(step > 0.0) {
        return Err(IsacError::InvalidInput("finite-difference step must be positive".into()));
    }
    let x = w.matrix();
    let eval = |m: CMat| -> Result<f64> { objective(scene, steering, &w.with_matrix(m)?, weights) };
    let mut g = CMat::zeros(x.nrows(), x.ncols());
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            for unit in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                let mut plus = x.clone();
                plus[(i, j)] += unit * step;
                let mut minus = x.clone();
                minus[(i, j)] -= unit * step;
                let d = (eval(plus)? - eval(minus)?) / (2.0 * step);
                g[(i, j)] += unit * d;
            }
        }
    }
    Ok(g)
}

/// How the Jacobian oracle averages over the transmitted signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalAverage {
    /// Uses E[x xᴴ] = W Wᴴ directly.
    Exact,
    /// Draws x = W s with s ~ CN(0, I).
    Sampled { draws: usize, seed: u64 },
}

fn steering_unchecked(n_h: usize, n_v: usize, theta: f64, phi: f64) -> CMat {
    let hp = PI * theta.sin() * phi.sin();
    let vp = PI * phi.cos();
    let norm = ((n_h * n_v) as f64).sqrt();
    CMat::from_fn(n_h * n_v, 1, |idx, _| {
        let (h, v) = (idx / n_v, idx % n_v);
        C64::from_polar(1.0 / norm, h as f64 * hp + v as f64 * vp)
    })
}

/// Derivative of `f` at `x` by central differences, falling back to a
/// second-order one-sided stencil when x ± h leaves [lo, hi].
fn derivative(f: &dyn Fn(f64) -> CMat, x: f64, h: f64, lo: f64, hi: f64) -> CMat {
    if x - h >= lo && x + h <= hi {
        (f(x + h) - f(x - h)).unscale(2.0 * h)
    } else {
        let s = if x + 2.0 * h <= hi { h } else { -h };
        (f(x + s).scale(4.0) - f(x).scale(3.0) - f(x + 2.0 * s)).unscale(2.0 * s)
    }
}

/// Fisher information from finite-difference Jacobians of the noise-free
/// echo G(ω) x, G = B U Aᴴ. Each angle derivative is taken on freshly
/// evaluated steering vectors; the α derivatives are exact.
pub fn fd_fim(scene: &Scene, steering: &SteeringSet, w: &Beamformer, step: f64, average: SignalAverage) -> Result<RMat> {
    if !(step > 0.0) {
        return Err(IsacError::InvalidInput("finite-difference step must be positive".into()));
    }
    if w.n_antennas() != scene.n_tx() {
        return Err(IsacError::DimensionMismatch("beamformer does not match scene".into()));
    }
    let m = scene.n_targets();
    let (tx, rx) = (scene.tx, scene.rx);
    let response = |t: usize, theta: f64, phi: f64| -> CMat {
        let a = steering_unchecked(tx.n_horizontal, tx.n_vertical, theta, phi);
        let b = steering_unchecked(rx.n_horizontal, rx.n_vertical, theta, phi);
        b * a.adjoint() * steering.rcs[t]
    };
    let mut jac: Vec<CMat> = vec![CMat::zeros(scene.n_rx(), scene.n_tx()); 4 * m];
    for (t, target) in scene.targets.iter().enumerate() {
        let (theta, phi) = (target.azimuth, target.elevation);
        jac[t] = derivative(&|v| response(t, v, phi), theta, step, -PI, PI);
        jac[m + t] = derivative(&|v| response(t, theta, v), phi, step, -FRAC_PI_2, FRAC_PI_2);
        let a = steering_unchecked(tx.n_horizontal, tx.n_vertical, theta, phi);
        let b = steering_unchecked(rx.n_horizontal, rx.n_vertical, theta, phi);
        let g = b * a.adjoint();
        jac[3 * m + t] = g.map(|z| z * C64::new(0.0, 1.0));
        jac[2 * m + t] = g;
    }
    let second_moment = match average {
        SignalAverage::Exact => w.covariance(),
        SignalAverage::Sampled { draws, seed } => {
            if draws == 0 {
                return Err(IsacError::InvalidInput("need at least one signal draw".into()));
            }
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let s = complex_gaussian_matrix(w.matrix().ncols(), draws, &mut rng);
            let x = w.matrix() * s;
            (&x * x.adjoint()).unscale(draws as f64)
        }
    };
    let scale = 2.0 * scene.slots as f64 / scene.noise_radar;
    let mut f = RMat::zeros(4 * m, 4 * m);
    for i in 0..4 * m {
        let left = jac[i].adjoint();
        for j in i..4 * m {
            let v = scale * (&left * &jac[j] * &second_moment).trace().re;
            f[(i, j)] = v;
            f[(j, i)] = v;
        }
    }
    Ok(f)
}

/// Projected gradient ascent with finite-difference gradients, one step per
/// entry of `lambdas` with step size 1/(2λ).
pub fn fd_projected_ascent(
    scene: &Scene,
    steering: &SteeringSet,
    w0: &Beamformer,
    weights: &Weights,
    lambdas: &[f64],
    step: f64,
) -> Result<Beamformer> {
    let mut w = w0.clone();
    for &lambda in lambdas {
        let g = fd_gradient(scene, steering, &w, weights, step)?;
        let next = project_total_power(&(w.matrix() + g.unscale(2.0 * lambda)), w.power_budget())?;
        w = w.with_matrix(next)?;
    }
    Ok(w)
}

/// Random symmetric weighting for the adjoint identity.
pub fn random_symmetric(dim: usize, seed: u64) -> RMat {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let a = RMat::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    crate::linalg::symmetric_part(&a)
}

/// |tr(Φ F(W)) − Re tr(R_x Q(Φ))| relative to ‖Φ‖·‖F(W)‖, with an optional
/// corrupted Q assembly.
pub fn adjoint_residual(scene: &Scene, steering: &SteeringSet, w: &CMat, phi: &RMat, fault: Option<QFault>) -> f64 {
    let model = IsacModel::new(scene, steering);
    let f = model.fim(w);
    let lhs = phi.component_mul(&f).sum();
    let q = model.sensing_q_with_fault(phi, fault);
    let rhs = (w * w.adjoint() * q).trace().re;
    let scale = phi.norm() * f.norm();
    if scale > 0.0 { (lhs - rhs).abs() / scale } else { (lhs - rhs).abs() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    /// Records `value <= threshold`.
    pub fn at_most(&mut self, name: impl Into<String>, value: f64, threshold: f64) -> bool {
        let passed = value <= threshold;
        self.push(name, value, threshold, passed, None)
    }

    /// Records `value >= threshold`.
    pub fn at_least(&mut self, name: impl Into<String>, value: f64, threshold: f64) -> bool {
        let passed = value >= threshold;
        self.push(name, value, threshold, passed, None)
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64, threshold: f64, passed: bool, detail: Option<String>) -> bool {
        self.checks.push(CheckRecord {
            name: name.into(),
            value,
            threshold,
            passed,
            detail,
        });
        passed
    }

    pub fn failure(&mut self, name: impl Into<String>, detail: String) {
        self.push(name, f64::NAN, f64::NAN, false, Some(detail));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }
}
