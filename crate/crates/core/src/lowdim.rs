//! Reduced-dimension solver.
//!
//! Stationary beamformers lie in the span of N = [H, A, Ȧ_θ, Ȧ_φ], so W = N P
//! with a (K+3M) × (K+3M) coefficient matrix P. The iteration runs on P with
//! every transmit-side matrix X replaced by Nᴴ X and the power sphere replaced
//! by the ellipsoid tr(Pᴴ G P) = P_t, G = Nᴴ N. The shift term is λG, which is
//! the full-dimension surrogate pulled back through N; started from a point in
//! span(N), the iterates coincide with those of [`crate::sca::solve`].

use std::time::Instant;

use nalgebra::{Cholesky, Dyn};

use crate::error::{IsacError, Result};
use crate::linalg::{frob_sq, real_inner, CMat, C64};
use crate::metrics::{Beamformer, Weights};
use crate::model::IsacModel;
use crate::sca::{self, Engine, Geometry, InitMode, PowerConstraint, SolveResult, SolverConfig};
use crate::scene::{build_steering_set, Scene, SteeringSet};

#[derive(Debug, Clone)]
pub struct BasisSet {
    /// [H, A, Ȧ_θ, Ȧ_φ]
    pub basis: CMat,
    /// Nᴴ N, plus `jitter`·I when the plain Gram matrix could not be factorized
    pub gram: CMat,
    chol: Cholesky<C64, Dyn>,
    pub jitter: f64,
    n_users: usize,
    n_targets: usize,
}

/// Nᴴ·[H, A, Ȧ_θ, Ȧ_φ], block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannels {
    pub channels: CMat,
    pub steering: CMat,
    pub steering_dtheta: CMat,
    pub steering_dphi: CMat,
}

impl BasisSet {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_targets(&self) -> usize {
        self.n_targets
    }

    /// G⁻¹ X
    pub fn solve_gram(&self, x: &CMat) -> CMat {
        self.chol.solve(x)
    }

    /// Coefficients whose image N P is the orthogonal projection of `w` onto span(N).
    pub fn coefficients_of(&self, w: &CMat) -> CMat {
        self.solve_gram(&(self.basis.adjoint() * w))
    }
}

fn factorize(gram: &CMat) -> Option<Cholesky<C64, Dyn>> {
    let chol = Cholesky::new(gram.clone())?;
    let pivots = chol.l_dirty().diagonal().map(|z| z.re * z.re);
    let max = pivots.max();
    if max > 0.0 && pivots.min() > 1e-14 * max {
        Some(chol)
    } else {
        None
    }
}

pub fn build_basis(scene: &Scene, steering: &SteeringSet) -> Result<BasisSet> {
    let k = scene.n_users();
    let m = steering.n_targets();
    let n = scene.n_tx();
    if steering.a.nrows() != n {
        return Err(IsacError::DimensionMismatch("steering set does not match scene".into()));
    }
    let d = k + 3 * m;
    if d == 0 {
        return Err(IsacError::InvalidInput("basis needs at least one user or target".into()));
    }
    let mut basis = CMat::zeros(n, d);
    basis.columns_mut(0, k).copy_from(&scene.channels);
    basis.columns_mut(k, m).copy_from(&steering.a);
    basis.columns_mut(k + m, m).copy_from(&steering.a_dtheta);
    basis.columns_mut(k + 2 * m, m).copy_from(&steering.a_dphi);
    let plain = basis.adjoint() * &basis;
    if let Some(chol) = factorize(&plain) {
        return Ok(BasisSet {
            basis,
            gram: plain,
            chol,
            jitter: 0.0,
            n_users: k,
            n_targets: m,
        });
    }
    let jitter = 1e-10 * plain.trace().re / d as f64;
    let gram = &plain + CMat::identity(d, d).scale(jitter);
    let chol = if jitter > 0.0 { Cholesky::new(gram.clone()) } else { None };
    let chol = chol.ok_or(IsacError::RankDeficientBasis)?;
    Ok(BasisSet {
        basis,
        gram,
        chol,
        jitter,
        n_users: k,
        n_targets: m,
    })
}

pub fn effective_channels(basis: &BasisSet) -> EffectiveChannels {
    let (k, m) = (basis.n_users, basis.n_targets);
    let nh = basis.basis.adjoint();
    let block = |start: usize, len: usize| &nh * basis.basis.columns(start, len);
    EffectiveChannels {
        channels: block(0, k),
        steering: block(k, m),
        steering_dtheta: block(k + m, m),
        steering_dphi: block(k + 2 * m, m),
    }
}

/// P = [P_c, P_s] with W = N P.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub matrix: CMat,
    pub n_comm: usize,
}

impl Coefficients {
    /// tr(Pᴴ G P)
    pub fn power(&self, basis: &BasisSet) -> f64 {
        real_inner(&self.matrix, &(&basis.gram * &self.matrix))
    }

    pub fn beamformer(&self, basis: &BasisSet, power_budget: f64) -> Result<Beamformer> {
        Beamformer::new(&basis.basis * &self.matrix, self.n_comm, power_budget)
    }
}

fn engine<'a>(model: &'a IsacModel, basis: &BasisSet, weights: &Weights, budget: f64, cfg: &'a SolverConfig) -> Engine<'a> {
    Engine {
        model,
        weights: *weights,
        budget,
        geometry: Geometry::Gram {
            gram: basis.gram.clone(),
            chol: basis.chol.clone(),
        },
        cfg,
    }
}

fn check_constraint(cfg: &SolverConfig) -> Result<()> {
    if cfg.power_constraint == PowerConstraint::PerAntenna {
        return Err(IsacError::Unsupported(
            "the low-dimensional solver only handles the total power constraint".into(),
        ));
    }
    Ok(())
}

/// One coefficient-space iteration. Returns the next coefficients and λ.
pub fn ld_step(
    scene: &Scene,
    steering: &SteeringSet,
    basis: &BasisSet,
    p: &Coefficients,
    weights: &Weights,
    cfg: &SolverConfig,
) -> Result<(Coefficients, f64)> {
    check_constraint(cfg)?;
    if p.matrix.nrows() != basis.dim() {
        return Err(IsacError::DimensionMismatch(format!(
            "coefficients have {} rows, basis has {} columns",
            p.matrix.nrows(),
            basis.dim()
        )));
    }
    let model = IsacModel::new(scene, steering).transformed(&basis.basis);
    let eng = engine(&model, basis, weights, scene.power_budget, cfg);
    let eval = eng.evaluate(&p.matrix)?;
    let sur = eng.surrogate(&p.matrix, &eval);
    let lambda = eng.shift(&sur.curvature);
    let next = eng.project(&eng.linear_target(&p.matrix, &sur, lambda))?;
    Ok((
        Coefficients {
            matrix: next,
            n_comm: p.n_comm,
        },
        lambda,
    ))
}

/// Initial coefficients: the configured full-space start mapped into span(N)
/// and scaled onto the ellipsoid.
pub fn initial_coefficients(scene: &Scene, steering: &SteeringSet, basis: &BasisSet, cfg: &SolverConfig) -> Result<Coefficients> {
    let model = IsacModel::new(scene, steering);
    let w0 = sca::initial_point(&model, basis.dim(), scene.power_budget, cfg)?;
    let raw = basis.coefficients_of(&w0);
    let power = real_inner(&raw, &(&basis.gram * &raw));
    if !(power > 0.0) || !power.is_finite() {
        return Err(IsacError::DegenerateProjection("initial point is orthogonal to the basis".into()));
    }
    Ok(Coefficients {
        matrix: raw.scale((scene.power_budget / power).sqrt()),
        n_comm: scene.n_users(),
    })
}

/// Solves over the structured basis with K + 3M streams; the reported
/// beamformer is W = N P.
pub fn solve_ld(scene: &Scene, weights: &Weights, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    check_constraint(cfg)?;
    scene.validate()?;
    Weights::new(weights.comm, weights.sensing)?;
    if weights.sensing > 0.0 && scene.n_targets() == 0 {
        return Err(IsacError::InvalidInput("a positive sensing weight needs at least one target".into()));
    }
    let setup = Instant::now();
    let steering = build_steering_set(scene)?;
    let basis = build_basis(scene, &steering)?;
    let full = IsacModel::new(scene, &steering);
    let reduced = full.transformed(&basis.basis);
    if let InitMode::Supplied(w) = &cfg.init {
        if w.nrows() != scene.n_tx() || w.ncols() != basis.dim() {
            return Err(IsacError::DimensionMismatch(format!(
                "initial point is {}x{}, the structured solver expects {}x{}",
                w.nrows(),
                w.ncols(),
                scene.n_tx(),
                basis.dim()
            )));
        }
    }
    let p0 = initial_coefficients(scene, &steering, &basis, cfg)?;
    let eng = engine(&reduced, &basis, weights, scene.power_budget, cfg);
    let setup_ms = setup.elapsed().as_secs_f64() * 1e3;
    let out = eng.run(p0.matrix)?;
    let mut w = &basis.basis * &out.x;
    if basis.jitter > 0.0 {
        let p = frob_sq(&w);
        if p > 0.0 {
            w = w.scale((scene.power_budget / p).sqrt());
        }
    }
    sca::finish(out, w, scene.n_users(), &full, weights, scene.power_budget, setup_ms)
}
