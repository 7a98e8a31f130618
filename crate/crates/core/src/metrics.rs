//! Communication rate, Fisher information, CRLB trace, and the weighted ISAC
//! objective for a given beamformer.

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::linalg::{frob_sq, symmetric_part, CMat, RMat};
use crate::model::IsacModel;
use crate::scene::{Scene, SteeringSet};

/// W = [W_c, W_s]: the first `n_comm` columns carry user data, the rest are
/// dedicated sensing streams (possibly none).
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    matrix: CMat,
    n_comm: usize,
    power_budget: f64,
}

impl Beamformer {
    pub fn new(matrix: CMat, n_comm: usize, power_budget: f64) -> Result<Self> {
        if n_comm > matrix.ncols() {
            return Err(IsacError::DimensionMismatch(format!(
                "{n_comm} communication columns requested from a matrix with {} columns",
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(IsacError::InvalidInput("beamformer has non-finite entries".into()));
        }
        if !(power_budget > 0.0 && power_budget.is_finite()) {
            return Err(IsacError::InvalidInput("power budget must be positive".into()));
        }
        Ok(Self {
            matrix,
            n_comm,
            power_budget,
        })
    }

    pub fn from_parts(comm: &CMat, sensing: &CMat, power_budget: f64) -> Result<Self> {
        if comm.nrows() != sensing.nrows() {
            return Err(IsacError::DimensionMismatch("W_c and W_s row counts differ".into()));
        }
        let mut w = CMat::zeros(comm.nrows(), comm.ncols() + sensing.ncols());
        w.columns_mut(0, comm.ncols()).copy_from(comm);
        w.columns_mut(comm.ncols(), sensing.ncols()).copy_from(sensing);
        Self::new(w, comm.ncols(), power_budget)
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn comm(&self) -> CMat {
        self.matrix.columns(0, self.n_comm).into_owned()
    }

    pub fn sensing(&self) -> CMat {
        self.matrix.columns(self.n_comm, self.n_sensing()).into_owned()
    }

    pub fn n_antennas(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_comm(&self) -> usize {
        self.n_comm
    }

    pub fn n_sensing(&self) -> usize {
        self.matrix.ncols() - self.n_comm
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    /// tr(W Wᴴ)
    pub fn power(&self) -> f64 {
        frob_sq(&self.matrix)
    }

    pub fn is_feasible(&self) -> bool {
        self.power() <= self.power_budget * (1.0 + 1e-12)
    }

    pub fn is_on_sphere(&self) -> bool {
        (self.power() - self.power_budget).abs() <= 1e-9 * self.power_budget
    }

    /// R_x = W_c W_cᴴ + W_s W_sᴴ
    pub fn covariance(&self) -> CMat {
        &self.matrix * self.matrix.adjoint()
    }

    /// Same beamformer with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.scale(factor),
            ..self.clone()
        }
    }

    pub fn with_matrix(&self, matrix: CMat) -> Result<Self> {
        Self::new(matrix, self.n_comm, self.power_budget)
    }

    fn check(&self, scene: &Scene) -> Result<()> {
        if self.n_antennas() != scene.n_tx() {
            return Err(IsacError::DimensionMismatch(format!(
                "beamformer has {} rows, scene has {} transmit antennas",
                self.n_antennas(),
                scene.n_tx()
            )));
        }
        if self.n_comm != scene.n_users() {
            return Err(IsacError::DimensionMismatch(format!(
                "beamformer has {} communication columns, scene has {} users",
                self.n_comm,
                scene.n_users()
            )));
        }
        Ok(())
    }
}

/// Real symmetric 4M × 4M Fisher information, parameter order
/// (θ₁..θ_M, φ₁..φ_M, Re α₁..Re α_M, Im α₁..Im α_M).
#[derive(Debug, Clone, PartialEq)]
pub struct FisherInfo {
    matrix: RMat,
}

impl FisherInfo {
    pub fn new(matrix: RMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() % 4 != 0 {
            return Err(IsacError::DimensionMismatch(format!(
                "Fisher information must be 4M x 4M, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    pub fn n_targets(&self) -> usize {
        self.matrix.nrows() / 4
    }

    /// 1e-10 · tr(F) / 4M, the fallback regularization for ill-posed geometries.
    pub fn default_jitter(&self) -> f64 {
        let n = self.matrix.nrows().max(1) as f64;
        1e-10 * self.matrix.trace() / n
    }

    /// (F + jitter·I)⁻¹ via Cholesky.
    pub fn inverse(&self, jitter: f64) -> Result<RMat> {
        let n = self.matrix.nrows();
        if n == 0 {
            return Err(IsacError::SingularFim);
        }
        let shifted = &self.matrix + RMat::identity(n, n).scale(jitter);
        let inv = Cholesky::new(shifted).ok_or(IsacError::SingularFim)?.inverse();
        if inv.iter().all(|v| v.is_finite()) {
            Ok(symmetric_part(&inv))
        } else {
            Err(IsacError::SingularFim)
        }
    }

    /// Inverse without regularization when possible, otherwise with
    /// [`default_jitter`](Self::default_jitter). Returns the jitter used.
    pub fn inverse_auto(&self) -> Result<(RMat, f64)> {
        match self.inverse(0.0) {
            Ok(inv) => Ok((inv, 0.0)),
            Err(_) => {
                let jitter = self.default_jitter();
                if !(jitter > 0.0) {
                    return Err(IsacError::SingularFim);
                }
                self.inverse(jitter).map(|inv| (inv, jitter))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub comm: f64,
    pub sensing: f64,
}

impl Weights {
    pub fn new(comm: f64, sensing: f64) -> Result<Self> {
        if !(comm >= 0.0 && sensing >= 0.0 && comm.is_finite() && sensing.is_finite()) {
            return Err(IsacError::InvalidInput(format!("weights ({comm}, {sensing}) must be nonnegative")));
        }
        if comm == 0.0 && sensing == 0.0 {
            return Err(IsacError::InvalidInput("weights cannot both be zero".into()));
        }
        Ok(Self { comm, sensing })
    }
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            comm: 0.25,
            sensing: 1.0,
        }
    }
}

/// log(1 + SINR_k) in nats/s/Hz; `k` is zero-based.
pub fn user_rate(scene: &Scene, w: &Beamformer, k: usize) -> Result<f64> {
    w.check(scene)?;
    if k >= scene.n_users() {
        return Err(IsacError::DimensionMismatch(format!("user {k} of {}", scene.n_users())));
    }
    let g = scene.channels.column(k).adjoint() * w.matrix();
    let desired = g[(0, k)].norm_sqr();
    let interference: f64 = (0..g.ncols()).filter(|&j| j != k).map(|j| g[(0, j)].norm_sqr()).sum();
    Ok((desired / (interference + scene.noise_comm[k])).ln_1p())
}

pub fn sum_rate(scene: &Scene, w: &Beamformer) -> Result<f64> {
    (0..scene.n_users()).map(|k| user_rate(scene, w, k)).sum()
}

pub fn fim(scene: &Scene, steering: &SteeringSet, w: &Beamformer) -> Result<FisherInfo> {
    w.check(scene)?;
    if steering.n_targets() == 0 {
        return Err(IsacError::InvalidInput("Fisher information needs at least one target".into()));
    }
    if steering.a.nrows() != scene.n_tx() {
        return Err(IsacError::DimensionMismatch("steering set does not match scene".into()));
    }
    let model = IsacModel::new(scene, steering);
    FisherInfo::new(symmetric_part(&model.fim(w.matrix())))
}

/// tr((F + jitter·I)⁻¹).
pub fn crlb_trace(fi: &FisherInfo, jitter: f64) -> Result<f64> {
    if !(jitter >= 0.0) {
        return Err(IsacError::InvalidInput("jitter must be nonnegative".into()));
    }
    Ok(fi.inverse(jitter)?.trace())
}

/// CRLB trace with the automatic jitter fallback.
pub fn crlb_trace_auto(fi: &FisherInfo) -> Result<f64> {
    Ok(fi.inverse_auto()?.0.trace())
}

/// δ_c · Σ R_k − δ_s · tr(F⁻¹).
pub fn objective(scene: &Scene, steering: &SteeringSet, w: &Beamformer, weights: &Weights) -> Result<f64> {
    let mut value = weights.comm * sum_rate(scene, w)?;
    if weights.sensing > 0.0 {
        value -= weights.sensing * crlb_trace_auto(&fim(scene, steering, w)?)?;
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian_matrix, C64};
    use crate::scene::{build_steering_set, sample_scene, ArrayGeometry, PowerSettings, SceneDims};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn default_instance(seed: u64) -> (Scene, SteeringSet, Beamformer) {
        let scene = sample_scene(seed, &SceneDims::default(), &PowerSettings::default()).unwrap();
        let st = build_steering_set(&scene).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed + 100);
        let w = complex_gaussian_matrix(16, 10, &mut rng);
        let w = w.scale((10.0 / frob_sq(&w)).sqrt());
        (scene, st, Beamformer::new(w, 4, 10.0).unwrap())
    }

    fn unit_scene(channels: CMat) -> Scene {
        let n = channels.nrows();
        let k = channels.ncols();
        Scene::new(
            ArrayGeometry::new(n, 1).unwrap(),
            ArrayGeometry::new(2, 2).unwrap(),
            channels,
            vec![],
            vec![1.0; k],
            1.0,
            1,
            10.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_beamformer_has_zero_rate_and_fim() {
        let (scene, st, w) = default_instance(1);
        let zero = w.scaled(0.0);
        assert_eq!(sum_rate(&scene, &zero).unwrap(), 0.0);
        assert_eq!(fim(&scene, &st, &zero).unwrap().matrix().norm(), 0.0);
        assert!(matches!(crlb_trace_auto(&fim(&scene, &st, &zero).unwrap()), Err(IsacError::SingularFim)));
    }

    #[test]
    fn single_user_closed_form() {
        let mut h = CMat::zeros(4, 1);
        h[(0, 0)] = C64::new(1.0, 0.0);
        let scene = unit_scene(h);
        let mut w = CMat::zeros(4, 1);
        w[(0, 0)] = C64::new(10f64.sqrt(), 0.0);
        let w = Beamformer::new(w, 1, 10.0).unwrap();
        let r = user_rate(&scene, &w, 0).unwrap();
        assert!((r - 11f64.ln()).abs() < 1e-12);
        assert!((r - 2.3979).abs() < 1e-4);
    }

    #[test]
    fn no_users_no_rate() {
        let scene = unit_scene(CMat::zeros(4, 0));
        let w = Beamformer::new(CMat::from_element(4, 1, C64::new(1.0, 0.0)), 0, 10.0).unwrap();
        assert_eq!(sum_rate(&scene, &w).unwrap(), 0.0);
    }

    #[test]
    fn orthogonal_users_add_up() {
        let mut h = CMat::zeros(4, 2);
        h[(0, 0)] = C64::new(1.0, 0.0);
        h[(1, 1)] = C64::new(0.0, 2.0);
        let scene = unit_scene(h);
        let mut w = CMat::zeros(4, 2);
        w[(0, 0)] = C64::new(2.0, 0.0);
        w[(1, 1)] = C64::new(1.0, 0.0);
        let w = Beamformer::new(w, 2, 10.0).unwrap();
        let sr = sum_rate(&scene, &w).unwrap();
        assert!((sr - (5f64.ln() + 5f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn rate_matches_scripted_sinr() {
        let (scene, _, w) = default_instance(3);
        for k in 0..4 {
            let h = scene.channels.column(k);
            let mut num = 0.0;
            let mut den = scene.noise_comm[k];
            for j in 0..w.matrix().ncols() {
                let mut z = C64::new(0.0, 0.0);
                for n in 0..16 {
                    z += h[n].conj() * w.matrix()[(n, j)];
                }
                if j == k {
                    num = z.norm_sqr();
                } else {
                    den += z.norm_sqr();
                }
            }
            let want = (1.0 + num / den).ln();
            let got = user_rate(&scene, &w, k).unwrap();
            assert!((got - want).abs() <= 1e-10 * want.abs());
        }
        let total: f64 = (0..4).map(|k| user_rate(&scene, &w, k).unwrap()).sum();
        assert!((sum_rate(&scene, &w).unwrap() - total).abs() < 1e-12);
    }

    #[test]
    fn user_index_and_shape_checked() {
        let (scene, st, w) = default_instance(2);
        assert!(user_rate(&scene, &w, 4).is_err());
        let bad = Beamformer::new(CMat::zeros(8, 6), 4, 10.0).unwrap();
        assert!(matches!(sum_rate(&scene, &bad), Err(IsacError::DimensionMismatch(_))));
        assert!(fim(&scene, &st, &bad).is_err());
    }

    #[test]
    fn crlb_of_simple_matrices() {
        let fi = FisherInfo::new(RMat::identity(4, 4)).unwrap();
        assert!((crlb_trace(&fi, 0.0).unwrap() - 4.0).abs() < 1e-14);
        let fi = FisherInfo::new(RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 4.0, 5.0, 10.0]))).unwrap();
        assert!((crlb_trace(&fi, 0.0).unwrap() - 1.05).abs() < 1e-14);
        assert!(crlb_trace(&fi, -1.0).is_err());
    }

    #[test]
    fn crlb_matches_dense_inverse() {
        let dims = SceneDims { targets: 2, ..SceneDims::default() };
        let scene = sample_scene(11, &dims, &PowerSettings::default()).unwrap();
        let st = build_steering_set(&scene).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let w = Beamformer::new(complex_gaussian_matrix(16, 10, &mut rng), 4, 100.0).unwrap();
        let fi = fim(&scene, &st, &w).unwrap();
        let dense = fi.matrix().clone().try_inverse().unwrap().trace();
        let got = crlb_trace(&fi, 0.0).unwrap();
        assert!((got - dense).abs() <= 1e-9 * dense.abs());
    }

    #[test]
    fn fim_symmetric_psd_and_linear_in_power() {
        for seed in 0..10 {
            let (scene, st, w) = default_instance(seed);
            let f = fim(&scene, &st, &w).unwrap();
            let fm = f.matrix();
            assert!((fm - fm.transpose()).norm() <= 1e-10 * fm.norm());
            let min_ev = fm.clone().symmetric_eigenvalues().min();
            assert!(min_ev >= -1e-8 * fm.norm());
            for c in [0.5, 2.0, 7.0] {
                let fc = fim(&scene, &st, &w.scaled(f64::sqrt(c))).unwrap();
                assert!((fc.matrix() - fm.scale(c)).norm() <= 1e-9 * c * fm.norm());
                let ratio = crlb_trace(&f, 0.0).unwrap() / crlb_trace(&fc, 0.0).unwrap();
                assert!((ratio - c).abs() <= 1e-9 * c);
            }
        }
    }

    #[test]
    fn objective_composes_metrics() {
        let (scene, st, w) = default_instance(4);
        let sr = sum_rate(&scene, &w).unwrap();
        let crlb = crlb_trace(&fim(&scene, &st, &w).unwrap(), 0.0).unwrap();
        let only_comm = objective(&scene, &st, &w, &Weights::new(1.0, 0.0).unwrap()).unwrap();
        let only_sense = objective(&scene, &st, &w, &Weights::new(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(only_comm, sr);
        assert!((only_sense + crlb).abs() < 1e-12 * crlb);
        let both = objective(&scene, &st, &w, &Weights::default()).unwrap();
        assert!((both - (0.25 * sr - crlb)).abs() <= 1e-12 * both.abs().max(1.0));
    }

    #[test]
    fn weights_validated() {
        assert!(Weights::new(0.0, 0.0).is_err());
        assert!(Weights::new(-1.0, 1.0).is_err());
        assert!(Weights::new(0.0, 1.0).is_ok());
    }

    #[test]
    fn beamformer_parts() {
        let (_, _, w) = default_instance(0);
        assert_eq!(w.n_comm(), 4);
        assert_eq!(w.n_sensing(), 6);
        assert!(w.is_on_sphere());
        let rebuilt = Beamformer::from_parts(&w.comm(), &w.sensing(), 10.0).unwrap();
        assert_eq!(rebuilt, w);
        assert!(Beamformer::new(CMat::zeros(4, 2), 3, 1.0).is_err());
        let empty_sensing = Beamformer::new(CMat::zeros(4, 2), 2, 1.0).unwrap();
        assert_eq!(empty_sensing.sensing().ncols(), 0);
    }
}
