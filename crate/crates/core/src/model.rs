//! The signal model shared by the metrics and both solvers.
//!
//! [`IsacModel`] holds the transmit-side matrices (H, A, Ȧ_θ, Ȧ_φ) together
//! with the receive-side Gram products that never change during a solve. The
//! full-dimension solver uses the model as built from a scene; the
//! low-dimensional solver uses [`IsacModel::transformed`], which replaces every
//! transmit-side matrix X by Nᴴ X. All formulas below are written once and run
//! unchanged on either form.
//!
//! # Fisher information layout
//!
//! The noise-free echo is v = B U Aᴴ x. Its derivative with respect to each of
//! the 4M real parameters (θ, φ, Re α, Im α; one block of M per kind) is a sum
//! of rank-one *terms* `c · g rᴴ x` with a receive vector g, a transmit vector
//! r and a scalar coefficient c:
//!
//! | parameter | terms                         |
//! |-----------|-------------------------------|
//! | θ_m       | α_m ḃ_θm a_mᴴ, α_m b_m ȧ_θmᴴ   |
//! | φ_m       | α_m ḃ_φm a_mᴴ, α_m b_m ȧ_φmᴴ   |
//! | Re α_m    | b_m a_mᴴ                       |
//! | Im α_m    | j b_m a_mᴴ                     |
//!
//! With E[x xᴴ] = R_x every FIM entry is a sum over term pairs
//! `Re{ c̄_p c_q (g_pᴴ g_q)(r_qᴴ R_x r_p) }` scaled by 2L/σ_s². The matrix Q used
//! by the sensing surrogate is the adjoint of that map, so
//! tr(Φ F(W)) = Re tr(R_x Q(Φ)) holds term by term.

use crate::linalg::{CMat, RMat, C64, J};
use crate::scene::{Scene, SteeringSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Steer = 0,
    DTheta = 1,
    DPhi = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Coef {
    Rcs,
    One,
    Imag,
}

#[derive(Debug, Clone, Copy)]
struct Term {
    /// 0 = θ, 1 = φ, 2 = Re α, 3 = Im α
    kind: usize,
    rx: Family,
    tx: Family,
    coef: Coef,
}

const TERMS: [Term; 6] = [
    Term { kind: 0, rx: Family::DTheta, tx: Family::Steer, coef: Coef::Rcs },
    Term { kind: 0, rx: Family::Steer, tx: Family::DTheta, coef: Coef::Rcs },
    Term { kind: 1, rx: Family::DPhi, tx: Family::Steer, coef: Coef::Rcs },
    Term { kind: 1, rx: Family::Steer, tx: Family::DPhi, coef: Coef::Rcs },
    Term { kind: 2, rx: Family::Steer, tx: Family::Steer, coef: Coef::One },
    Term { kind: 3, rx: Family::Steer, tx: Family::Steer, coef: Coef::Imag },
];

/// Test hook that corrupts the Q assembly by flipping the sign of every
/// contribution coupling two parameter kinds. Only used to check that the
/// verification suite notices a broken block.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QFault {
    pub kind_a: usize,
    pub kind_b: usize,
}

#[derive(Debug, Clone)]
pub struct IsacModel {
    /// n × K
    pub(crate) channels: CMat,
    /// A, Ȧ_θ, Ȧ_φ, each n × M
    pub(crate) tx: [CMat; 3],
    /// rx_gram[i][j] = R_iᴴ R_j for R ∈ {B, Ḃ_θ, Ḃ_φ}
    rx_gram: [[CMat; 3]; 3],
    rcs: Vec<C64>,
    pub(crate) noise_comm: Vec<f64>,
    noise_radar: f64,
    slots: usize,
}

impl IsacModel {
    pub fn new(scene: &Scene, steering: &SteeringSet) -> Self {
        let rx = [&steering.b, &steering.b_dtheta, &steering.b_dphi];
        let rx_gram = std::array::from_fn(|i| std::array::from_fn(|j| rx[i].adjoint() * rx[j]));
        Self {
            channels: scene.channels.clone(),
            tx: [steering.a.clone(), steering.a_dtheta.clone(), steering.a_dphi.clone()],
            rx_gram,
            rcs: steering.rcs.iter().copied().collect(),
            noise_comm: scene.noise_comm.clone(),
            noise_radar: scene.noise_radar,
            slots: scene.slots,
        }
    }

    /// Same model with every transmit-side matrix X replaced by basisᴴ X.
    pub fn transformed(&self, basis: &CMat) -> Self {
        let bh = basis.adjoint();
        Self {
            channels: &bh * &self.channels,
            tx: std::array::from_fn(|i| &bh * &self.tx[i]),
            rx_gram: self.rx_gram.clone(),
            rcs: self.rcs.clone(),
            noise_comm: self.noise_comm.clone(),
            noise_radar: self.noise_radar,
            slots: self.slots,
        }
    }

    /// Length of the beamformer columns this model acts on.
    pub fn dim(&self) -> usize {
        self.channels.nrows()
    }

    pub fn n_users(&self) -> usize {
        self.channels.ncols()
    }

    pub fn n_targets(&self) -> usize {
        self.rcs.len()
    }

    pub fn channels(&self) -> &CMat {
        &self.channels
    }

    pub fn steering(&self) -> &CMat {
        &self.tx[0]
    }

    pub fn steering_dtheta(&self) -> &CMat {
        &self.tx[1]
    }

    pub fn steering_dphi(&self) -> &CMat {
        &self.tx[2]
    }

    pub fn fim_prefactor(&self) -> f64 {
        2.0 * self.slots as f64 / self.noise_radar
    }

    fn coef(&self, c: Coef, m: usize) -> C64 {
        match c {
            Coef::Rcs => self.rcs[m],
            Coef::One => C64::new(1.0, 0.0),
            Coef::Imag => J,
        }
    }

    /// Hᴴ W: entry (k, j) is h_kᴴ w_j.
    pub(crate) fn channel_gains(&self, w: &CMat) -> CMat {
        self.channels.adjoint() * w
    }

    /// Per user (desired power S_k, interference-plus-noise power I_k).
    pub(crate) fn user_powers(&self, w: &CMat) -> Vec<(f64, f64)> {
        let g = self.channel_gains(w);
        (0..self.n_users())
            .map(|k| {
                let desired = g[(k, k)].norm_sqr();
                let interference: f64 = (0..g.ncols()).filter(|&j| j != k).map(|j| g[(k, j)].norm_sqr()).sum();
                (desired, interference + self.noise_comm[k])
            })
            .collect()
    }

    pub fn user_rate(&self, w: &CMat, k: usize) -> f64 {
        let g = self.channels.column(k).adjoint() * w;
        let desired = g[(0, k)].norm_sqr();
        let interference: f64 = (0..g.ncols()).filter(|&j| j != k).map(|j| g[(0, j)].norm_sqr()).sum();
        (desired / (interference + self.noise_comm[k])).ln_1p()
    }

    pub fn sum_rate(&self, w: &CMat) -> f64 {
        self.user_powers(w).iter().map(|&(s, i)| (s / i).ln_1p()).sum()
    }

    /// 4M × 4M Fisher information of (θ, φ, Re α, Im α) for beamformer `w`.
    pub fn fim(&self, w: &CMat) -> RMat {
        let m = self.n_targets();
        // y[t] = T_tᴴ W, so T_qᴴ R_x T_p = y[q] y[p]ᴴ
        let y: [CMat; 3] = std::array::from_fn(|t| self.tx[t].adjoint() * w);
        let mut tx_cov: [[Option<CMat>; 3]; 3] = Default::default();
        let mut f = RMat::zeros(4 * m, 4 * m);
        let scale = self.fim_prefactor();
        for p in &TERMS {
            for q in &TERMS {
                let (tp, tq) = (p.tx as usize, q.tx as usize);
                let cov = tx_cov[tq][tp].get_or_insert_with(|| &y[tq] * y[tp].adjoint());
                let gram = &self.rx_gram[p.rx as usize][q.rx as usize];
                for a in 0..m {
                    let ca = self.coef(p.coef, a).conj();
                    for b in 0..m {
                        let z = ca * self.coef(q.coef, b) * gram[(a, b)] * cov[(b, a)];
                        f[(p.kind * m + a, q.kind * m + b)] += scale * z.re;
                    }
                }
            }
        }
        f
    }

    /// Q(Φ) with Re tr(R_x Q(Φ)) = tr(Φ F(W)) for every W. Hermitian.
    pub fn sensing_q(&self, phi: &RMat) -> CMat {
        self.sensing_q_with_fault(phi, None)
    }

    #[doc(hidden)]
    pub fn sensing_q_with_fault(&self, phi: &RMat, fault: Option<QFault>) -> CMat {
        let m = self.n_targets();
        let n = self.dim();
        let mut d: [[CMat; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| CMat::zeros(m, m)));
        for p in &TERMS {
            for q in &TERMS {
                let flip = fault.is_some_and(|f| {
                    (p.kind, q.kind) == (f.kind_a, f.kind_b) || (p.kind, q.kind) == (f.kind_b, f.kind_a)
                });
                let sign = if flip { -1.0 } else { 1.0 };
                let gram = &self.rx_gram[p.rx as usize][q.rx as usize];
                let block = &mut d[p.tx as usize][q.tx as usize];
                for a in 0..m {
                    let ca = self.coef(p.coef, a).conj();
                    for b in 0..m {
                        let weight = phi[(p.kind * m + a, q.kind * m + b)] * sign;
                        block[(a, b)] += ca * self.coef(q.coef, b) * gram[(a, b)] * weight;
                    }
                }
            }
        }
        let mut q = CMat::zeros(n, n);
        for (tp, row) in d.iter().enumerate() {
            for (tq, block) in row.iter().enumerate() {
                q += &self.tx[tp] * block * self.tx[tq].adjoint();
            }
        }
        q.scale(self.fim_prefactor())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{build_steering_set, sample_scene, PowerSettings, SceneDims};

    #[test]
    fn fim_matches_block_formulas_for_theta_theta() {
        // F_θθ = (2L/σ²) Re{(U Aᴴ R A Uᴴ)ᵀ ⊙ (Ḃ_θᴴ Ḃ_θ) + (U Aᴴ R Ȧ_θ Uᴴ)ᵀ ⊙ (Bᴴ Ḃ_θ)
        //                  + (U Ȧ_θᴴ R A Uᴴ)ᵀ ⊙ (Ḃ_θᴴ B) + (U Ȧ_θᴴ R Ȧ_θ Uᴴ)ᵀ ⊙ (Bᴴ B)}
        let dims = SceneDims { targets: 3, ..SceneDims::default() };
        let scene = sample_scene(5, &dims, &PowerSettings::default()).unwrap();
        let st = build_steering_set(&scene).unwrap();
        let model = IsacModel::new(&scene, &st);
        let mut rng = <rand_chacha::ChaCha20Rng as rand::SeedableRng>::seed_from_u64(1);
        let w = crate::linalg::complex_gaussian_matrix(16, 6, &mut rng);
        let r = &w * w.adjoint();
        let u = st.u();
        let had = |x: CMat, y: CMat| x.transpose().component_mul(&y);
        let f11 = had(&u * st.a.adjoint() * &r * &st.a * u.adjoint(), st.b_dtheta.adjoint() * &st.b_dtheta)
            + had(&u * st.a.adjoint() * &r * &st.a_dtheta * u.adjoint(), st.b.adjoint() * &st.b_dtheta)
            + had(&u * st.a_dtheta.adjoint() * &r * &st.a * u.adjoint(), st.b_dtheta.adjoint() * &st.b)
            + had(&u * st.a_dtheta.adjoint() * &r * &st.a_dtheta * u.adjoint(), st.b.adjoint() * &st.b);
        // F₃₃ = (Aᴴ R A)ᵀ ⊙ (Bᴴ B) feeds the α blocks with the Re / −Im pattern
        let f33 = had(st.a.adjoint() * &r * &st.a, st.b.adjoint() * &st.b);
        let f = model.fim(&w);
        let c = model.fim_prefactor();
        for i in 0..3 {
            for j in 0..3 {
                assert!((f[(i, j)] - c * f11[(i, j)].re).abs() < 1e-9 * f.norm());
                assert!((f[(6 + i, 6 + j)] - c * f33[(i, j)].re).abs() < 1e-9 * f.norm());
                assert!((f[(6 + i, 9 + j)] + c * f33[(i, j)].im).abs() < 1e-9 * f.norm());
                assert!((f[(9 + i, 9 + j)] - c * f33[(i, j)].re).abs() < 1e-9 * f.norm());
            }
        }
    }

    #[test]
    fn q_is_hermitian() {
        let scene = sample_scene(2, &SceneDims::default(), &PowerSettings::default()).unwrap();
        let st = build_steering_set(&scene).unwrap();
        let model = IsacModel::new(&scene, &st);
        let phi = RMat::from_fn(8, 8, |i, j| ((i * 7 + j * 3) % 5) as f64 + ((j * 7 + i * 3) % 5) as f64);
        let q = model.sensing_q(&phi);
        assert!((&q - q.adjoint()).norm() < 1e-10 * q.norm());
    }
}
