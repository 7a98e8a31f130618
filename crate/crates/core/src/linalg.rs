//! Small dense complex linear-algebra helpers shared by the solvers.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;

pub const J: C64 = Complex::new(0.0, 1.0);

/// Squared Frobenius norm.
pub fn frob_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn frob(m: &CMat) -> f64 {
    frob_sq(m).sqrt()
}

/// (X + Xᴴ) / 2
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn symmetric_part(m: &RMat) -> RMat {
    (m + m.transpose()).scale(0.5)
}

/// Re tr(Xᴴ Y), the real inner product on complex matrices.
pub fn real_inner(x: &CMat, y: &CMat) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

pub fn complex_gaussian_matrix(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * s, im * s)
    })
}

pub fn real_matrix(m: &CMat) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PowerIterationSettings {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for PowerIterationSettings {
    fn default() -> Self {
        Self {
            max_iters: 200,
            rel_tol: 1e-8,
            seed: 0x15ac,
        }
    }
}

/// Largest eigenvalue magnitude of a Hermitian operator given as a mat-vec.
///
/// Uses ‖A v‖ on the normalized iterate as the estimate; for Hermitian A this
/// increases monotonically towards the spectral radius, including the case of
/// two dominant eigenvalues of opposite sign.
pub fn dominant_eigenvalue_magnitude<F>(dim: usize, settings: &PowerIterationSettings, apply: F) -> f64
where
    F: Fn(&CVec) -> CVec,
{
    if dim == 0 {
        return 0.0;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(settings.seed);
    let mut v = CVec::from_iterator(dim, complex_gaussian_matrix(dim, 1, &mut rng).iter().copied());
    let n0 = v.norm();
    v.unscale_mut(n0);
    let mut estimate = 0.0;
    for _ in 0..settings.max_iters.max(1) {
        let av = apply(&v);
        let norm = av.norm();
        if norm == 0.0 || !norm.is_finite() {
            return if norm.is_finite() { 0.0 } else { f64::INFINITY };
        }
        let change = (norm - estimate).abs();
        estimate = norm;
        v = av.unscale(norm);
        if change <= settings.rel_tol * estimate {
            break;
        }
    }
    estimate
}

pub fn dominant_eigenvalue_magnitude_dense(m: &CMat, settings: &PowerIterationSettings) -> f64 {
    dominant_eigenvalue_magnitude(m.nrows(), settings, |v| m * v)
}

/// Inverse of a symmetric positive-definite matrix through Cholesky.
pub fn spd_inverse(m: &RMat) -> Option<RMat> {
    Cholesky::new(m.clone()).map(|c| c.inverse())
}

/// Real-valued block view of a Hermitian matrix, used for dense Hermitian
/// eigen-solves: [[Re, -Im], [Im, Re]] has every eigenvalue of `m` twice.
pub fn realify_hermitian(m: &CMat) -> RMat {
    let n = m.nrows();
    RMat::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}
