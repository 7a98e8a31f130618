//! Array geometry, UPA steering vectors, and random scene generation.
//!
//! All randomness in the crate flows through [`sample_scene`]. A scene is a
//! pure function of its seed: the generator is ChaCha20 keyed with
//! `seed_from_u64(seed)`, and draws happen in a fixed order (channel matrix in
//! column-major order, then per target azimuth, elevation, and the cross-section
//! variate). Sweeps derive the seed of trial `t` as `base_seed + t`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::linalg::{complex_gaussian_matrix, CMat, CVec, C64, J};

/// Uniform planar array with half-wavelength spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_horizontal: usize,
    pub n_vertical: usize,
}

impl ArrayGeometry {
    pub fn new(n_horizontal: usize, n_vertical: usize) -> Result<Self> {
        if n_horizontal == 0 || n_vertical == 0 {
            return Err(IsacError::InvalidInput(format!(
                "array geometry {n_horizontal}x{n_vertical} must have at least one element per axis"
            )));
        }
        Ok(Self {
            n_horizontal,
            n_vertical,
        })
    }

    /// Closest-to-square factorization `h × v` of `n` with `h ≥ v`.
    pub fn near_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(IsacError::InvalidInput("array must have at least one element".into()));
        }
        let mut v = (n as f64).sqrt().floor() as usize;
        while n % v != 0 {
            v -= 1;
        }
        Self::new(n / v, v)
    }

    pub fn len(&self) -> usize {
        self.n_horizontal * self.n_vertical
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn factors(&self, theta: f64, phi: f64) -> Result<(CVec, CVec)> {
        check_angles(theta, phi)?;
        let nh = self.n_horizontal;
        let nv = self.n_vertical;
        let h_phase = PI * theta.sin() * phi.sin();
        let v_phase = PI * phi.cos();
        let ah = CVec::from_fn(nh, |i, _| (J * (i as f64 * h_phase)).exp() / (nh as f64).sqrt());
        let av = CVec::from_fn(nv, |i, _| (J * (i as f64 * v_phase)).exp() / (nv as f64).sqrt());
        Ok((ah, av))
    }

    /// a(θ, φ) = a_h(θ, φ) ⊗ a_v(φ), unit norm.
    pub fn steering_vector(&self, theta: f64, phi: f64) -> Result<CVec> {
        let (ah, av) = self.factors(theta, phi)?;
        Ok(kron(&ah, &av))
    }

    /// Closed-form (∂a/∂θ, ∂a/∂φ).
    pub fn steering_derivatives(&self, theta: f64, phi: f64) -> Result<(CVec, CVec)> {
        let (ah, av) = self.factors(theta, phi)?;
        let nh_idx = |v: &CVec, scale: C64| CVec::from_fn(v.len(), |i, _| v[i] * scale * i as f64);
        let dah_dtheta = nh_idx(&ah, J * (PI * theta.cos() * phi.sin()));
        let dah_dphi = nh_idx(&ah, J * (PI * theta.sin() * phi.cos()));
        let dav_dphi = nh_idx(&av, -J * (PI * phi.sin()));
        let d_theta = kron(&dah_dtheta, &av);
        let d_phi = kron(&dah_dphi, &av) + kron(&ah, &dav_dphi);
        Ok((d_theta, d_phi))
    }
}

fn kron(a: &CVec, b: &CVec) -> CVec {
    CVec::from_fn(a.len() * b.len(), |i, _| a[i / b.len()] * b[i % b.len()])
}

fn check_angles(theta: f64, phi: f64) -> Result<()> {
    if !(-PI..=PI).contains(&theta) || theta.is_nan() {
        return Err(IsacError::AngleOutOfRange {
            name: "azimuth",
            value: theta,
            min: -PI,
            max: PI,
        });
    }
    if !(-FRAC_PI_2..=FRAC_PI_2).contains(&phi) || phi.is_nan() {
        return Err(IsacError::AngleOutOfRange {
            name: "elevation",
            value: phi,
            min: -FRAC_PI_2,
            max: FRAC_PI_2,
        });
    }
    Ok(())
}

/// Point target: azimuth θ, elevation φ, complex reflection coefficient α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub azimuth: f64,
    pub elevation: f64,
    pub rcs: C64,
}

impl Target {
    pub fn new(azimuth: f64, elevation: f64, rcs: C64) -> Result<Self> {
        check_angles(azimuth, elevation)?;
        if !(rcs.norm() > 0.0 && rcs.norm().is_finite()) {
            return Err(IsacError::InvalidInput(format!("radar cross-section {rcs} must be nonzero and finite")));
        }
        Ok(Self {
            azimuth,
            elevation,
            rcs,
        })
    }
}

/// One problem instance. Powers are linear (milliwatts).
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub tx: ArrayGeometry,
    pub rx: ArrayGeometry,
    /// N_t × K, column k is h_k.
    pub channels: CMat,
    pub targets: Vec<Target>,
    pub noise_comm: Vec<f64>,
    pub noise_radar: f64,
    pub slots: usize,
    pub power_budget: f64,
}

impl Scene {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        tx: ArrayGeometry,
        rx: ArrayGeometry,
        channels: CMat,
        targets: Vec<Target>,
        noise_comm: Vec<f64>,
        noise_radar: f64,
        slots: usize,
        power_budget: f64,
    ) -> Result<Self> {
        let scene = Self {
            tx,
            rx,
            channels,
            targets,
            noise_comm,
            noise_radar,
            slots,
            power_budget,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels.nrows() != self.tx.len() {
            return Err(IsacError::DimensionMismatch(format!(
                "channel matrix has {} rows but the transmit array has {} elements",
                self.channels.nrows(),
                self.tx.len()
            )));
        }
        if self.noise_comm.len() != self.channels.ncols() {
            return Err(IsacError::DimensionMismatch(format!(
                "{} user noise powers for {} users",
                self.noise_comm.len(),
                self.channels.ncols()
            )));
        }
        if self.channels.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(IsacError::InvalidInput("channel matrix has non-finite entries".into()));
        }
        if self.noise_comm.iter().any(|&s| !(s > 0.0 && s.is_finite())) || !(self.noise_radar > 0.0 && self.noise_radar.is_finite()) {
            return Err(IsacError::InvalidInput("noise powers must be positive and finite".into()));
        }
        if self.slots == 0 {
            return Err(IsacError::InvalidInput("number of slots must be at least 1".into()));
        }
        if !(self.power_budget > 0.0 && self.power_budget.is_finite()) {
            return Err(IsacError::InvalidInput("power budget must be positive".into()));
        }
        for t in &self.targets {
            Target::new(t.azimuth, t.elevation, t.rcs)?;
        }
        Ok(())
    }

    pub fn n_tx(&self) -> usize {
        self.tx.len()
    }

    pub fn n_rx(&self) -> usize {
        self.rx.len()
    }

    pub fn n_users(&self) -> usize {
        self.channels.ncols()
    }

    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn with_targets(mut self, targets: Vec<Target>) -> Result<Self> {
        self.targets = targets;
        self.validate()?;
        Ok(self)
    }
}

/// Transmit and receive steering matrices with their angle derivatives, one
/// column per target, and the cross-sections that make up U = diag(α).
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringSet {
    pub a: CMat,
    pub b: CMat,
    pub a_dtheta: CMat,
    pub a_dphi: CMat,
    pub b_dtheta: CMat,
    pub b_dphi: CMat,
    pub rcs: DVector<C64>,
}

impl SteeringSet {
    pub fn n_targets(&self) -> usize {
        self.rcs.len()
    }

    /// U as a dense diagonal matrix.
    pub fn u(&self) -> CMat {
        CMat::from_diagonal(&self.rcs)
    }
}

pub fn build_steering_set(scene: &Scene) -> Result<SteeringSet> {
    let m = scene.n_targets();
    let (nt, nr) = (scene.n_tx(), scene.n_rx());
    let mut set = SteeringSet {
        a: CMat::zeros(nt, m),
        b: CMat::zeros(nr, m),
        a_dtheta: CMat::zeros(nt, m),
        a_dphi: CMat::zeros(nt, m),
        b_dtheta: CMat::zeros(nr, m),
        b_dphi: CMat::zeros(nr, m),
        rcs: DVector::from_iterator(m, scene.targets.iter().map(|t| t.rcs)),
    };
    for (i, t) in scene.targets.iter().enumerate() {
        let (theta, phi) = (t.azimuth, t.elevation);
        set.a.set_column(i, &scene.tx.steering_vector(theta, phi)?);
        set.b.set_column(i, &scene.rx.steering_vector(theta, phi)?);
        let (dt, dp) = scene.tx.steering_derivatives(theta, phi)?;
        set.a_dtheta.set_column(i, &dt);
        set.a_dphi.set_column(i, &dp);
        let (dt, dp) = scene.rx.steering_derivatives(theta, phi)?;
        set.b_dtheta.set_column(i, &dt);
        set.b_dphi.set_column(i, &dp);
    }
    Ok(set)
}

/// How target elevations are drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElevationSampling {
    /// φ ~ U(−π/2, π/2), the declared elevation domain.
    #[default]
    Restricted,
    /// φ ~ U(−2π/3, 2π/3), clipped to [−π/2, π/2].
    Wide,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneDims {
    pub tx: ArrayGeometry,
    pub rx: ArrayGeometry,
    pub users: usize,
    pub targets: usize,
    pub slots: usize,
}

impl Default for SceneDims {
    fn default() -> Self {
        Self {
            tx: ArrayGeometry {
                n_horizontal: 4,
                n_vertical: 4,
            },
            rx: ArrayGeometry {
                n_horizontal: 5,
                n_vertical: 4,
            },
            users: 4,
            targets: 2,
            slots: 64,
        }
    }
}

/// Powers in dBm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSettings {
    pub power_dbm: f64,
    pub noise_radar_dbm: f64,
    pub noise_comm_dbm: f64,
}

impl Default for PowerSettings {
    fn default() -> Self {
        Self {
            power_dbm: 10.0,
            noise_radar_dbm: 0.0,
            noise_comm_dbm: 0.0,
        }
    }
}

/// dBm to milliwatts.
pub fn dbm_to_linear(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn sample_scene(seed: u64, dims: &SceneDims, powers: &PowerSettings) -> Result<Scene> {
    sample_scene_with(seed, dims, powers, ElevationSampling::default())
}

pub fn sample_scene_with(seed: u64, dims: &SceneDims, powers: &PowerSettings, elevation: ElevationSampling) -> Result<Scene> {
    let tx = ArrayGeometry::new(dims.tx.n_horizontal, dims.tx.n_vertical)?;
    let rx = ArrayGeometry::new(dims.rx.n_horizontal, dims.rx.n_vertical)?;
    if dims.slots == 0 {
        return Err(IsacError::InvalidInput("number of slots must be at least 1".into()));
    }
    for (name, v) in [
        ("power_dbm", powers.power_dbm),
        ("noise_radar_dbm", powers.noise_radar_dbm),
        ("noise_comm_dbm", powers.noise_comm_dbm),
    ] {
        if !v.is_finite() || v.abs() > 300.0 {
            return Err(IsacError::InvalidInput(format!("{name} = {v} is not a usable dBm value")));
        }
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let channels = complex_gaussian_matrix(tx.len(), dims.users, &mut rng);
    let wide = 2.0 * PI / 3.0;
    let targets = (0..dims.targets)
        .map(|_| {
            let theta = rng.random_range(-wide..wide);
            let phi = match elevation {
                ElevationSampling::Restricted => rng.random_range(-FRAC_PI_2..FRAC_PI_2),
                ElevationSampling::Wide => rng.random_range(-wide..wide).clamp(-FRAC_PI_2, FRAC_PI_2),
            };
            let nu: f64 = rng.random();
            let rcs = C64::from_polar(0.1 * (1.0 + 0.2 * nu), 2.0 * PI * nu);
            Target::new(theta, phi, rcs)
        })
        .collect::<Result<Vec<_>>>()?;

    Scene::new(
        tx,
        rx,
        channels,
        targets,
        vec![dbm_to_linear(powers.noise_comm_dbm); dims.users],
        dbm_to_linear(powers.noise_radar_dbm),
        dims.slots,
        dbm_to_linear(powers.power_dbm),
    )
}

/// Explicit target in a scene document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub azimuth: f64,
    pub elevation: f64,
    pub rcs_re: f64,
    pub rcs_im: f64,
}

/// Text form of a scene: dimensions, seed, dBm powers, and optional explicit
/// targets that replace the sampled ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSpec {
    pub seed: u64,
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
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub target: Vec<TargetSpec>,
}

impl Default for SceneSpec {
    fn default() -> Self {
        let d = SceneDims::default();
        let p = PowerSettings::default();
        Self {
            seed: 0,
            tx_horizontal: d.tx.n_horizontal,
            tx_vertical: d.tx.n_vertical,
            rx_horizontal: d.rx.n_horizontal,
            rx_vertical: d.rx.n_vertical,
            users: d.users,
            targets: d.targets,
            slots: d.slots,
            power_dbm: p.power_dbm,
            noise_radar_dbm: p.noise_radar_dbm,
            noise_comm_dbm: p.noise_comm_dbm,
            elevation_sampling: ElevationSampling::default(),
            target: Vec::new(),
        }
    }
}

impl SceneSpec {
    pub fn dims(&self) -> SceneDims {
        let targets = if self.target.is_empty() { self.targets } else { self.target.len() };
        SceneDims {
            tx: ArrayGeometry {
                n_horizontal: self.tx_horizontal,
                n_vertical: self.tx_vertical,
            },
            rx: ArrayGeometry {
                n_horizontal: self.rx_horizontal,
                n_vertical: self.rx_vertical,
            },
            users: self.users,
            targets,
            slots: self.slots,
        }
    }

    pub fn powers(&self) -> PowerSettings {
        PowerSettings {
            power_dbm: self.power_dbm,
            noise_radar_dbm: self.noise_radar_dbm,
            noise_comm_dbm: self.noise_comm_dbm,
        }
    }

    pub fn build(&self) -> Result<Scene> {
        let scene = sample_scene_with(self.seed, &self.dims(), &self.powers(), self.elevation_sampling)?;
        if self.target.is_empty() {
            return Ok(scene);
        }
        let targets = self
            .target
            .iter()
            .map(|t| Target::new(t.azimuth, t.elevation, C64::new(t.rcs_re, t.rcs_im)))
            .collect::<Result<Vec<_>>>()?;
        scene.with_targets(targets)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| IsacError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| IsacError::Config(e.to_string()))
    }
}
