//! Beamforming design for monostatic integrated sensing and communication
//! (ISAC) systems: maximize δ_c · sum rate − δ_s · tr(CRLB) under a transmit
//! power budget.
//!
//! * [`scene`]: array geometry, steering vectors, seeded scene sampling
//! * [`metrics`]: sum rate, Fisher information, CRLB trace, objective
//! * [`sca`]: full-dimension SCA solver
//! * [`lowdim`]: the same iteration on the (K+3M)-dimensional structured basis
//! * [`analysis`]: stationarity and structure checks, finite-difference oracles
//! * [`experiment`]: sweeps, CSV/JSON output, the verification suite

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod lowdim;
pub mod metrics;
pub mod model;
pub mod scene;
pub mod sca;

pub use error::{IsacError, Result};
