//! Non-Markovian qubit dynamics: quantum Fisher information flow and
//! energy current for the damped Jaynes-Cummings and spin-boson models.
//!
//! Every numerical routine is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bloch;
pub mod dynamics;
pub mod error;
pub mod jc;
pub mod qfi;
pub mod quad;
pub mod sbm;
pub mod scalar;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type BlochState = bloch::BlochState<f64>;
pub type SpectralDensity = spectral::SpectralDensity<f64>;
pub type BathKernels = spectral::BathKernels<f64>;
pub type JcParams = jc::JcParams<f64>;
pub type JcState = jc::JcState<f64>;
pub type SbmParams = sbm::SbmParams<f64>;
pub type SbmRates = sbm::SbmRates<f64>;
pub type SbmIntegrals = sbm::SbmIntegrals<f64>;
pub type SbmSolution = sbm::SbmSolution<f64>;
pub type Direction = qfi::Direction<f64>;
pub type BlochDecomposition = qfi::BlochDecomposition<f64>;
pub type IntegratorConfig = dynamics::IntegratorConfig<f64>;
pub type Trajectory = analysis::Trajectory<f64>;
pub type IntervalReport = analysis::IntervalReport<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type BlochState = crate::bloch::BlochState<f32>;
    pub type SpectralDensity = crate::spectral::SpectralDensity<f32>;
    pub type JcParams = crate::jc::JcParams<f32>;
    pub type SbmParams = crate::sbm::SbmParams<f32>;
    pub type Trajectory = crate::analysis::Trajectory<f32>;
}
