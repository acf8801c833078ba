#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Steady states and momentum diffusion of a laser-driven atom coupled to a
//! driven cavity mode, with the atom treated as a harmonic oscillator.
//!
//! Every numerical routine is generic over the scalar type ([`Real`]); the
//! aliases below fix it to `f64` (and `f32` where single precision is useful).

pub mod analysis;
pub mod cli;
pub mod diffusion;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod steady_state;
pub mod vec3;

pub use error::{ConfigIssue, Error, Result};
pub use scalar::{Cplx, Real};

pub type SystemParams = model::SystemParams<f64>;
pub type FieldProfile = model::FieldProfile<f64>;
pub type SceneConfig = model::SceneConfig<f64>;
pub type LocalFields = model::LocalFields<f64>;
pub type SteadyState = steady_state::SteadyState<f64>;
pub type OscillatorMatrix = steady_state::OscillatorMatrix<f64>;
pub type DiffusionResult = diffusion::DiffusionResult<f64>;
pub type MeanForce = diffusion::MeanForce<f64>;
pub type DensityMatrix = oracle::DensityMatrix<f64>;
pub type OracleDiffusion = oracle::OracleDiffusion<f64>;
pub type SweepSpec = analysis::SweepSpec<f64>;
pub type SweepRow = analysis::SweepRow<f64>;
pub type Vec3 = vec3::Vec3<f64>;

pub type SceneConfig32 = model::SceneConfig<f32>;
pub type SystemParams32 = model::SystemParams<f32>;
pub type SteadyState32 = steady_state::SteadyState<f32>;
pub type DiffusionResult32 = diffusion::DiffusionResult<f32>;
