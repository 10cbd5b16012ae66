//! Reconstruction of compactly supported vector fields in ℝ³ from restricted
//! ray data: the Doppler (longitudinal) transform and the first integral
//! moment transform, known along every line through a fixed curve.
//!
//! The pipeline runs in two stages:
//!
//! 1. [`sv_recover`] turns restricted Doppler data into plane-wise
//!    derivatives of Radon transforms, backprojects them to the
//!    Saint-Venant field `Wf`, and [`decompose`] integrates `Wf` to the
//!    whole-space solenoidal part.
//! 2. [`potential`] integrates the solenoidal part along exterior rays to
//!    get boundary data, solves the harmonic bridge on the box, extracts the
//!    scalar ray transform of the bounded-domain potential from the moment
//!    data, and inverts it.
//!
//! [`oracles`] holds brute-force references used only for validation; no
//! pipeline module depends on it.

pub mod container;
pub mod decompose;
pub mod error;
pub mod field;
pub mod forward;
pub mod geometry;
pub mod harness;
pub mod oracles;
pub mod potential;
pub mod radon;
pub mod sv_recover;

pub use error::{Error, Result};

/// Points and vectors in ℝ³.
pub type Vec3 = nalgebra::Vector3<f64>;
