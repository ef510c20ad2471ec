//! Physics core for double-slit interferometry with levitated nanospheres:
//! Gaussian-state dynamics, position-localization decoherence from standard and
//! collapse-model sources, protocol feasibility, grid interference simulation
//! and cavity-optomechanical bounds.

pub mod collapse;
pub mod constants;
pub mod error;
pub mod gaussian;
pub mod interference;
pub mod localization;
pub mod optomech;
pub mod params;
pub mod protocol;
pub mod quadrature;
pub mod special;
pub mod standard;

pub use error::{Error, Result};
