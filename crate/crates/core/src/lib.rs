//! Quantum and classical precision limits for two partially coherent point sources.
//!
//! The crate computes the quantum Fisher information matrix of the single-boson state
//! of two Gaussian point sources over (separation, relative intensity, coherence),
//! the van Trees information that adds the photon-arrival prior, and the Fisher
//! information of concrete binary mode-sorting measurements. An independent brute-force
//! oracle in a truncated Hermite–Gauss basis cross-checks every closed form.

pub mod bounds;
pub mod error;
pub mod measurement;
pub mod model;
pub mod oracle;
pub mod pauli;
pub mod sld;

pub use error::{Error, Result};
pub use model::{Basis, BlochState, Frame, OpticalConfig, Param, ParamPoint};
pub use sld::{BlochOperator, ExtendedBasisData, ExtendedOperator};

/// Complex scalar used by every operator.
pub type Complex = nalgebra::Complex<f64>;
