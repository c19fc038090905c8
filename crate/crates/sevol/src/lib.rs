//! Toolkit for affine toric Gorenstein cones: exact polyhedral and lattice
//! algebra, Reeb-polytope volume minimization, holomorphic spectral sums, and
//! obstruction screening for candidate Einstein geometries.
//!
//! The moment cone `C*` is handled in exact integer/rational arithmetic; the
//! volume of the capped polytope `Δ(ξ)` and its derivatives are closed-form
//! rational functions of the Reeb vector `ξ`, evaluated generically over any
//! [`scalar::Scalar`] (f64 for optimization, `Rat` for certificates).

pub mod cone;
pub mod error;
pub mod families;
pub mod hypersurface;
pub mod intlin;
pub mod potential;
pub mod reeb;
pub mod scalar;
pub mod volume;
pub mod zeta;

pub use error::{Error, Result};

/// Arbitrary-precision integer used throughout the lattice layer.
pub type Int = num_bigint::BigInt;
/// Arbitrary-precision rational; the exact scalar type.
pub type Rat = num_rational::BigRational;

pub use cone::{parse_cone, ChargeMatrix, MomentCone};

pub use volume::{decompose, ReebVector, SimplicialDecomposition, VolumeReport};
