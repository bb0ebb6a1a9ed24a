//! Relativistic quantum mechanics of a Dirac fermion on a line, perturbed by
//! one or two point interactions of the form `(q + λβ) δ(z - z₀)`.
//!
//! The crate covers:
//!
//! - the fixed Clifford representation and free plane-wave spinors ([`spinor`]),
//! - matching matrices for a single delta and transfer matrices between
//!   delta points ([`matching`]),
//! - closed-form and transfer-matrix scattering amplitudes ([`scattering`]),
//! - bound states, count maps over coupling planes and boundary curves
//!   ([`spectrum`]),
//! - vacuum interaction energies between opaque plates ([`casimir`]).
//!
//! Units are natural (`ħ = c = 1`); couplings are dimensionless.

#![warn(clippy::all)]
#![allow(clippy::too_many_arguments)]
// `!(x <= tol)` deliberately rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod casimir;
pub mod error;
pub mod matching;
pub mod quadrature;
pub mod roots;
pub mod scattering;
pub mod spectrum;
pub mod spinor;

pub use error::{Error, Result};
pub use matching::{Coupling, DeltaConfig, MatchMatrix, PlacedDelta};
pub use num_complex::Complex64;
pub use spinor::{Momentum, ParticleKind, Spinor};
