//! Single-excitation dynamics of a Λ-type giant atom that touches a
//! waveguide at two points and is dressed by a single-mode cavity.
//!
//! The photon-number subspaces `{|e,n⟩, |s,n+1⟩}` decouple, and inside each
//! one the atom obeys a delay equation whose delay is the travel time
//! between the coupling points. [`dde`] integrates it and [`spectral`]
//! finds its non-decaying poles (bound states in the continuum).
//!
//! [`field`] reconstructs the emitted light from a trajectory. [`oracle`]
//! solves the same problem on a directly discretized waveguide, as an
//! independent check.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dde;
pub mod error;
pub mod field;
pub mod io;
pub mod oracle;
pub mod params;
pub mod scenario;
pub mod spectral;

pub use dde::{integrate, population, InitialCondition, IntegratorConfig, Trajectory};
pub use error::{Error, Result};
pub use params::{derive_rates, subspace_params, DerivedRates, SubspaceParams, SystemParams};
pub use spectral::{find_bics, BicSolution, Branch};
