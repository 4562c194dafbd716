//! Coherent backscattering of laser light from two driven four-level atoms.
//!
//! The two atoms each have a J = 0 ground state and a J = 1 excited manifold.
//! They exchange photons through the far-field dipole-dipole coupling
//! `g = (3i/2k₀r) e^{ik₀r}`. Steady states of the two-atom master equation are
//! expanded to second order in `g`. From them come the ladder and crossed
//! intensities that make up the backscattering cone, in four polarization
//! channels and a scalar two-level model. Configuration averages over the
//! pair orientation and separation give the enhancement factor as a function
//! of saturation and detuning.
//!
//! Units: γ = 1 for rates and k₀ = 1 for inverse lengths.

pub mod analytic;
pub mod average;
pub mod channels;
pub mod fit;
pub mod geometry;
pub mod liouvillian;
pub mod operators;
pub mod response;
pub mod solver;
pub mod sweep;
pub mod verify;

pub use geometry::{ComplexVec3, PairGeometry, C64};
