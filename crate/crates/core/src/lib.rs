//! Side-by-side simulation of two-photon interference on beam splitters and
//! Mach-Zehnder interferometers.
//!
//! Three engines evaluate the same circuits:
//!
//! - [`wave`]: classical coherence optics on complex field amplitudes, with
//!   seeded Monte Carlo averaging over random inter-photon phases.
//! - [`fock`]: occupation-number states transformed by substituting mode
//!   creation operators.
//! - [`phase_basis`]: amplitude-level mixtures of the two phase-basis
//!   beam-splitter matrices, plus a classifier that checks which mixtures
//!   reproduce photon bunching and interferometer directionality.
//!
//! [`circuit`] holds a small text format for describing the circuits and
//! the glue that runs a parsed circuit on each engine.

pub mod circuit;
pub mod fock;
pub mod numerics;
pub mod phase_basis;
pub mod wave;

pub use numerics::{BasisSign, ComplexAmp, Convention, ElementMatrix, FieldVector, PortSlot};
