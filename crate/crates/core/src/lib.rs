//! Quantum harmonic Otto engine.
//!
//! A harmonic working medium alternates between two heat baths at fixed
//! frequencies (isochores) and frequency ramps without bath contact
//! (adiabats). Centered Gaussian states are carried exactly by the three
//! expectations of the Hamiltonian, the Lagrangian and the
//! position-momentum correlation, so each branch acts as an affine map on a
//! 3-vector and the limit cycle is the fixed point of their composition.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod cli;
pub mod cycle;
pub mod error;
pub mod fock_oracle;
pub mod ode;
pub mod propagators;
pub mod state;

pub use error::{OttoError, Result};
