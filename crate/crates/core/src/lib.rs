//! Statevector simulation of collective neutrino oscillations.
//!
//! - [`linalg`]: dense complex matrices, Hermitian eigensolver, exponentials.
//! - [`qsim`]: gates, circuits, statevector execution, sampling and noise.
//! - [`decomp`]: gate compilation of the two-qubit and field propagators.
//! - [`neutrino`]: Hamiltonians, exact evolution and exact observables.
//! - [`circuits`]: evolution, vacuum and SWAP-test concurrence circuits.
//! - [`experiment`]: configured time sweeps producing CSV reports.

pub mod circuits;
pub mod decomp;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod neutrino;
pub mod qsim;

pub use error::{Error, Result};
