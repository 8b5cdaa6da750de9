//! Statevector simulator: gates, circuits, sampling and noise.

pub mod bits;
pub mod circuit;
pub mod gate;
pub mod sampling;
pub mod state;

pub use bits::{format_bitstring, parse_bitstring};
pub use circuit::{circuit_unitary, run_statevector, Circuit, MAX_UNITARY_QUBITS};
pub use gate::{GateKind, GateOp};
pub use sampling::{derive_seed, run_noisy, sample_counts, Counts, NoiseModel};
pub use state::{apply_gate, init_basis_state, probability_of, StateVector, MAX_QUBITS};
