//! Dense complex linear algebra and quantum-state primitives.

pub mod io;
pub mod matrix;
pub mod measurement;
pub mod random;
pub mod state;

pub use matrix::{eigh, hs_distance, kron, CMatrix, CVector, Eigh, HermitianMatrix};
pub use measurement::{
    mub_bases, pauli_observable_basis, pauli_product_bases, qubit_observable_pvm, random_pvm, span_dimension,
    MeasurementKind, MeasurementSet,
};
pub use random::{ginibre, haar_unitary, RngSeed};
pub use state::{
    embed_with_maximally_mixed, fidelity, partial_trace_hermitian, QuantumState,
};
