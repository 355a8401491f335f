//! Quantum state estimation by iterated physical imposition operators.
//!
//! Each measured frequency is imposed on the current iterate by the affine
//! map `T(rho) = rho + (p - Tr(rho E)) E / Tr(E^2)`. Sweeping all
//! measurements until the iterate stops moving and then projecting onto the
//! density matrices gives the estimate.

pub mod estimate;
pub mod imposition;
pub mod simulate;

pub use estimate::{estimate, nearest_density_matrix, sweep, Estimate, EstimationProblem};
pub use imposition::{impose_measurement, impose_one, impose_pvm, impose_sequential, ImpositionTarget};
pub use simulate::{
    benchmark, bootstrap_fidelity, simulate_frequencies, EstimatorSettings, FidelityStats, GeneratorKind,
    NoiseModel, Sampling,
};
