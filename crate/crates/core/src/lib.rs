//! Imposition operators on density matrices.
//!
//! Three applications share one numerical core:
//!
//! * [`qse`]: quantum state estimation from measured frequencies by
//!   alternating affine impositions followed by a projection onto the
//!   set of density matrices.
//! * [`bell`]: local bounds, quantum values with propagated errors, search
//!   for the Bell inequality that best separates data from the local
//!   polytope, and detection-efficiency thresholds.
//! * [`qmp`]: the quantum marginal problem, solved by alternating marginal
//!   impositions with a spectral projection.

pub mod bell;
pub mod error;
pub mod mathcore;
pub mod qmp;
pub mod qse;

pub use error::{Error, Result};
pub use mathcore::{HermitianMatrix, MeasurementKind, MeasurementSet, QuantumState, RngSeed};
