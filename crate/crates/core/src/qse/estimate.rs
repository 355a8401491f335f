//! Iterated imposition of measured frequencies and the final projection
//! onto density matrices.

use serde::{Deserialize, Serialize};

use super::imposition::impose_measurement;
use crate::error::{Error, Result};
use crate::mathcore::{hs_distance, HermitianMatrix, MeasurementKind, MeasurementSet, QuantumState};

pub const DEFAULT_EPSILON: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Clone, Debug)]
pub struct EstimationProblem {
    measurements: Vec<MeasurementSet>,
    frequencies: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl EstimationProblem {
    pub fn new(measurements: Vec<MeasurementSet>, frequencies: Vec<Vec<f64>>) -> Result<Self> {
        if measurements.is_empty() {
            return Err(Error::InvalidInput("no measurements".into()));
        }
        if measurements.len() != frequencies.len() {
            return Err(Error::InvalidInput(format!(
                "{} measurements but {} frequency vectors",
                measurements.len(),
                frequencies.len()
            )));
        }
        let d = measurements[0].dim();
        for (i, (m, f)) in measurements.iter().zip(&frequencies).enumerate() {
            if m.dim() != d {
                return Err(Error::InvalidInput(format!("measurement {i} acts on dimension {}", m.dim())));
            }
            if f.len() != m.len() {
                return Err(Error::InvalidInput(format!(
                    "measurement {i} has {} effects but {} frequencies",
                    m.len(),
                    f.len()
                )));
            }
            if m.kind() == MeasurementKind::ObservableBasis {
                if f.iter().any(|v| !(-1.0..=1.0).contains(v)) {
                    return Err(Error::InvalidInput(format!("expectation values of measurement {i} outside [-1,1]")));
                }
            } else {
                if f.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                    return Err(Error::InvalidInput(format!("negative frequency in measurement {i}")));
                }
                let s: f64 = f.iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidInput(format!("frequencies of measurement {i} sum to {s}")));
                }
            }
        }
        Ok(Self {
            measurements,
            frequencies,
            epsilon: DEFAULT_EPSILON,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        })
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn dim(&self) -> usize {
        self.measurements[0].dim()
    }

    pub fn measurements(&self) -> &[MeasurementSet] {
        &self.measurements
    }

    pub fn frequencies(&self) -> &[Vec<f64>] {
        &self.frequencies
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateTrace {
    /// Distance between consecutive outer iterates.
    pub residuals: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Estimate {
    pub state: QuantumState,
    /// Last iterate before the projection onto density matrices.
    pub raw: HermitianMatrix,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub trace: EstimateTrace,
}

/// One outer iteration: every measurement imposed once, in order.
pub fn sweep(rho: &HermitianMatrix, problem: &EstimationProblem) -> Result<HermitianMatrix> {
    let mut out = rho.clone();
    for (m, f) in problem.measurements.iter().zip(&problem.frequencies) {
        out = impose_measurement(&out, m, f)?;
    }
    Ok(out)
}

/// Starts from I/d and sweeps until consecutive iterates are within
/// `epsilon` in Hilbert-Schmidt distance. Hitting `max_iterations` is not an
/// error: the last iterate is returned with `converged == false`.
pub fn estimate(problem: &EstimationProblem) -> Result<Estimate> {
    let d = problem.dim();
    let mut rho = HermitianMatrix::identity(d).scale(1.0 / d as f64);
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..problem.max_iterations {
        let next = sweep(&rho, problem)?;
        let r = hs_distance(&next, &rho)?;
        residuals.push(r);
        rho = next;
        if r <= problem.epsilon {
            converged = true;
            break;
        }
    }
    Ok(Estimate {
        state: nearest_density_matrix(&rho),
        raw: rho,
        iterations: residuals.len(),
        residual: residuals.last().copied().unwrap_or(f64::INFINITY),
        converged,
        trace: EstimateTrace { residuals },
    })
}

/// Closest density matrix in Hilbert-Schmidt distance:
/// `U diag((lambda - x0)^+) U^dagger` with x0 fixed by `sum (lambda_i - x0)^+ = 1`.
pub fn nearest_density_matrix(rho: &HermitianMatrix) -> QuantumState {
    let e = rho.eigh();
    let x0 = simplex_shift(&e.values);
    let shifted: Vec<f64> = e.values.iter().map(|&l| (l - x0).max(0.0)).collect();
    QuantumState::new_unchecked(HermitianMatrix::from_spectrum(&e.vectors, &shifted), vec![rho.dim()])
}

/// Root of `sum (lambda_i - x)^+ = 1`, located by bisection on
/// [min - 1, max] and then solved exactly on its active set.
pub fn simplex_shift(values: &[f64]) -> f64 {
    let excess = |x: f64| values.iter().map(|&l| (l - x).max(0.0)).sum::<f64>() - 1.0;
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (min - 1.0, max);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let active: Vec<f64> = values.iter().cloned().filter(|&l| l > lo).collect();
    let exact = (active.iter().sum::<f64>() - 1.0) / active.len() as f64;
    if excess(exact).abs() < excess(hi).abs() {
        exact
    } else {
        hi
    }
}
