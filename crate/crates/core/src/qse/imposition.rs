//! Physical imposition operators.
//!
//! `T(rho) = rho + (p - Tr(rho E)) E / Tr(E^2)` is the orthogonal projection,
//! in the Hilbert-Schmidt geometry, onto the hyperplane `Tr(rho E) = p`.

use crate::error::{Error, Result};
use crate::mathcore::{HermitianMatrix, MeasurementKind, MeasurementSet};

#[derive(Clone, Debug)]
pub struct ImpositionTarget {
    effect: HermitianMatrix,
    probability: f64,
    norm_sq: f64,
}

impl ImpositionTarget {
    /// Effect with a probability in [0, 1].
    pub fn new(effect: HermitianMatrix, probability: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&probability) {
            return Err(Error::InvalidInput(format!("probability {probability} outside [0,1]")));
        }
        Self::build(effect, probability)
    }

    /// Observable with an expectation value in [-1, 1].
    pub fn expectation(observable: HermitianMatrix, value: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&value) {
            return Err(Error::InvalidInput(format!("expectation {value} outside [-1,1]")));
        }
        Self::build(observable, value)
    }

    fn build(effect: HermitianMatrix, probability: f64) -> Result<Self> {
        let norm_sq = effect.hs_inner(&effect);
        if norm_sq <= 0.0 {
            return Err(Error::DegenerateEffect);
        }
        Ok(Self {
            effect,
            probability,
            norm_sq,
        })
    }

    pub fn effect(&self) -> &HermitianMatrix {
        &self.effect
    }

    pub fn probability(&self) -> f64 {
        self.probability
    }
}

fn check_dim(rho: &HermitianMatrix, d: usize) -> Result<()> {
    if rho.dim() != d {
        return Err(Error::InvalidInput(format!(
            "state dimension {} does not match effect dimension {d}",
            rho.dim()
        )));
    }
    Ok(())
}

pub fn impose_one(rho: &HermitianMatrix, t: &ImpositionTarget) -> Result<HermitianMatrix> {
    check_dim(rho, t.effect.dim())?;
    let mut out = rho.clone();
    let shift = (t.probability - rho.hs_inner(&t.effect)) / t.norm_sq;
    out.axpy(shift, &t.effect);
    Ok(out)
}

fn check_values(set: &MeasurementSet, values: &[f64]) -> Result<()> {
    if values.len() != set.len() {
        return Err(Error::InvalidInput(format!(
            "{} values for a measurement with {} effects",
            values.len(),
            set.len()
        )));
    }
    Ok(())
}

/// Imposes every outcome probability of a PVM at once.
///
/// Orthogonal effects give commuting impositions, so the sum form equals the
/// sequential composition.
pub fn impose_pvm(rho: &HermitianMatrix, set: &MeasurementSet, probs: &[f64]) -> Result<HermitianMatrix> {
    if set.kind() != MeasurementKind::Pvm {
        return Err(Error::InvalidMeasurementKind(format!("{:?} given where a PVM is required", set.kind())));
    }
    impose_orthogonal(rho, set, probs)
}

fn impose_orthogonal(rho: &HermitianMatrix, set: &MeasurementSet, values: &[f64]) -> Result<HermitianMatrix> {
    check_values(set, values)?;
    check_dim(rho, set.dim())?;
    let mut out = rho.clone();
    for (e, &p) in set.effects().iter().zip(values) {
        let norm_sq = e.hs_inner(e);
        if norm_sq <= 0.0 {
            return Err(Error::DegenerateEffect);
        }
        out.axpy((p - rho.hs_inner(e)) / norm_sq, e);
    }
    Ok(out)
}

/// Imposes each effect in turn.
pub fn impose_sequential(rho: &HermitianMatrix, set: &MeasurementSet, values: &[f64]) -> Result<HermitianMatrix> {
    check_values(set, values)?;
    check_dim(rho, set.dim())?;
    let mut out = rho.clone();
    for (e, &p) in set.effects().iter().zip(values) {
        let norm_sq = e.hs_inner(e);
        if norm_sq <= 0.0 {
            return Err(Error::DegenerateEffect);
        }
        let shift = (p - out.hs_inner(e)) / norm_sq;
        out.axpy(shift, e);
    }
    Ok(out)
}

/// One measurement's imposition: sum form for PVMs and observable bases,
/// sequential for general POVMs.
pub fn impose_measurement(rho: &HermitianMatrix, set: &MeasurementSet, values: &[f64]) -> Result<HermitianMatrix> {
    match set.kind() {
        MeasurementKind::Pvm | MeasurementKind::ObservableBasis => impose_orthogonal(rho, set, values),
        MeasurementKind::Povm => impose_sequential(rho, set, values),
    }
}
