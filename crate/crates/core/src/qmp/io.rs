//! Marginal-problem spec files:
//! `{"N": 4, "d": 3, "targets": [{"subset": [0, 1], "state": ...}], "constraint": {"rank": 1}}`.
//!
//! A target state is either an inline matrix object or a path to a matrix
//! file, resolved against the spec file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::marginal::MarginalSpec;
use super::solve::SpectralConstraint;
use crate::error::Result;
use crate::mathcore::io::{read_matrix, MatrixFile};
use crate::mathcore::QuantumState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSource {
    Path(PathBuf),
    Inline(MatrixFile),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetFile {
    pub subset: Vec<usize>,
    pub state: StateSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    #[serde(rename = "N")]
    pub parties: usize,
    pub d: usize,
    pub targets: Vec<TargetFile>,
    pub constraint: SpectralConstraint,
}

impl SpecFile {
    pub fn resolve(&self, base: &Path) -> Result<(MarginalSpec, SpectralConstraint)> {
        let targets = self
            .targets
            .iter()
            .map(|t| {
                let m = match &t.state {
                    StateSource::Inline(f) => f.to_matrix()?,
                    StateSource::Path(p) => read_matrix(&base.join(p))?,
                };
                Ok((t.subset.clone(), QuantumState::new(m, vec![self.d; t.subset.len()])?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((MarginalSpec::new(self.parties, self.d, targets)?, self.constraint.clone()))
    }

    pub fn from_spec(spec: &MarginalSpec, constraint: &SpectralConstraint) -> Self {
        Self {
            parties: spec.parties(),
            d: spec.local_dim(),
            targets: spec
                .targets()
                .iter()
                .map(|t| TargetFile {
                    subset: t.subset().to_vec(),
                    state: StateSource::Inline(MatrixFile::from_matrix(t.state().matrix())),
                })
                .collect(),
            constraint: constraint.clone(),
        }
    }
}

pub fn read_spec(path: &Path) -> Result<(MarginalSpec, SpectralConstraint)> {
    let file: SpecFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    file.resolve(path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_round_trip() {
        let spec = MarginalSpec::maximally_mixed(3, 2, 1).unwrap();
        let c = SpectralConstraint::Rank(1);
        let json = serde_json::to_string(&SpecFile::from_spec(&spec, &c)).unwrap();
        assert!(json.contains("\"constraint\":{\"rank\":1}"));
        let back: SpecFile = serde_json::from_str(&json).unwrap();
        let (s2, c2) = back.resolve(Path::new(".")).unwrap();
        assert_eq!(s2, spec);
        assert_eq!(c2, c);
    }
}
