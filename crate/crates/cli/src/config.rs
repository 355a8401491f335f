//! JSON run configurations, one shape per subcommand. Relative paths inside
//! a config are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use qimpose::bell::EfficiencyMode;
use qimpose::mathcore::{mub_bases, pauli_product_bases};
use qimpose::qmp::{AnchorRule, BetaRule, SeedState};
use qimpose::qse::GeneratorKind;
use qimpose::MeasurementSet;

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn resolve(config: &Path, p: &Path) -> PathBuf {
    config.parent().unwrap_or(Path::new(".")).join(p)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Measurements {
    /// Complete set of mutually unbiased bases in dimension `dim`.
    Mub { dim: usize },
    /// Tensor products of single-qubit Pauli eigenbases.
    Pauli { qubits: usize },
}

impl Measurements {
    pub fn build(&self) -> Result<Vec<MeasurementSet>> {
        Ok(match *self {
            Measurements::Mub { dim } => mub_bases(dim)?,
            Measurements::Pauli { qubits } => pauli_product_bases(qubits)?,
        })
    }

    pub fn dims(&self) -> Vec<usize> {
        match *self {
            Measurements::Mub { dim } => vec![dim],
            Measurements::Pauli { qubits } => vec![2; qubits],
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QseEstimate {
    pub measurements: Measurements,
    /// One frequency vector per basis, in basis order.
    pub frequencies: Vec<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub max_iterations: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QseBenchmark {
    pub measurements: Measurements,
    #[serde(default)]
    pub generator: GeneratorKind,
    pub white_noise: f64,
    /// Shots per basis; absent means exact probabilities.
    pub samples_per_basis: Option<u64>,
    pub trials: usize,
    pub epsilon: Option<f64>,
    pub max_iterations: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellLhv {
    pub inequality: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellOptimize {
    pub counts: PathBuf,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_chains")]
    pub chains: usize,
}

fn default_trials() -> usize {
    20
}

fn default_chains() -> usize {
    1
}

/// Behavior the efficiency is evaluated on.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum BehaviorSource {
    /// Relative frequencies of a counts file, fitted to the no-signaling set.
    Counts(PathBuf),
    /// Optimal quantum behavior of the tilted inequality with this alpha.
    Tilted(f64),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellEfficiency {
    pub inequality: PathBuf,
    pub behavior: BehaviorSource,
    #[serde(default = "default_mode")]
    pub mode: EfficiencyMode,
}

fn default_mode() -> EfficiencyMode {
    EfficiencyMode::Symmetric
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Acceleration {
    pub alpha: f64,
    pub mu: f64,
    pub anchor: Option<AnchorRule>,
    pub beta: Option<BetaRule>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QmpSolve {
    pub spec: PathBuf,
    pub epsilon: Option<f64>,
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub seed_state: SeedState,
    pub accelerated: Option<Acceleration>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QmpSweep {
    #[serde(rename = "N")]
    pub parties: usize,
    pub k: usize,
    pub d: usize,
    pub ms: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub generator: GeneratorKind,
}

pub fn check_positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        bail!("{name} must be at least 1");
    }
    Ok(())
}
