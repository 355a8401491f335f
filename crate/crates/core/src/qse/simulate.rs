//! Noisy finite-statistics data and Monte Carlo fidelity studies.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimate::{estimate, EstimationProblem, DEFAULT_EPSILON, DEFAULT_MAX_ITERATIONS};
use crate::error::{Error, Result};
use crate::mathcore::{MeasurementKind, MeasurementSet, QuantumState, RngSeed};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Independent Poisson counts per outcome, renormalized by their total.
    #[default]
    Poisson,
    /// Fixed total per measurement.
    Multinomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Weight of I/d mixed into the generator.
    pub white_noise: f64,
    /// Mean counts per measurement; `None` gives exact probabilities.
    pub samples_per_basis: Option<u64>,
    #[serde(default)]
    pub sampling: Sampling,
}

impl NoiseModel {
    pub fn exact() -> Self {
        Self {
            white_noise: 0.0,
            samples_per_basis: None,
            sampling: Sampling::Poisson,
        }
    }

    pub fn new(white_noise: f64, samples_per_basis: Option<u64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&white_noise) {
            return Err(Error::InvalidInput(format!("white noise {white_noise} outside [0,1]")));
        }
        if samples_per_basis == Some(0) {
            return Err(Error::InvalidInput("samples per basis must be positive".into()));
        }
        Ok(Self {
            white_noise,
            samples_per_basis,
            sampling: Sampling::Poisson,
        })
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }
}

fn draw_counts<R: Rng + ?Sized>(probs: &[f64], total: u64, sampling: Sampling, rng: &mut R) -> Vec<f64> {
    match sampling {
        Sampling::Poisson => probs
            .iter()
            .map(|&p| {
                let mean = total as f64 * p;
                if mean > 0.0 {
                    Poisson::new(mean).map(|d| d.sample(rng)).unwrap_or(0.0)
                } else {
                    0.0
                }
            })
            .collect(),
        Sampling::Multinomial => {
            let mut left = total;
            let mut mass = 1.0;
            let mut out = Vec::with_capacity(probs.len());
            for (i, &p) in probs.iter().enumerate() {
                if i + 1 == probs.len() {
                    out.push(left as f64);
                    break;
                }
                let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
                let k = Binomial::new(left, q).map(|d| d.sample(rng)).unwrap_or(0);
                out.push(k as f64);
                left -= k;
                mass -= p;
            }
            out
        }
    }
}

/// Frequencies for each measurement on `(1 - lambda) rho + lambda I/d`.
pub fn simulate_frequencies<R: Rng + ?Sized>(
    gen: &QuantumState,
    measurements: &[MeasurementSet],
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let noisy = gen.with_white_noise(noise.white_noise)?;
    measurements
        .iter()
        .map(|m| {
            if m.dim() != gen.dim() {
                return Err(Error::InvalidInput("measurement dimension does not match state".into()));
            }
            let exact = m.born_probabilities(noisy.matrix());
            let Some(total) = noise.samples_per_basis else {
                return Ok(exact);
            };
            if m.kind() == MeasurementKind::ObservableBasis {
                return Err(Error::InvalidMeasurementKind(
                    "finite statistics need outcome probabilities, not expectation values".into(),
                ));
            }
            let probs: Vec<f64> = exact.iter().map(|&p| p.max(0.0)).collect();
            let counts = draw_counts(&probs, total, noise.sampling, rng);
            let sum: f64 = counts.iter().sum();
            if sum == 0.0 {
                return Ok(vec![1.0 / counts.len() as f64; counts.len()]);
            }
            Ok(counts.iter().map(|c| c / sum).collect())
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSettings {
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FidelityStats {
    pub mean: f64,
    /// Sample standard deviation over sqrt(trials).
    pub std_err: f64,
    pub fidelities: Vec<f64>,
    pub mean_iterations: f64,
}

impl FidelityStats {
    fn from_runs(runs: Vec<(f64, usize)>) -> Self {
        let n = runs.len() as f64;
        let fidelities: Vec<f64> = runs.iter().map(|r| r.0).collect();
        let mean = fidelities.iter().sum::<f64>() / n;
        let var = fidelities.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self {
            mean,
            std_err: (var / n).sqrt(),
            fidelities,
            mean_iterations: runs.iter().map(|r| r.1 as f64).sum::<f64>() / n,
        }
    }
}

fn one_trial(
    gen: &QuantumState,
    measurements: &[MeasurementSet],
    noise: &NoiseModel,
    settings: &EstimatorSettings,
    seed: RngSeed,
) -> Result<(f64, usize)> {
    let mut rng = seed.rng();
    let freqs = simulate_frequencies(gen, measurements, noise, &mut rng)?;
    let problem = EstimationProblem::new(measurements.to_vec(), freqs)?
        .with_epsilon(settings.epsilon)
        .with_max_iterations(settings.max_iterations);
    let est = estimate(&problem)?;
    Ok((est.state.fidelity(gen)?, est.iterations))
}

/// Fidelity between a fixed generator and its estimates from independently
/// simulated data sets. Trial `i` uses `seed.derive(i)`.
pub fn bootstrap_fidelity(
    gen: &QuantumState,
    measurements: &[MeasurementSet],
    noise: &NoiseModel,
    trials: usize,
    settings: &EstimatorSettings,
    seed: RngSeed,
) -> Result<FidelityStats> {
    if trials < 2 {
        return Err(Error::InvalidInput("need at least two trials".into()));
    }
    let runs = (0..trials)
        .into_par_iter()
        .map(|t| one_trial(gen, measurements, noise, settings, seed.derive(t as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelityStats::from_runs(runs))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// Hilbert-Schmidt random mixed states.
    #[default]
    HilbertSchmidt,
    /// Haar random pure states.
    HaarPure,
}

/// Like [`bootstrap_fidelity`], but every trial draws its own generator.
pub fn benchmark(
    dims: &[usize],
    generator: GeneratorKind,
    measurements: &[MeasurementSet],
    noise: &NoiseModel,
    trials: usize,
    settings: &EstimatorSettings,
    seed: RngSeed,
) -> Result<FidelityStats> {
    if trials < 2 {
        return Err(Error::InvalidInput("need at least two trials".into()));
    }
    let runs = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = seed.derive(t as u64);
            // Separate streams for the generator and the counts.
            let mut rng = RngSeed(trial_seed.0 ^ 0x9e37_79b9_7f4a_7c15).rng();
            let gen = match generator {
                GeneratorKind::HilbertSchmidt => QuantumState::random_mixed(dims.to_vec(), &mut rng),
                GeneratorKind::HaarPure => QuantumState::random_pure(dims.to_vec(), &mut rng),
            };
            one_trial(&gen, measurements, noise, settings, trial_seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelityStats::from_runs(runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathcore::mub_bases;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_noiseless_is_born() {
        let mut rng = RngSeed(1).rng();
        let gen = QuantumState::random_mixed(vec![2], &mut rng);
        let sets = mub_bases(2).unwrap();
        let f = simulate_frequencies(&gen, &sets, &NoiseModel::exact(), &mut rng).unwrap();
        for (s, fi) in sets.iter().zip(&f) {
            let p = s.born_probabilities(gen.matrix());
            for (a, b) in p.iter().zip(fi) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn full_noise_is_uniform_on_average() {
        let mut rng = RngSeed(2).rng();
        let gen = QuantumState::random_pure(vec![3], &mut rng);
        let sets = mub_bases(3).unwrap();
        let noise = NoiseModel::new(1.0, Some(1000)).unwrap();
        let mut acc = [0.0; 3];
        let reps = 400;
        for _ in 0..reps {
            let f = simulate_frequencies(&gen, &sets[..1], &noise, &mut rng).unwrap();
            for k in 0..3 {
                acc[k] += f[0][k] / reps as f64;
            }
        }
        for v in acc {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 5e-3);
        }
    }

    #[test]
    fn multinomial_keeps_total() {
        let mut rng = RngSeed(3).rng();
        let c = draw_counts(&[0.2, 0.3, 0.5], 1000, Sampling::Multinomial, &mut rng);
        assert_eq!(c.iter().sum::<f64>(), 1000.0);
    }

    #[test]
    fn exact_bootstrap_is_perfect() {
        let mut rng = RngSeed(4).rng();
        let gen = QuantumState::random_mixed(vec![2], &mut rng);
        let s = bootstrap_fidelity(&gen, &mub_bases(2).unwrap(), &NoiseModel::exact(), 4, &Default::default(), RngSeed(0))
            .unwrap();
        assert_abs_diff_eq!(s.mean, 1.0, epsilon = 1e-8);
        assert!(s.std_err < 1e-8);
    }

    #[test]
    fn bootstrap_needs_two_trials() {
        let gen = QuantumState::maximally_mixed(vec![2]);
        assert!(bootstrap_fidelity(&gen, &mub_bases(2).unwrap(), &NoiseModel::exact(), 1, &Default::default(), RngSeed(0))
            .is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = RngSeed(5).rng();
        let gen = QuantumState::random_mixed(vec![2], &mut rng);
        let noise = NoiseModel::new(0.1, Some(200)).unwrap();
        let sets = mub_bases(2).unwrap();
        let a = bootstrap_fidelity(&gen, &sets, &noise, 8, &Default::default(), RngSeed(77)).unwrap();
        let b = bootstrap_fidelity(&gen, &sets, &noise, 8, &Default::default(), RngSeed(77)).unwrap();
        assert_eq!(a.fidelities, b.fidelities);
    }
}
