//! Fixed-point search for a state with prescribed marginals and spectrum.
//!
//! Each iteration imposes every marginal, diagonalizes `rho' = U D U^dagger`
//! and replaces D by the prescribed spectrum, `rho'' = U L U^dagger`.
//! The accelerated variant replaces the plain marginal sweep by an anchored
//! and momentum-weighted one.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::marginal::{impose_all, impose_marginal, MarginalSpec};
use crate::error::{Error, Result};
use crate::mathcore::{HermitianMatrix, QuantumState, RngSeed};

/// Spectra are checked to this tolerance.
const SPECTRUM_TOL: f64 = 1e-10;
/// Recorded trajectory points before decimation.
pub const MAX_TRAJECTORY_POINTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralConstraint {
    /// Descending, nonnegative, summing to one, length d^N.
    Spectrum(Vec<f64>),
    /// Rank at most r.
    Rank(usize),
}

impl SpectralConstraint {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Self::Spectrum(l) => {
                if l.len() != dim {
                    return Err(Error::InvalidInput(format!("spectrum has {} entries, expected {dim}", l.len())));
                }
                if l.iter().any(|v| *v < 0.0) || l.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::InvalidInput("spectrum must be nonnegative and descending".into()));
                }
                let s: f64 = l.iter().sum();
                if (s - 1.0).abs() > SPECTRUM_TOL {
                    return Err(Error::InvalidInput(format!("spectrum sums to {s}")));
                }
            }
            Self::Rank(r) => {
                if *r == 0 || *r > dim {
                    return Err(Error::InvalidInput(format!("rank {r} outside 1..={dim}")));
                }
            }
        }
        Ok(())
    }
}

/// Result of a spectral substitution.
#[derive(Clone, Debug)]
pub struct SpectralStep {
    pub matrix: HermitianMatrix,
    /// Eigenvalues of the input, descending.
    pub input_spectrum: Vec<f64>,
    /// Spectrum put in their place.
    pub imposed_spectrum: Vec<f64>,
}

/// Replace the spectrum of `rho` keeping its eigenvectors. Eigenvalues are
/// paired with the prescription by descending order.
pub fn impose_spectrum_step(rho: &HermitianMatrix, c: &SpectralConstraint) -> Result<SpectralStep> {
    c.validate(rho.dim())?;
    let e = rho.eigh();
    let imposed = match c {
        SpectralConstraint::Spectrum(l) => l.clone(),
        SpectralConstraint::Rank(r) => {
            let mut l: Vec<f64> = e.values.iter().enumerate().map(|(i, &v)| if i < *r && v > 0.0 { v } else { 0.0 }).collect();
            let s: f64 = l.iter().sum();
            if s <= 0.0 {
                return Err(Error::DegenerateIterate);
            }
            l.iter_mut().for_each(|v| *v /= s);
            l
        }
    };
    Ok(SpectralStep {
        matrix: HermitianMatrix::from_spectrum(&e.vectors, &imposed),
        input_spectrum: e.values,
        imposed_spectrum: imposed,
    })
}

pub fn impose_spectrum(rho: &HermitianMatrix, c: &SpectralConstraint) -> Result<HermitianMatrix> {
    Ok(impose_spectrum_step(rho, c)?.matrix)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedState {
    /// Hilbert-Schmidt random full-rank state.
    #[default]
    Random,
    MaximallyMixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub epsilon: f64,
    pub max_iterations: usize,
    #[serde(default)]
    pub seed_state: SeedState,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_iterations: 50_000,
            seed_state: SeedState::Random,
        }
    }
}

/// Metric history. Every iteration is recorded until
/// [`MAX_TRAJECTORY_POINTS`]; after that every second point is dropped and
/// the recording stride doubles.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub iteration: Vec<usize>,
    pub d_m: Vec<f64>,
    pub d_lambda: Vec<f64>,
    pub d_t: Vec<f64>,
    stride: usize,
}

impl Trajectory {
    fn push(&mut self, n: usize, dm: f64, dl: f64, dt: f64, force: bool) {
        if self.stride == 0 {
            self.stride = 1;
        }
        if !force && n % self.stride != 0 {
            return;
        }
        if self.iteration.last() == Some(&n) {
            return;
        }
        self.iteration.push(n);
        self.d_m.push(dm);
        self.d_lambda.push(dl);
        self.d_t.push(dt);
        if self.iteration.len() >= MAX_TRAJECTORY_POINTS {
            self.stride *= 2;
            let keep: Vec<bool> = self.iteration.iter().map(|i| i % self.stride == 0).collect();
            for v in [&mut self.d_m, &mut self.d_lambda, &mut self.d_t] {
                let mut k = keep.iter();
                v.retain(|_| *k.next().unwrap());
            }
            let mut k = keep.iter();
            self.iteration.retain(|_| *k.next().unwrap());
        }
    }

    pub fn len(&self) -> usize {
        self.iteration.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iteration.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub iterations: usize,
    pub trajectory: Trajectory,
    pub runtime_secs: f64,
    pub converged: bool,
    pub final_d_m: f64,
    pub final_d_lambda: f64,
    pub final_d_t: f64,
}

#[derive(Clone, Debug)]
pub struct QmpSolution {
    /// The last `rho''`.
    pub state: QuantumState,
    pub report: ConvergenceReport,
}

impl QmpSolution {
    /// [`Error::NotConverged`] unless the run met its tolerance.
    pub fn into_result(self) -> Result<Self> {
        if self.report.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.report.iterations,
                residual: self.report.final_d_t,
            })
        }
    }
}

/// Anchor weight alpha_n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorRule {
    /// (n / 10^5 + 1)^(-exponent)
    Power { exponent: f64 },
    Constant(f64),
}

impl AnchorRule {
    pub fn value(&self, n: usize) -> f64 {
        match *self {
            Self::Power { exponent } => (n as f64 / 1e5 + 1.0).powf(-exponent),
            Self::Constant(v) => v,
        }
    }
}

/// Momentum weight beta_n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaRule {
    /// alpha_n^2
    Squared,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalpernSchedule {
    pub alpha: f64,
    pub mu: f64,
    pub anchor: AnchorRule,
    pub beta: BetaRule,
}

impl HalpernSchedule {
    /// alpha_n = (n/10^5 + 1)^(-alpha), beta_n = alpha_n^2.
    pub fn new(alpha: f64, mu: f64) -> Result<Self> {
        let s = Self {
            alpha,
            mu,
            anchor: AnchorRule::Power { exponent: alpha },
            beta: BetaRule::Squared,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidInput("alpha must be positive".into()));
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::InvalidInput("mu must lie in (0, 1]".into()));
        }
        if let AnchorRule::Power { exponent } = self.anchor {
            if !(exponent > 0.0 && exponent.is_finite()) {
                return Err(Error::InvalidInput("anchor exponent must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn alpha_n(&self, n: usize) -> f64 {
        self.anchor.value(n)
    }

    pub fn beta_n(&self, n: usize) -> f64 {
        match self.beta {
            BetaRule::Squared => self.alpha_n(n).powi(2),
            BetaRule::Zero => 0.0,
        }
    }
}

fn seed_state<R: Rng + ?Sized>(spec: &MarginalSpec, options: &SolverOptions, rng: &mut R) -> HermitianMatrix {
    match options.seed_state {
        SeedState::Random => QuantumState::random_mixed(spec.dims(), rng).into_matrix(),
        SeedState::MaximallyMixed => QuantumState::maximally_mixed(spec.dims()).into_matrix(),
    }
}

fn check(spec: &MarginalSpec, constraint: &SpectralConstraint, options: &SolverOptions) -> Result<()> {
    constraint.validate(spec.total_dim())?;
    if !(options.epsilon > 0.0) {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    Ok(())
}

/// Shared loop: `sweep` maps (iteration, rho'') to rho'.
fn iterate<F>(
    spec: &MarginalSpec,
    constraint: &SpectralConstraint,
    options: &SolverOptions,
    mut rho: HermitianMatrix,
    mut sweep: F,
) -> Result<QmpSolution>
where
    F: FnMut(usize, &HermitianMatrix) -> Result<HermitianMatrix>,
{
    let start = Instant::now();
    let mut trajectory = Trajectory::default();
    let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut n = 0;
    let mut converged = false;
    while n < options.max_iterations {
        let rho1 = sweep(n, &rho)?;
        let step = impose_spectrum_step(&rho1, constraint)?;
        let dm = spec.marginal_distance(&step.matrix)?;
        let dl = step
            .input_spectrum
            .iter()
            .zip(&step.imposed_spectrum)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let dt = dm.hypot(dl);
        rho = step.matrix;
        n += 1;
        last = (dm, dl, dt);
        converged = dt <= options.epsilon;
        trajectory.push(n, dm, dl, dt, converged || n == options.max_iterations);
        if converged {
            break;
        }
    }
    Ok(QmpSolution {
        state: QuantumState::new_unchecked(rho, spec.dims()),
        report: ConvergenceReport {
            iterations: n,
            trajectory,
            runtime_secs: start.elapsed().as_secs_f64(),
            converged,
            final_d_m: last.0,
            final_d_lambda: last.1,
            final_d_t: last.2,
        },
    })
}

/// Plain iteration from the seed state drawn from `seed`. A run that hits
/// `max_iterations` returns with `converged = false`.
pub fn solve(
    spec: &MarginalSpec,
    constraint: &SpectralConstraint,
    options: &SolverOptions,
    seed: RngSeed,
) -> Result<QmpSolution> {
    check(spec, constraint, options)?;
    let rho0 = seed_state(spec, options, &mut seed.rng());
    solve_from(spec, constraint, options, rho0)
}

pub fn solve_from(
    spec: &MarginalSpec,
    constraint: &SpectralConstraint,
    options: &SolverOptions,
    rho0: HermitianMatrix,
) -> Result<QmpSolution> {
    check(spec, constraint, options)?;
    iterate(spec, constraint, options, rho0, |_, rho| impose_all(rho, spec))
}

/// Accelerated iteration. Per marginal and iteration n:
///
/// ```text
/// z   = (Q_i(rho) - rho) / alpha
/// z   = z + beta_n z
/// y   = rho + alpha z
/// rho = mu alpha_n rho + (1 - mu alpha_n) y
/// ```
pub fn solve_accelerated(
    spec: &MarginalSpec,
    constraint: &SpectralConstraint,
    schedule: &HalpernSchedule,
    options: &SolverOptions,
    seed: RngSeed,
) -> Result<QmpSolution> {
    check(spec, constraint, options)?;
    let rho0 = seed_state(spec, options, &mut seed.rng());
    solve_accelerated_from(spec, constraint, schedule, options, rho0)
}

pub fn solve_accelerated_from(
    spec: &MarginalSpec,
    constraint: &SpectralConstraint,
    schedule: &HalpernSchedule,
    options: &SolverOptions,
    rho0: HermitianMatrix,
) -> Result<QmpSolution> {
    check(spec, constraint, options)?;
    schedule.validate()?;
    let alpha = schedule.alpha;
    iterate(spec, constraint, options, rho0, |n, rho| {
        let an = schedule.alpha_n(n);
        let bn = schedule.beta_n(n);
        let w = schedule.mu * an;
        let mut x = rho.clone();
        for i in 0..spec.targets().len() {
            let q = impose_marginal(&x, spec, i)?;
            let mut z = (&q - &x).scale(1.0 / alpha);
            z = &z + &z.scale(bn);
            let y = &x + &z.scale(alpha);
            x = &x.scale(w) + &y.scale(1.0 - w);
        }
        Ok(x)
    })
}
