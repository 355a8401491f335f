use std::path::Path;

use anyhow::{bail, Result};
use serde::Serialize;

use qimpose::bell::{
    canonical_form, efficiency_threshold, lhv_bound_with_strategy, maximize_gap, no_signaling_fit_counts,
    read_counts, read_inequality, tilted_inequality, DeterministicStrategy, EfficiencyMode, GapOptions,
    InequalityFile,
};
use qimpose::mathcore::io::MatrixFile;
use qimpose::qmp::{npm_sweep, read_spec, solve, solve_accelerated, HalpernSchedule, NpmRow, SolverOptions};
use qimpose::qse::{benchmark, estimate, EstimationProblem, EstimatorSettings, GeneratorKind, NoiseModel};
use qimpose::RngSeed;

use crate::config::{self, check_positive, resolve, BehaviorSource};
use crate::output::{fmt, OutDir};

/// What a command reports back to `main`.
pub enum Outcome {
    Done,
    /// Results were written but the iteration missed its tolerance.
    NotConverged,
}

fn progress(msg: &str) {
    eprintln!("[qimpose] {msg}");
}

#[derive(Serialize)]
struct EstimateResult {
    dim: usize,
    iterations: usize,
    residual: f64,
    converged: bool,
    state: MatrixFile,
}

pub fn qse_estimate(cfg_path: &Path, out: &OutDir) -> Result<Outcome> {
    let cfg: config::QseEstimate = config::load(cfg_path)?;
    let mut problem = EstimationProblem::new(cfg.measurements.build()?, cfg.frequencies)?;
    if let Some(e) = cfg.epsilon {
        problem = problem.with_epsilon(e);
    }
    if let Some(n) = cfg.max_iterations {
        problem = problem.with_max_iterations(n);
    }
    progress(&format!("estimating a state of dimension {}", problem.dim()));
    let est = estimate(&problem)?;
    out.json(
        "estimate.json",
        &EstimateResult {
            dim: problem.dim(),
            iterations: est.iterations,
            residual: est.residual,
            converged: est.converged,
            state: MatrixFile::from_matrix(est.state.matrix()),
        },
    )?;
    out.csv(
        "residuals.csv",
        &["n", "residual"],
        est.trace.residuals.iter().enumerate().map(|(i, r)| vec![(i + 1).to_string(), fmt(*r)]),
    )?;
    Ok(if est.converged { Outcome::Done } else { Outcome::NotConverged })
}

#[derive(Serialize)]
struct BenchmarkResult {
    #[serde(rename = "meanF")]
    mean_fidelity: f64,
    std_err: f64,
    mean_iterations: f64,
    trials: usize,
    generator: GeneratorKind,
    white_noise: f64,
    samples_per_basis: Option<u64>,
}

pub fn qse_benchmark(cfg_path: &Path, out: &OutDir, seed: RngSeed) -> Result<Outcome> {
    let cfg: config::QseBenchmark = config::load(cfg_path)?;
    let sets = cfg.measurements.build()?;
    let noise = NoiseModel::new(cfg.white_noise, cfg.samples_per_basis)?;
    let mut settings = EstimatorSettings::default();
    settings.epsilon = cfg.epsilon.unwrap_or(settings.epsilon);
    settings.max_iterations = cfg.max_iterations.unwrap_or(settings.max_iterations);
    progress(&format!("{} trials over {} bases", cfg.trials, sets.len()));
    let stats = benchmark(&cfg.measurements.dims(), cfg.generator, &sets, &noise, cfg.trials, &settings, seed)?;
    progress(&format!("mean fidelity {:.4} +- {:.4}", stats.mean, stats.std_err));
    out.json(
        "benchmark.json",
        &BenchmarkResult {
            mean_fidelity: stats.mean,
            std_err: stats.std_err,
            mean_iterations: stats.mean_iterations,
            trials: cfg.trials,
            generator: cfg.generator,
            white_noise: cfg.white_noise,
            samples_per_basis: cfg.samples_per_basis,
        },
    )?;
    out.csv(
        "fidelities.csv",
        &["trial", "fidelity"],
        stats.fidelities.iter().enumerate().map(|(i, f)| vec![i.to_string(), fmt(*f)]),
    )?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct LhvResult {
    bound: f64,
    strategy: DeterministicStrategy,
}

pub fn bell_lhv(cfg_path: &Path, out: &OutDir) -> Result<Outcome> {
    let cfg: config::BellLhv = config::load(cfg_path)?;
    let (ineq, _) = read_inequality(&resolve(cfg_path, &cfg.inequality))?;
    let (bound, strategy) = lhv_bound_with_strategy(&ineq)?;
    println!("{bound}");
    out.json("lhv.json", &LhvResult { bound, strategy })?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct OptimizeResult {
    r: f64,
    q: f64,
    dq: f64,
    inequality: InequalityFile,
    terms: String,
}

pub fn bell_optimize(cfg_path: &Path, out: &OutDir, seed: RngSeed) -> Result<Outcome> {
    let cfg: config::BellOptimize = config::load(cfg_path)?;
    check_positive("trials", cfg.trials)?;
    check_positive("chains", cfg.chains)?;
    let counts = read_counts(&resolve(cfg_path, &cfg.counts))?;
    progress(&format!("{} chains of {} restarts", cfg.chains, cfg.trials));
    let res = maximize_gap(&counts, GapOptions { trials: cfg.trials, chains: cfg.chains }, seed)?;
    let terms = res.inequality.format_terms(Some(res.c));
    println!("{terms}");
    println!("R = {}", res.r);
    out.json(
        "optimize.json",
        &OptimizeResult {
            r: res.r,
            q: res.q,
            dq: res.dq,
            inequality: InequalityFile::from_inequality(&res.inequality, Some(res.c)),
            terms,
        },
    )?;
    out.csv(
        "history.csv",
        &["restart", "best_r"],
        res.history.iter().enumerate().map(|(i, r)| vec![i.to_string(), fmt(*r)]),
    )?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct EfficiencyResult {
    mode: EfficiencyMode,
    eta: f64,
    canonical: InequalityFile,
    offset: f64,
}

pub fn bell_efficiency(cfg_path: &Path, out: &OutDir) -> Result<Outcome> {
    let cfg: config::BellEfficiency = config::load(cfg_path)?;
    let (ineq, _) = read_inequality(&resolve(cfg_path, &cfg.inequality))?;
    let p = match &cfg.behavior {
        BehaviorSource::Counts(path) => no_signaling_fit_counts(&read_counts(&resolve(cfg_path, path))?)?,
        BehaviorSource::Tilted(alpha) => tilted_inequality(*alpha)?.optimal_behavior(),
    };
    let canon = canonical_form(&ineq)?.normalized();
    let eta = efficiency_threshold(&canon, &p, cfg.mode)?;
    println!("{eta}");
    out.json(
        "efficiency.json",
        &EfficiencyResult {
            mode: cfg.mode,
            eta,
            canonical: InequalityFile::from_inequality(&canon.inequality, Some(canon.bound)),
            offset: canon.offset,
        },
    )?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct SolveResult {
    converged: bool,
    iterations: usize,
    final_d_m: f64,
    final_d_lambda: f64,
    final_d_t: f64,
    accelerated: Option<HalpernSchedule>,
    state: MatrixFile,
}

pub fn qmp_solve(cfg_path: &Path, out: &OutDir, seed: RngSeed) -> Result<Outcome> {
    let cfg: config::QmpSolve = config::load(cfg_path)?;
    let (spec, constraint) = read_spec(&resolve(cfg_path, &cfg.spec))?;
    let mut opts = SolverOptions::default();
    opts.epsilon = cfg.epsilon.unwrap_or(opts.epsilon);
    opts.max_iterations = cfg.max_iterations.unwrap_or(opts.max_iterations);
    opts.seed_state = cfg.seed_state;
    let schedule = match &cfg.accelerated {
        None => None,
        Some(a) => {
            let mut s = HalpernSchedule::new(a.alpha, a.mu)?;
            if let Some(r) = a.anchor {
                s.anchor = r;
            }
            if let Some(b) = a.beta {
                s.beta = b;
            }
            s.validate()?;
            Some(s)
        }
    };
    progress(&format!(
        "{} parties of dimension {}, {} marginals, up to {} iterations",
        spec.parties(),
        spec.local_dim(),
        spec.targets().len(),
        opts.max_iterations
    ));
    let sol = match &schedule {
        None => solve(&spec, &constraint, &opts, seed)?,
        Some(s) => solve_accelerated(&spec, &constraint, s, &opts, seed)?,
    };
    let r = &sol.report;
    progress(&format!("D_T = {:e} after {} iterations", r.final_d_t, r.iterations));
    out.json(
        "solution.json",
        &SolveResult {
            converged: r.converged,
            iterations: r.iterations,
            final_d_m: r.final_d_m,
            final_d_lambda: r.final_d_lambda,
            final_d_t: r.final_d_t,
            accelerated: schedule,
            state: MatrixFile::from_matrix(sol.state.matrix()),
        },
    )?;
    let t = &r.trajectory;
    out.csv(
        "trajectory.csv",
        &["n", "D_M", "D_lambda", "D_T"],
        (0..t.len()).map(|i| vec![t.iteration[i].to_string(), fmt(t.d_m[i]), fmt(t.d_lambda[i]), fmt(t.d_t[i])]),
    )?;
    if r.converged {
        Ok(Outcome::Done)
    } else {
        eprintln!(
            "not converged: D_T = {:e} after {} iterations (tolerance {:e})",
            r.final_d_t, r.iterations, opts.epsilon
        );
        Ok(Outcome::NotConverged)
    }
}

#[derive(Serialize)]
struct SweepResult {
    #[serde(rename = "N")]
    parties: usize,
    k: usize,
    d: usize,
    generator: GeneratorKind,
    rows: Vec<NpmRow>,
}

pub fn qmp_sweep(cfg_path: &Path, out: &OutDir, seed: RngSeed) -> Result<Outcome> {
    let cfg: config::QmpSweep = config::load(cfg_path)?;
    if cfg.ms.is_empty() {
        bail!("ms is empty");
    }
    progress(&format!("{} values of m, {} trials each", cfg.ms.len(), cfg.trials));
    let rows = npm_sweep(cfg.parties, cfg.k, cfg.d, &cfg.ms, cfg.trials, cfg.generator, seed)?;
    out.csv(
        "sweep.csv",
        &["m", "psd", "trials", "fraction"],
        rows.iter().map(|r| {
            vec![r.m.to_string(), r.psd.to_string(), r.trials.to_string(), fmt(r.psd as f64 / r.trials as f64)]
        }),
    )?;
    out.json(
        "sweep.json",
        &SweepResult {
            parties: cfg.parties,
            k: cfg.k,
            d: cfg.d,
            generator: cfg.generator,
            rows,
        },
    )?;
    Ok(Outcome::Done)
}
