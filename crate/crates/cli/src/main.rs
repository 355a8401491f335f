//! Batch driver: one subcommand, one JSON config, one output directory.
//!
//! Exit codes: 0 on success, 2 when an iteration missed its tolerance (the
//! results are still written), 1 on any input error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::Outcome;
use output::{unix_now, Metadata, OutDir};
use qimpose::RngSeed;

#[derive(Parser)]
#[command(name = "qimpose", version, about = "Imposition-operator solvers for state estimation, Bell tests and marginal problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a state from measured frequencies.
    QseEstimate(Common),
    /// Mean fidelity of estimates from simulated noisy data.
    QseBenchmark(Common),
    /// Local bound of a Bell inequality.
    BellLhv(Common),
    /// Inequality with the largest gap ratio on a counts file.
    BellOptimize(Common),
    /// Detection efficiency needed to violate an inequality.
    BellEfficiency(Common),
    /// Solve a marginal problem with a spectral constraint.
    QmpSolve(Common),
    /// Count positive outputs of imposing random marginals on the identity.
    QmpSweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::QseEstimate(c) => ("qse-estimate", c),
            Command::QseBenchmark(c) => ("qse-benchmark", c),
            Command::BellLhv(c) => ("bell-lhv", c),
            Command::BellOptimize(c) => ("bell-optimize", c),
            Command::BellEfficiency(c) => ("bell-efficiency", c),
            Command::QmpSolve(c) => ("qmp-solve", c),
            Command::QmpSweep(c) => ("qmp-sweep", c),
        }
    }
}

fn dispatch(cmd: &Command, out: &OutDir) -> Result<Outcome> {
    let (_, c) = cmd.parts();
    let seed = RngSeed(c.seed);
    match cmd {
        Command::QseEstimate(_) => commands::qse_estimate(&c.config, out),
        Command::QseBenchmark(_) => commands::qse_benchmark(&c.config, out, seed),
        Command::BellLhv(_) => commands::bell_lhv(&c.config, out),
        Command::BellOptimize(_) => commands::bell_optimize(&c.config, out, seed),
        Command::BellEfficiency(_) => commands::bell_efficiency(&c.config, out),
        Command::QmpSolve(_) => commands::qmp_solve(&c.config, out, seed),
        Command::QmpSweep(_) => commands::qmp_sweep(&c.config, out, seed),
    }
}

fn run(cli: Cli) -> Result<i32> {
    let (name, c) = cli.command.parts();
    let threads = c.threads.map(|t| t as usize).unwrap_or_else(rayon::current_num_threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building thread pool")?;
    let out = OutDir::create(&c.out)?;
    let started = unix_now();
    let clock = Instant::now();
    let code = match pool.install(|| dispatch(&cli.command, &out))? {
        Outcome::Done => 0,
        Outcome::NotConverged => 2,
    };
    out.json(
        "metadata.json",
        &Metadata {
            command: name.to_string(),
            config: c.config.display().to_string(),
            seed: c.seed,
            threads,
            started_unix: started,
            runtime_secs: clock.elapsed().as_secs_f64(),
            exit_code: code,
            version: env!("CARGO_PKG_VERSION"),
        },
    )?;
    Ok(code)
}

fn main() -> ExitCode {
    // clap exits with 2 on bad arguments, which here means NotConverged.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
