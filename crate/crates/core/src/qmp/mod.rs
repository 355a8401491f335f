//! The quantum marginal problem: find a global state with prescribed
//! reductions and, optionally, a prescribed spectrum or rank.

pub mod closed;
pub mod io;
pub mod marginal;
pub mod solve;

pub use closed::{closed_form_all_k, closed_form_coefficient, npm_sweep, NpmRow};
pub use io::{read_spec, SpecFile, StateSource, TargetFile};
pub use marginal::{impose_all, impose_marginal, k_subsets, MarginalSpec, MarginalTarget};
pub use solve::{
    impose_spectrum, impose_spectrum_step, solve, solve_accelerated, solve_accelerated_from, solve_from, AnchorRule,
    BetaRule, ConvergenceReport, HalpernSchedule, QmpSolution, SeedState, SolverOptions, SpectralConstraint,
    Trajectory,
};
