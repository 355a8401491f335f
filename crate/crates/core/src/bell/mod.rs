//! Bell nonlocality from coincidence counts.
//!
//! Inequalities are written in probability form,
//! `sum s p(ab|xy) + sum sA pA(a|x) + sum sB pB(b|y) <= C`, where C is the
//! local bound over deterministic strategies.

pub mod canonical;
pub mod io;
pub mod lhv;
pub mod nsfit;
pub mod optimize;
pub mod tilted;
pub mod types;
pub mod value;

pub use canonical::{canonical_form, efficiency_threshold, CanonicalInequality, EfficiencyMode};
pub use io::{read_counts, read_inequality, write_counts, write_inequality, CountsFile, InequalityFile};
pub use lhv::{all_strategies, lhv_bound, lhv_bound_with_strategy, strategy_value, DeterministicStrategy};
pub use nsfit::{no_signaling_fit, no_signaling_fit_counts, weighted_kl};
pub use optimize::{exact_ratio, maximize_gap, GapOptions, GapResult};
pub use tilted::{alpha_for_concurrence, tilted_coefficients, tilted_inequality, TiltedSetup};
pub use types::{BehaviorTable, BellInequality, BellScenario, CountsTable};
pub use value::{gap_ratio, quantum_value, QuantumValue};
