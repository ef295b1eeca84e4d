//! Sharpness certification: extremal searches, refinement studies, counterexample search.

mod extremal;
mod search;
mod study;

pub use extremal::{
    maximize_ratio_opial, wirtinger_best_constant, ExtremalResult, WirtingerConstant, POWER_ITERATION_CAP,
};
pub use search::{generate_instance, search_counterexample, Instance, SearchOutcome, VIOLATION_TOL};
pub use study::{convergence_study, ConvergenceRow, ConvergenceTable};
