//! Distribution-function versions of Opial's and Wirtinger's inequalities.
//!
//! Every inequality is evaluated against a probability distribution `F` that may mix
//! atoms with piecewise-uniform densities. Continuous parts are atomized at conditional
//! quantile midpoints ([`quantize`]), after which all evaluators run on a pure-atom
//! [`QuantizedModel`] using prefix-sum recurrences. Results are exact for atomic `F`
//! and converge under refinement for continuous `F`.
//!
//! Layout:
//!
//! - [`dist`]: distributions, CDF queries, atomization, conditional truncation.
//! - [`node_fn`]: the functions `ψ` and `χ` that the inequalities integrate.
//! - [`functionals`]: fast evaluators returning [`IneqReport`]s.
//! - [`oracle`]: brute-force enumeration over index tuples, independent of `functionals`.
//! - [`sharpness`]: extremal searches, refinement studies and randomized counterexample search.
//!
//! ```
//! use opial_core::{dist, functionals, Direction};
//!
//! let f = dist::make_discrete(&[1.0, 2.0, 3.0], &[1.0 / 3.0; 3]).unwrap();
//! let q = dist::quantize(&f, 1).unwrap();
//! let report = functionals::opial_terms(&q, &[1.0, 1.0, 1.0], Direction::Below).unwrap();
//! assert!(report.equality);
//! ```

#![forbid(unsafe_code)]

pub mod dist;
pub mod error;
pub mod functionals;
pub mod node_fn;
pub mod oracle;
pub mod report;
pub mod sharpness;
pub mod summation;

pub use dist::{Distribution, Piece, QuantizedModel, Side};
pub use error::{Error, Result};
pub use node_fn::NodeFunction;
pub use report::{Direction, FunctionalId, IneqReport, Terms, Tolerances};
pub use sharpness::ExtremalResult;

/// Absolute tolerance for every probability comparison (mass totals, conditioning masses).
pub const PROB_TOL: f64 = 1e-12;
