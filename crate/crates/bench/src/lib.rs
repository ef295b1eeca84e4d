//! Fixtures shared by the benchmarks.

use opial_core::dist::{make_discrete, make_uniform_interval, quantize};
use opial_core::QuantizedModel;

/// `U(0,1)` atomized at `m`.
pub fn uniform_model(m: usize) -> QuantizedModel {
    quantize(&make_uniform_interval(0.0, 1.0).expect("valid interval"), m).expect("within node limit")
}

/// `m` atoms at `0..m` with masses proportional to `1..=m`.
pub fn skewed_model(m: usize) -> QuantizedModel {
    let total = (m * (m + 1) / 2) as f64;
    let points: Vec<f64> = (0..m).map(|i| i as f64).collect();
    let probs: Vec<f64> = (1..=m).map(|k| k as f64 / total).collect();
    quantize(&make_discrete(&points, &probs).expect("normalized"), 1).expect("atomic")
}

/// A sign-changing test function.
pub fn wave(m: usize) -> Vec<f64> {
    (0..m).map(|i| (0.37 * i as f64).sin() + 0.25).collect()
}
