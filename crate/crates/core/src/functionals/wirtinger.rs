use std::f64::consts::PI;

use crate::dist::QuantizedModel;
use crate::error::{Error, Result};
use crate::report::{FunctionalId, IneqReport, Terms};
use crate::summation;

use super::opial::{check_len, strict_prefix};

/// Mean tolerance, relative to `max(1, rms ψ)`.
pub const ZERO_MEAN_TOL: f64 = 1e-10;

/// `E[(Σ_{Y<X} ψ(Y))²] <= Eψ² / π²` for zero-mean `ψ`.
///
/// With `project_mean` the mean is subtracted first; otherwise a nonzero mean is an error.
/// Reports on models that do not come from an absolutely continuous law are marked heuristic.
pub fn wirtinger_terms(q: &QuantizedModel, psi: &[f64], project_mean: bool) -> Result<IneqReport> {
    check_len(q, psi, "psi")?;
    let p = q.mass();
    let mean = summation::dot(p, psi);
    let centered: Vec<f64>;
    let psi = if project_mean {
        centered = psi.iter().map(|v| v - mean).collect();
        &centered[..]
    } else {
        let rms = summation::sum(p.iter().zip(psi).map(|(p, v)| p * v * v)).sqrt();
        if mean.abs() > ZERO_MEAN_TOL * rms.max(1.0) {
            return Err(Error::NotZeroMean { mean });
        }
        psi
    };

    let s = strict_prefix(p, psi);
    let lhs = summation::sum((0..p.len()).map(|i| p[i] * s[i] * s[i]));
    let rhs = summation::sum((0..p.len()).map(|i| p[i] * psi[i] * psi[i])) / (PI * PI);
    Ok(
        IneqReport::new(FunctionalId::Wirtinger, Terms::new(lhs, None, rhs), q.source_m, q.is_exact)
            .heuristic(!q.absolutely_continuous),
    )
}
