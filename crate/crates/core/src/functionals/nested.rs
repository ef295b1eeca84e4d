//! n-th order integrals and the higher-order Opial bounds built on them.
//!
//! These use strict inequalities throughout, without half-tie weights: the integration
//! regions are open intervals, so ties contribute nothing.

use crate::dist::QuantizedModel;
use crate::error::{Error, Result};
use crate::report::{FunctionalId, IneqReport, Terms};
use crate::summation::{self, NeumaierSum};

use super::opial::{check_len, strict_prefix};

/// Highest order accepted by default; beyond it the terms vanish in double precision for
/// moderate resolutions.
pub const DEFAULT_ORDER_CAP: usize = 6;

/// `n!` as a float.
pub fn factorial_f64(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `I_n` at every node: `I_1(x_i) = Σ_{x_j<x_i} p_j ψ_j`, `I_k(x_i) = Σ_{x_j<x_i} p_j I_{k-1}(x_j)`.
pub fn nested_integral(q: &QuantizedModel, psi: &[f64], n: usize) -> Result<Vec<f64>> {
    nested_integral_capped(q, psi, n, DEFAULT_ORDER_CAP)
}

pub fn nested_integral_capped(q: &QuantizedModel, psi: &[f64], n: usize, cap: usize) -> Result<Vec<f64>> {
    if n == 0 || n > cap {
        return Err(Error::InvalidOrder { n, cap });
    }
    check_len(q, psi, "psi")?;
    let mut cur = psi.to_vec();
    for _ in 0..n {
        cur = strict_prefix(q.mass(), &cur);
    }
    Ok(cur)
}

/// `E|I_n(X) ψ(X)| <= E ψ² / (n+1)!`, with the absolute-value relaxation as `middle`.
///
/// With atoms the bound is strict: ties fall outside every strictly ordered region.
pub fn theorem2_terms(q: &QuantizedModel, psi: &[f64], n: usize) -> Result<IneqReport> {
    theorem2_terms_capped(q, psi, n, DEFAULT_ORDER_CAP)
}

pub fn theorem2_terms_capped(q: &QuantizedModel, psi: &[f64], n: usize, cap: usize) -> Result<IneqReport> {
    let i_n = nested_integral_capped(q, psi, n, cap)?;
    let abs: Vec<f64> = psi.iter().map(|v| v.abs()).collect();
    let i_n_abs = nested_integral_capped(q, &abs, n, cap)?;
    let p = q.mass();

    let lhs = summation::sum((0..p.len()).map(|i| p[i] * (i_n[i] * psi[i]).abs()));
    let middle = summation::sum((0..p.len()).map(|i| p[i] * abs[i] * i_n_abs[i]));
    let rhs = summation::sum((0..p.len()).map(|i| p[i] * psi[i] * psi[i])) / factorial_f64(n + 1);

    Ok(
        IneqReport::new(FunctionalId::Thm2, Terms::new(lhs, Some(middle), rhs), q.source_m, q.is_exact)
            .with_order(n)
            .flag("equality_possible_in_continuous_limit", q.absolutely_continuous),
    )
}

/// The atom-corrected second-order bound
/// `6 E[J(X)|ψ(X)|] + 3 E[J_D(X)|ψ(X)|] <= E[ψ²(X)(1 - p_F(X)²)]`.
///
/// Extra terms carry the three left-hand addends and the triple-tie mass term
/// `w = Σ p_i³ ψ_i²` subtracted on the right.
pub fn theorem3_terms(q: &QuantizedModel, psi: &[f64]) -> Result<IneqReport> {
    check_len(q, psi, "psi")?;
    let p = q.mass();
    let abs: Vec<f64> = psi.iter().map(|v| v.abs()).collect();

    // J(x_i) = Σ_{j<i} p_j Σ_{k<j} p_k |ψ_k|
    let inner = strict_prefix(p, &abs);
    let j = strict_prefix(p, &inner);
    // Σ_{j<i} p_j² |ψ_j|
    let tied: Vec<f64> = p.iter().zip(&abs).map(|(pj, a)| pj * a).collect();
    let tie_below = strict_prefix(p, &tied);

    let mut six_u = NeumaierSum::new();
    let mut three_v1 = NeumaierSum::new();
    let mut three_v2 = NeumaierSum::new();
    let mut rhs = NeumaierSum::new();
    let mut w = NeumaierSum::new();
    for i in 0..p.len() {
        let outer = p[i] * abs[i];
        six_u.add(6.0 * outer * j[i]);
        three_v1.add(3.0 * outer * tie_below[i]);
        three_v2.add(3.0 * outer * p[i] * inner[i]);
        rhs.add(p[i] * psi[i] * psi[i] * (1.0 - p[i] * p[i]));
        w.add(p[i] * p[i] * p[i] * psi[i] * psi[i]);
    }
    let lhs = summation::sum([six_u.value(), three_v1.value(), three_v2.value()]);
    let terms = Terms::new(lhs, None, rhs.value())
        .with("six_u", six_u.value())
        .with("three_v1", three_v1.value())
        .with("three_v2", three_v2.value())
        .with("w", w.value());
    Ok(IneqReport::new(FunctionalId::Thm3, terms, q.source_m, q.is_exact))
}
