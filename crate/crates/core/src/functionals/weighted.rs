use serde::Serialize;

use crate::dist::{make_uniform_interval, quantize, QuantizedModel};
use crate::error::{Error, Result};
use crate::node_fn::NodeFunction;
use crate::report::{Direction, FunctionalId, IneqReport, Terms};
use crate::summation;

use super::opial::{check_len, half_tie};

/// Opial chain with a nonnegative weight `χ` on the outer variable.
///
/// `rhs = ½ Σ p_i ψ_i² [χ_i (C_i + ½p_i) + R_i]` where, for `Below`, `C_i = Σ_{j<i} p_j` and
/// `R_i = Σ_{j>i} p_j χ_j + ½ p_i χ_i`. Also reports `monotone_bound = ½ Σ p_i ψ_i² χ_i`, which
/// dominates `rhs` when the `monotone_applicable` flag is set.
pub fn weighted_opial_terms(q: &QuantizedModel, psi: &[f64], chi: &[f64], dir: Direction) -> Result<IneqReport> {
    check_len(q, psi, "psi")?;
    check_len(q, chi, "chi")?;
    if let Some((index, &value)) = chi.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeWeight { index, value });
    }
    let p = q.mass();
    let t = half_tie(p, psi, dir);
    let abs: Vec<f64> = psi.iter().map(|v| v.abs()).collect();
    let t_abs = half_tie(p, &abs, dir);
    let own = half_tie(p, &vec![1.0; p.len()], dir);
    let reflected = half_tie(p, chi, dir.flip());

    let lhs = summation::sum((0..p.len()).map(|i| p[i] * (t[i] * psi[i]).abs() * chi[i]));
    let middle = summation::sum((0..p.len()).map(|i| p[i] * abs[i] * chi[i] * t_abs[i]));
    let rhs = 0.5 * summation::sum((0..p.len()).map(|i| p[i] * psi[i] * psi[i] * (chi[i] * own[i] + reflected[i])));
    let monotone = 0.5 * summation::sum((0..p.len()).map(|i| p[i] * psi[i] * psi[i] * chi[i]));

    let applicable = chi.windows(2).all(|w| match dir {
        Direction::Below => w[1] <= w[0],
        Direction::Above => w[1] >= w[0],
    });
    let id = match dir {
        Direction::Below => FunctionalId::WeightedLower,
        Direction::Above => FunctionalId::WeightedUpper,
    };
    let terms = Terms::new(lhs, Some(middle), rhs).with("monotone_bound", monotone);
    Ok(IneqReport::new(id, terms, q.source_m, q.is_exact).flag("monotone_applicable", applicable))
}

/// The weighted chain on `U(0,1)` with `χ(x) = x^p`, next to the classical non-sharp bound
/// `Eψ² / (2√(p+1))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TroyComparison {
    pub p_exp: f64,
    pub m: usize,
    pub our_lhs: f64,
    pub our_rhs: f64,
    pub troy_rhs: f64,
    /// The weighted bound is attained for this `ψ`.
    pub our_tight: bool,
    /// `our_lhs` stays strictly below the classical bound.
    pub troy_strict: bool,
}

pub fn troy_comparison(p_exp: f64, psi: &NodeFunction, m: usize) -> Result<TroyComparison> {
    if !p_exp.is_finite() || p_exp <= -1.0 {
        return Err(Error::InvalidExponent(p_exp));
    }
    let u = make_uniform_interval(0.0, 1.0)?;
    let q = quantize(&u, m)?;
    let psi = psi.resolve(&q)?;
    let chi: Vec<f64> = q.support().iter().map(|x| x.powf(p_exp)).collect();
    let report = weighted_opial_terms(&q, &psi, &chi, Direction::Below)?;

    let second = summation::sum(q.mass().iter().zip(&psi).map(|(p, v)| p * v * v));
    let troy_rhs = second / (2.0 * (p_exp + 1.0).sqrt());
    let gap = troy_rhs - report.terms.lhs;
    Ok(TroyComparison {
        p_exp,
        m,
        our_lhs: report.terms.lhs,
        our_rhs: report.terms.rhs,
        troy_rhs,
        our_tight: report.equality,
        troy_strict: gap > report.tol * troy_rhs.abs().max(1.0),
    })
}
