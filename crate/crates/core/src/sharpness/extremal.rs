use serde::Serialize;

use crate::dist::{make_uniform_interval, quantize, QuantizedModel};
use crate::error::{Error, Result};
use crate::functionals::{half_tie, strict_prefix};
use crate::report::Direction;
use crate::summation::{self, NeumaierSum};

/// Outcome of an ascent or eigen-iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalResult {
    pub psi_star: Vec<f64>,
    pub ratio_star: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(iteration, ratio)`; nondecreasing.
    pub trace: Vec<(usize, f64)>,
}

const ASCENT_CAP: usize = 10_000;
const ASCENT_TOL: f64 = 1e-14;

fn opial_ratio(p: &[f64], a: &[f64], dir: Direction) -> f64 {
    let t = half_tie(p, a, dir);
    let middle = summation::sum((0..p.len()).map(|i| p[i] * a[i] * t[i]));
    let rhs = 0.5 * summation::sum((0..p.len()).map(|i| p[i] * a[i] * a[i]));
    middle / rhs
}

fn normalize(p: &[f64], a: &mut [f64]) {
    let norm = summation::sum(p.iter().zip(a.iter()).map(|(p, v)| p * v * v)).sqrt();
    a.iter_mut().for_each(|v| *v /= norm);
}

/// Maximize `middle / rhs` of the Opial chain over `ψ >= 0` with `Eψ² = 1`.
///
/// Multiplicative ascent `ψ_i ← ψ_i (G_i / (r ψ_i))^θ` with `G = T⁻ψ + T⁺ψ` the gradient direction
/// and `r` the current ratio; `θ` starts at ½ and is halved until the step improves.
pub fn maximize_ratio_opial(q: &QuantizedModel, dir: Direction) -> ExtremalResult {
    let p = q.mass();
    let m = p.len();
    let mut a: Vec<f64> = (0..m).map(|i| 1.0 + i as f64 / m as f64).collect();
    normalize(p, &mut a);
    let mut ratio = opial_ratio(p, &a, dir);
    let mut trace = vec![(0, ratio)];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < ASCENT_CAP {
        iterations += 1;
        let down = half_tie(p, &a, Direction::Below);
        let up = half_tie(p, &a, Direction::Above);
        let mut theta = 0.5;
        let mut accepted = None;
        while theta > 1e-6 {
            let mut next: Vec<f64> = (0..m)
                .map(|i| a[i] * ((down[i] + up[i]) / (ratio * a[i])).powf(theta))
                .collect();
            normalize(p, &mut next);
            let r = opial_ratio(p, &next, dir);
            if r >= ratio {
                accepted = Some((next, r));
                break;
            }
            theta *= 0.5;
        }
        let Some((next, r)) = accepted else {
            converged = true;
            break;
        };
        let change = r - ratio;
        a = next;
        ratio = r;
        trace.push((iterations, ratio));
        if change <= ASCENT_TOL {
            converged = true;
            break;
        }
    }
    ExtremalResult {
        psi_star: a,
        ratio_star: ratio,
        iterations,
        converged,
        trace,
    }
}

/// Best discrete Wirtinger constant on `U(0,1)` atomized at `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WirtingerConstant {
    pub m: usize,
    /// `max Σ p_i (Σ_{j<i} p_j ψ_j)² / Σ p_i ψ_i²` over zero-mean `ψ`.
    pub c_m: f64,
    pub psi_star: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖P(M - c_m D)ψ*‖ / ‖Dψ*‖`, with `P` the projection onto `pᵀv = 0`.
    pub residual: f64,
    pub trace: Vec<(usize, f64)>,
}

pub const POWER_ITERATION_CAP: usize = 100_000;
const POWER_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-10;

/// `ψ ↦ D⁻¹ AᵀDA ψ` with `A` the strict cumulative operator; returns `(Aψ, D⁻¹AᵀDAψ)`.
fn apply(p: &[f64], psi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let y = strict_prefix(p, psi);
    let mut z = vec![0.0; p.len()];
    let mut acc = NeumaierSum::new();
    for j in (0..p.len()).rev() {
        z[j] = acc.value();
        acc.add(p[j] * y[j]);
    }
    (y, z)
}

fn center(p: &[f64], v: &mut [f64]) {
    let mean = summation::dot(p, v);
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Projected power iteration for the largest generalized eigenvalue of `(AᵀDA, D)` on
/// `{pᵀψ = 0}`.
pub fn wirtinger_best_constant(m: usize) -> Result<WirtingerConstant> {
    if m < 2 {
        return Err(Error::Invalid(format!("the zero-mean subspace is trivial at m = {m}; need m >= 2")));
    }
    let q = quantize(&make_uniform_interval(0.0, 1.0)?, m)?;
    wirtinger_power_iteration(q.mass(), POWER_ITERATION_CAP)
}

pub(crate) fn wirtinger_power_iteration(p: &[f64], cap: usize) -> Result<WirtingerConstant> {
    let m = p.len();
    let mut psi: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
    center(p, &mut psi);
    normalize(p, &mut psi);

    let rayleigh = |psi: &[f64], y: &[f64]| {
        summation::sum((0..m).map(|i| p[i] * y[i] * y[i])) / summation::sum((0..m).map(|i| p[i] * psi[i] * psi[i]))
    };
    let (y, mut z) = apply(p, &psi);
    let mut c = rayleigh(&psi, &y);
    let mut trace = vec![(0, c)];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;

    while iterations < cap {
        iterations += 1;
        center(p, &mut z);
        normalize(p, &mut z);
        psi = z;
        let (y, next) = apply(p, &psi);
        let c_new = rayleigh(&psi, &y);
        z = next;
        let change = c_new - c;
        c = c_new;
        trace.push((iterations, c));

        // g = D(Op ψ - c ψ), projected onto pᵀg = 0 in the Euclidean sense.
        let g: Vec<f64> = (0..m).map(|i| p[i] * (z[i] - c * psi[i])).collect();
        let pp = summation::dot(p, p);
        let shift = summation::dot(p, &g) / pp;
        let proj = summation::sum(g.iter().zip(p).map(|(g, p)| (g - shift * p).powi(2))).sqrt();
        let dpsi = summation::sum(psi.iter().zip(p).map(|(v, p)| (v * p).powi(2))).sqrt();
        residual = proj / dpsi;

        if change.abs() <= POWER_TOL * c.abs().max(f64::MIN_POSITIVE) && residual <= RESIDUAL_TOL {
            return Ok(WirtingerConstant {
                m,
                c_m: c,
                psi_star: psi,
                iterations,
                converged: true,
                residual,
                trace,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations,
        last_change: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{make_discrete, uniform_integers};
    use crate::node_fn::NodeFunction;
    use std::f64::consts::PI;

    fn closed_form(m: usize) -> f64 {
        let s = (PI / (2.0 * m as f64)).sin();
        1.0 / (4.0 * (m * m) as f64 * s * s)
    }

    #[test]
    fn ascent_finds_constant() {
        let q = quantize(&uniform_integers(10).unwrap(), 1).unwrap();
        let r = maximize_ratio_opial(&q, Direction::Below);
        assert!(r.ratio_star >= 1.0 - 1e-8, "{}", r.ratio_star);
        let (lo, hi) = r.psi_star.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        assert!((hi - lo) / hi < 1e-4);
        assert!(r.trace.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn ascent_trivial_and_skewed() {
        let one = quantize(&uniform_integers(1).unwrap(), 1).unwrap();
        let r = maximize_ratio_opial(&one, Direction::Above);
        assert!((r.ratio_star - 1.0).abs() < 1e-15);

        let skew = quantize(&make_discrete(&[0.0, 1.0], &[0.9, 0.1]).unwrap(), 1).unwrap();
        let r = maximize_ratio_opial(&skew, Direction::Below);
        assert!(r.ratio_star >= 1.0 - 1e-8);
        assert!((r.psi_star[0] - r.psi_star[1]).abs() < 1e-4);
    }

    #[test]
    fn two_point_constant() {
        let w = wirtinger_best_constant(2).unwrap();
        assert!((w.c_m - 0.125).abs() < 1e-15);
        assert!(wirtinger_best_constant(1).is_err());
    }

    #[test]
    fn matches_closed_form() {
        for m in [3usize, 10, 100] {
            let w = wirtinger_best_constant(m).unwrap();
            assert!((w.c_m - closed_form(m)).abs() < 1e-12 * closed_form(m), "m={m}: {}", w.c_m);
            assert!(w.residual <= 1e-8);
            assert!(w.trace.windows(2).all(|t| t[1].1 >= t[0].1 - 1e-15));
        }
    }

    #[test]
    fn eigenvector_is_cosine() {
        let m = 400;
        let w = wirtinger_best_constant(m).unwrap();
        let q = quantize(&make_uniform_interval(0.0, 1.0).unwrap(), m).unwrap();
        let cos = NodeFunction::CosPiF.resolve(&q).unwrap();
        let dot: f64 = w.psi_star.iter().zip(&cos).map(|(a, b)| a * b).sum();
        let na: f64 = w.psi_star.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nb: f64 = cos.iter().map(|b| b * b).sum::<f64>().sqrt();
        assert!((dot / (na * nb)).abs() > 0.999_999);
    }
}
