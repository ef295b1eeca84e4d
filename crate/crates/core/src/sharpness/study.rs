use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{make_uniform_interval, quantize};
use crate::error::{Error, Result};
use crate::functionals::{corollary_split, factorial_f64, opial_terms, theorem2_terms_capped, theorem3_terms};
use crate::node_fn::NodeFunction;
use crate::report::{Direction, FunctionalId};

use super::extremal::wirtinger_best_constant;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub m: usize,
    pub value: f64,
    /// `|value - limit|`.
    pub error: f64,
    /// `log(e_prev / e) / log(m / m_prev)`; absent on the first row.
    pub local_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub functional: FunctionalId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub limit: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `-log error` against `log m`, over rows with nonzero error.
    pub fitted_order: Option<f64>,
}

impl ConvergenceTable {
    /// Columns `m,value,error,fitted_order`; the table's fitted order repeats on every row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,value,error,fitted_order\n");
        let order = self.fitted_order.map(|o| format!("{o:.17e}")).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(out, "{},{:.17e},{:.17e},{}", r.m, r.value, r.error, order);
        }
        out
    }
}

/// Errors below this are treated as exact and left out of the order fit.
const EXACT: f64 = 1e-14;

fn fitted_order(rows: &[ConvergenceRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error > EXACT)
        .map(|r| ((r.m as f64).ln(), -r.error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Refinement study on `U(0,1)` with `ψ ≡ 1` (the Wirtinger row uses the best constant instead).
///
/// Values: `thm1-*`, `corollary` (split at ½) and `thm3` report the ratio (limit 1); `thm2` reports
/// `lhs · (n+1)!` (limit 1); `wirtinger` reports `c_m` (limit `1/π²`).
pub fn convergence_study(id: FunctionalId, n: Option<usize>, grids: &[usize]) -> Result<ConvergenceTable> {
    if grids.is_empty() {
        return Err(Error::Invalid("grid list is empty".into()));
    }
    if grids.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("grids must be strictly increasing".into()));
    }
    let limit = match id {
        FunctionalId::Wirtinger => 1.0 / (PI * PI),
        FunctionalId::Thm1Lower
        | FunctionalId::Thm1Upper
        | FunctionalId::Corollary
        | FunctionalId::Thm2
        | FunctionalId::Thm3 => 1.0,
        other => return Err(Error::Unsupported(format!("no refinement study for '{other}'"))),
    };
    let order = n.unwrap_or(1);
    let u = make_uniform_interval(0.0, 1.0)?;

    let values: Vec<f64> = grids
        .par_iter()
        .map(|&m| -> Result<f64> {
            if id == FunctionalId::Wirtinger {
                return Ok(wirtinger_best_constant(m)?.c_m);
            }
            if id == FunctionalId::Corollary {
                return Ok(corollary_split(&u, &NodeFunction::constant(1.0), 0.5, m)?.ratio);
            }
            let q = quantize(&u, m)?;
            let ones = vec![1.0; q.len()];
            Ok(match id {
                FunctionalId::Thm1Lower => opial_terms(&q, &ones, Direction::Below)?.ratio,
                FunctionalId::Thm1Upper => opial_terms(&q, &ones, Direction::Above)?.ratio,
                FunctionalId::Thm2 => {
                    theorem2_terms_capped(&q, &ones, order, order.max(crate::functionals::DEFAULT_ORDER_CAP))?
                        .terms
                        .lhs
                        * factorial_f64(order + 1)
                }
                _ => theorem3_terms(&q, &ones)?.ratio,
            })
        })
        .collect::<Result<_>>()?;

    let mut rows: Vec<ConvergenceRow> = grids
        .iter()
        .zip(values)
        .map(|(&m, value)| ConvergenceRow {
            m,
            value,
            error: (value - limit).abs(),
            local_order: None,
        })
        .collect();
    for k in 1..rows.len() {
        let (prev, cur) = (&rows[k - 1], &rows[k]);
        if prev.error > EXACT && cur.error > EXACT {
            rows[k].local_order = Some((prev.error / cur.error).ln() / (cur.m as f64 / prev.m as f64).ln());
        }
    }
    Ok(ConvergenceTable {
        functional: id,
        n: (id == FunctionalId::Thm2).then_some(order),
        limit,
        fitted_order: fitted_order(&rows),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thm1_is_exact_at_every_resolution() {
        let t = convergence_study(FunctionalId::Thm1Lower, None, &[1, 7, 64]).unwrap();
        assert!(t.rows.iter().all(|r| r.error < 1e-14));
        assert_eq!(t.fitted_order, None);
    }

    #[test]
    fn thm2_first_order() {
        let t = convergence_study(FunctionalId::Thm2, Some(2), &[16, 64, 256, 1024]).unwrap();
        assert!(t.rows[0].error >= 32.0 * t.rows[3].error);
        let order = t.fitted_order.unwrap();
        assert!((0.8..=1.2).contains(&order), "{order}");
        assert!(t.rows.iter().all(|r| r.value <= 1.0));
    }

    #[test]
    fn wirtinger_decreases() {
        let t = convergence_study(FunctionalId::Wirtinger, None, &[100, 400, 1600]).unwrap();
        assert!(t.rows.windows(2).all(|w| w[1].error < w[0].error));
        assert!(t.rows.iter().all(|r| r.value > t.limit));
    }

    #[test]
    fn csv_shape() {
        let t = convergence_study(FunctionalId::Thm2, Some(1), &[4, 8]).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "m,value,error,fitted_order");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("4,"));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(convergence_study(FunctionalId::Thm2, Some(1), &[8, 4]).is_err());
        assert!(convergence_study(FunctionalId::Thm2, Some(1), &[]).is_err());
        assert!(convergence_study(FunctionalId::O15, None, &[4]).is_err());
    }
}
