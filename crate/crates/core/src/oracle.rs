//! Brute-force reference evaluation by enumeration over index tuples.
//!
//! Nothing here reuses the prefix passes of [`crate::functionals`]: ties are decided by comparing
//! support values, indicator weights are spelled out, and accumulation is plain `+=`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dist::QuantizedModel;
use crate::error::{Error, Result};
use crate::report::{FunctionalId, Terms};

/// Default cap on summand evaluations.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Inputs for [`enumerate_functional`].
#[derive(Debug, Clone)]
pub struct OracleRequest<'a> {
    pub functional: FunctionalId,
    pub psi: &'a [f64],
    pub chi: Option<&'a [f64]>,
    pub n: Option<usize>,
    pub c: Option<f64>,
    pub project_mean: bool,
    pub budget: u128,
}

impl<'a> OracleRequest<'a> {
    pub fn new(functional: FunctionalId, psi: &'a [f64]) -> Self {
        Self {
            functional,
            psi,
            chi: None,
            n: None,
            c: None,
            project_mean: false,
            budget: DEFAULT_BUDGET,
        }
    }
}

fn check_budget(m: usize, arity: u32, budget: u128) -> Result<()> {
    let required = (m as u128).checked_pow(arity).unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(())
}

type TieWeight = fn(f64, f64) -> f64;

/// `1[y < x] + ½ 1[y = x]`.
fn below(y: f64, x: f64) -> f64 {
    if y < x {
        1.0
    } else if y == x {
        0.5
    } else {
        0.0
    }
}

/// `1[y > x] + ½ 1[y = x]`.
fn above(y: f64, x: f64) -> f64 {
    below(x, y)
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Same named terms as the corresponding fast evaluator, computed by literal summation.
///
/// `corollary` treats the model's atoms as the distribution and splits them at `c`.
pub fn enumerate_functional(q: &QuantizedModel, req: &OracleRequest<'_>) -> Result<Terms> {
    let x = q.support();
    let p = q.mass();
    let psi = req.psi;
    let m = x.len();
    if psi.len() != m {
        return Err(Error::LengthMismatch {
            what: "psi",
            expected: m,
            found: psi.len(),
        });
    }
    let id = req.functional;
    match id {
        FunctionalId::Thm1Lower | FunctionalId::Thm1Upper => {
            check_budget(m, 2, req.budget)?;
            let w = if id == FunctionalId::Thm1Lower { below } else { above };
            let mut lhs = 0.0;
            let mut middle = 0.0;
            let mut rhs = 0.0;
            for i in 0..m {
                let mut inner = 0.0;
                for j in 0..m {
                    inner += p[j] * psi[j] * w(x[j], x[i]);
                    middle += p[i] * p[j] * (psi[i] * psi[j]).abs() * w(x[j], x[i]);
                }
                lhs += p[i] * (inner * psi[i]).abs();
                rhs += 0.5 * p[i] * psi[i] * psi[i];
            }
            Ok(Terms::new(lhs, Some(middle), rhs))
        }
        FunctionalId::Corollary => {
            check_budget(m, 2, req.budget)?;
            let c = req.c.ok_or_else(|| Error::Invalid("corollary needs a split point c".into()))?;
            let mut pl = 0.0;
            for i in 0..m {
                if x[i] <= c {
                    pl += p[i];
                }
            }
            if pl <= 0.0 || pl >= 1.0 {
                return Err(Error::EmptyConditional { p: pl });
            }
            let pu = 1.0 - pl;
            let (mut lower_lhs, mut upper_lhs, mut middle, mut rhs) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..m {
                let low_i = x[i] <= c;
                let (pi, wdir): (f64, fn(f64, f64) -> f64) = if low_i { (p[i] / pl, below) } else { (p[i] / pu, above) };
                let mut inner = 0.0;
                for j in 0..m {
                    if (x[j] <= c) != low_i {
                        continue;
                    }
                    let pj = if low_i { p[j] / pl } else { p[j] / pu };
                    inner += pj * psi[j] * wdir(x[j], x[i]);
                    middle += pi * pj * (psi[i] * psi[j]).abs() * below(x[j], x[i]);
                }
                let term = pi * (inner * psi[i]).abs();
                if low_i {
                    lower_lhs += term;
                } else {
                    upper_lhs += term;
                }
                rhs += 0.5 * pi * psi[i] * psi[i];
            }
            Ok(Terms::new(lower_lhs + upper_lhs, Some(middle), rhs)
                .with("p", pl)
                .with("lower_lhs", lower_lhs)
                .with("upper_lhs", upper_lhs))
        }
        FunctionalId::Thm2 => {
            let n = req.n.unwrap_or(1);
            if n == 0 {
                return Err(Error::InvalidOrder { n, cap: usize::MAX });
            }
            check_budget(m, n as u32 + 1, req.budget)?;
            let mut lhs = 0.0;
            let mut middle = 0.0;
            let mut rhs = 0.0;
            let mut idx = vec![0usize; n];
            for i in 0..m {
                let mut signed = 0.0;
                let mut absolute = 0.0;
                idx.iter_mut().for_each(|k| *k = 0);
                loop {
                    // x_{idx[0]} < x_{idx[1]} < ... < x_{idx[n-1]} < x_i
                    let mut ordered = x[idx[n - 1]] < x[i];
                    for k in 1..n {
                        ordered = ordered && x[idx[k - 1]] < x[idx[k]];
                    }
                    if ordered {
                        let mut weight = 1.0;
                        for &k in &idx {
                            weight *= p[k];
                        }
                        signed += weight * psi[idx[0]];
                        absolute += weight * psi[idx[0]].abs();
                    }
                    let mut pos = 0;
                    while pos < n {
                        idx[pos] += 1;
                        if idx[pos] < m {
                            break;
                        }
                        idx[pos] = 0;
                        pos += 1;
                    }
                    if pos == n {
                        break;
                    }
                }
                lhs += p[i] * (signed * psi[i]).abs();
                middle += p[i] * psi[i].abs() * absolute;
                rhs += p[i] * psi[i] * psi[i];
            }
            let mut fact = 1.0;
            for k in 2..=(n + 1) {
                fact *= k as f64;
            }
            Ok(Terms::new(lhs, Some(middle), rhs / fact))
        }
        FunctionalId::Thm3 => {
            check_budget(m, 3, req.budget)?;
            let (mut u, mut v1, mut v2, mut w, mut rhs) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..m {
                let mut triple_tie = 0.0;
                for j in 0..m {
                    for k in 0..m {
                        let weight = p[i] * p[j] * p[k];
                        u += weight * psi[i].abs() * psi[k].abs() * indicator(x[k] < x[j] && x[j] < x[i]);
                        v1 += weight * psi[i].abs() * psi[j].abs() * indicator(x[k] == x[j] && x[j] < x[i]);
                        v2 += weight * psi[i].abs() * psi[j].abs() * indicator(x[j] < x[i] && x[i] == x[k]);
                        let all = indicator(x[i] == x[j] && x[j] == x[k]);
                        w += weight * psi[i] * psi[i] * all;
                        triple_tie += p[j] * p[k] * all;
                    }
                }
                rhs += p[i] * psi[i] * psi[i] * (1.0 - triple_tie);
            }
            Ok(Terms::new(6.0 * u + 3.0 * v1 + 3.0 * v2, None, rhs)
                .with("six_u", 6.0 * u)
                .with("three_v1", 3.0 * v1)
                .with("three_v2", 3.0 * v2)
                .with("w", w))
        }
        FunctionalId::WeightedLower | FunctionalId::WeightedUpper => {
            check_budget(m, 2, req.budget)?;
            let ones = vec![1.0; m];
            let chi = req.chi.unwrap_or(&ones);
            if chi.len() != m {
                return Err(Error::LengthMismatch {
                    what: "chi",
                    expected: m,
                    found: chi.len(),
                });
            }
            let (w, w_ref): (TieWeight, TieWeight) = if id == FunctionalId::WeightedLower {
                (below, above)
            } else {
                (above, below)
            };
            let (mut lhs, mut middle, mut rhs, mut monotone) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..m {
                let mut inner = 0.0;
                for j in 0..m {
                    inner += p[j] * psi[j] * w(x[j], x[i]);
                    middle += p[i] * p[j] * (psi[i] * psi[j]).abs() * chi[i] * w(x[j], x[i]);
                    rhs += 0.5 * p[i] * p[j] * psi[i] * psi[i] * (chi[i] * w(x[j], x[i]) + chi[j] * w_ref(x[j], x[i]));
                }
                lhs += p[i] * (inner * psi[i]).abs() * chi[i];
                monotone += 0.5 * p[i] * psi[i] * psi[i] * chi[i];
            }
            Ok(Terms::new(lhs, Some(middle), rhs).with("monotone_bound", monotone))
        }
        FunctionalId::Wirtinger => {
            check_budget(m, 2, req.budget)?;
            let mut mean = 0.0;
            if req.project_mean {
                for i in 0..m {
                    mean += p[i] * psi[i];
                }
            }
            let (mut lhs, mut rhs) = (0.0, 0.0);
            for i in 0..m {
                let mut s = 0.0;
                for j in 0..m {
                    if x[j] < x[i] {
                        s += p[j] * (psi[j] - mean);
                    }
                }
                lhs += p[i] * s * s;
                rhs += p[i] * (psi[i] - mean) * (psi[i] - mean);
            }
            Ok(Terms::new(lhs, None, rhs / (PI * PI)))
        }
        FunctionalId::O9_1 | FunctionalId::O9_2 | FunctionalId::O15 | FunctionalId::O18 | FunctionalId::Rtwo => {
            check_budget(m, 2, req.budget)?;
            let a = psi;
            let nf = m as f64;
            let mut lhs = 0.0;
            let mut sq = 0.0;
            for i in 0..m {
                let mut inner = 0.0;
                for j in 0..m {
                    inner += match id {
                        FunctionalId::O9_1 => a[i] * a[j] * indicator(j <= i),
                        FunctionalId::O9_2 => (a[i] * a[j]).abs() * indicator(j <= i),
                        FunctionalId::O15 => a[i] * a[j] * (indicator(j < i) + 0.5 * indicator(j == i)),
                        FunctionalId::O18 => a[i] * a[j] * indicator(j < i),
                        _ => 6.0 * (i as f64 - j as f64) * a[i].abs() * a[j].abs() * indicator(j < i),
                    };
                }
                lhs += inner.abs();
                sq += a[i] * a[i];
            }
            let rhs = match id {
                FunctionalId::O9_1 | FunctionalId::O9_2 => (nf + 1.0) / 2.0 * sq,
                FunctionalId::O15 => nf / 4.0 * sq,
                FunctionalId::O18 => 0.5 * m.div_ceil(2) as f64 * sq,
                _ => (nf * nf - 1.0) * sq,
            };
            Ok(Terms::new(lhs, None, rhs))
        }
        other => Err(Error::Unsupported(format!("no oracle for '{other}'"))),
    }
}

/// Masses of the order regions of three i.i.d. draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionMasses {
    /// All three distinct.
    pub u: f64,
    /// A tied pair below the third.
    pub v1: f64,
    /// A tied pair above the third.
    pub v2: f64,
    /// All three equal.
    pub w: f64,
}

impl PartitionMasses {
    pub fn total(&self) -> f64 {
        self.u + self.v1 + self.v2 + self.w
    }
}

pub fn partition_masses(q: &QuantizedModel, budget: u128) -> Result<PartitionMasses> {
    let x = q.support();
    let p = q.mass();
    let m = x.len();
    check_budget(m, 3, budget)?;
    let mut out = PartitionMasses {
        u: 0.0,
        v1: 0.0,
        v2: 0.0,
        w: 0.0,
    };
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let weight = p[a] * p[b] * p[c];
                let (xa, xb, xc) = (x[a], x[b], x[c]);
                if xa == xb && xb == xc {
                    out.w += weight;
                } else if xa != xb && xb != xc && xa != xc {
                    out.u += weight;
                } else {
                    // exactly one tied pair; compare it with the odd one out
                    let (pair, odd) = if xa == xb {
                        (xa, xc)
                    } else if xb == xc {
                        (xb, xa)
                    } else {
                        (xa, xb)
                    };
                    if pair < odd {
                        out.v1 += weight;
                    } else {
                        out.v2 += weight;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The four addends of the second-order region decomposition of `(E|ψ|)²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Two3Check {
    /// `6 ∫_{x0<x1<x2} |ψ(x0)ψ(x2)|`.
    pub six_u: f64,
    /// `3 ∫_{x0=x1<x2} |ψ(x0)ψ(x2)|`.
    pub three_v1: f64,
    /// `3 ∫_{x0<x1=x2} |ψ(x0)ψ(x2)|`.
    pub three_v2: f64,
    /// `∫_{x0=x1=x2} |ψ(x0)ψ(x2)|`.
    pub w: f64,
    pub addend_sum: f64,
    /// `∫ |ψ(x0)ψ(x2)|` restricted to `U₃`, `V₁`, `V₂`, `W` without symmetry factors.
    pub region_u: f64,
    pub region_v1: f64,
    pub region_v2: f64,
    pub region_w: f64,
    pub region_sum: f64,
    /// `(E|ψ|)²`.
    pub target: f64,
    /// `|addend_sum - target| / max(1, target)`.
    pub rel_err: f64,
    /// `rel_err <= tol`.
    pub reconstructs: bool,
}

pub fn check_two3_decomposition(q: &QuantizedModel, psi: &[f64], tol: f64, budget: u128) -> Result<Two3Check> {
    let x = q.support();
    let p = q.mass();
    let m = x.len();
    if psi.len() != m {
        return Err(Error::LengthMismatch {
            what: "psi",
            expected: m,
            found: psi.len(),
        });
    }
    check_budget(m, 3, budget)?;
    let (mut u, mut v1, mut v2, mut w) = (0.0, 0.0, 0.0, 0.0);
    let (mut ru, mut rv1, mut rv2, mut rw) = (0.0, 0.0, 0.0, 0.0);
    let mut mean_abs = 0.0;
    for a in 0..m {
        mean_abs += p[a] * psi[a].abs();
        for b in 0..m {
            for c in 0..m {
                let val = p[a] * p[b] * p[c] * (psi[a] * psi[c]).abs();
                let (x0, x1, x2) = (x[a], x[b], x[c]);
                u += val * indicator(x0 < x1 && x1 < x2);
                v1 += val * indicator(x0 == x1 && x1 < x2);
                v2 += val * indicator(x0 < x1 && x1 == x2);
                w += val * indicator(x0 == x1 && x1 == x2);
                if x0 == x1 && x1 == x2 {
                    rw += val;
                } else if x0 != x1 && x1 != x2 && x0 != x2 {
                    ru += val;
                } else {
                    let (pair, odd) = if x0 == x1 {
                        (x0, x2)
                    } else if x1 == x2 {
                        (x1, x0)
                    } else {
                        (x0, x1)
                    };
                    if pair < odd {
                        rv1 += val;
                    } else {
                        rv2 += val;
                    }
                }
            }
        }
    }
    let target = mean_abs * mean_abs;
    let addend_sum = 6.0 * u + 3.0 * v1 + 3.0 * v2 + w;
    let rel_err = (addend_sum - target).abs() / target.max(1.0);
    Ok(Two3Check {
        six_u: 6.0 * u,
        three_v1: 3.0 * v1,
        three_v2: 3.0 * v2,
        w,
        addend_sum,
        region_u: ru,
        region_v1: rv1,
        region_v2: rv2,
        region_w: rw,
        region_sum: ru + rv1 + rv2 + rw,
        target,
        rel_err,
        reconstructs: rel_err <= tol,
    })
}

/// `∫ |ψ(x0)ψ(x2)| 1[x_{π(0)} < x_{π(1)} < x_{π(2)}]` for every permutation `π` of `{0,1,2}`.
pub fn permutation_region_sums(q: &QuantizedModel, psi: &[f64], budget: u128) -> Result<Vec<([usize; 3], f64)>> {
    let x = q.support();
    let p = q.mass();
    let m = x.len();
    if psi.len() != m {
        return Err(Error::LengthMismatch {
            what: "psi",
            expected: m,
            found: psi.len(),
        });
    }
    check_budget(m, 3, budget)?;
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut sums = [0.0; 6];
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let pts = [x[a], x[b], x[c]];
                let val = p[a] * p[b] * p[c] * (psi[a] * psi[c]).abs();
                for (s, perm) in sums.iter_mut().zip(PERMS) {
                    if pts[perm[0]] < pts[perm[1]] && pts[perm[1]] < pts[perm[2]] {
                        *s += val;
                    }
                }
            }
        }
    }
    Ok(PERMS.into_iter().zip(sums).collect())
}
