//! Classical discrete Opial-type inequalities on a bare coefficient vector `a_1..a_N`.

use crate::dist::uniform_integers;
use crate::error::{Error, Result};
use crate::node_fn::NodeFunction;
use crate::report::{FunctionalId, IneqReport, Terms};
use crate::summation::{self, NeumaierSum};

use super::opial::corollary_split;

/// Tolerance on `Σ a_i`, relative to `max(1, Σ|a_i|)`.
pub const ZERO_SUM_TOL: f64 = 1e-10;

fn require_zero_sum(a: &[f64]) -> Result<()> {
    let total = summation::sum(a.iter().copied());
    let scale = summation::sum(a.iter().map(|v| v.abs())).max(1.0);
    if total.abs() > ZERO_SUM_TOL * scale {
        return Err(Error::NotZeroSum { sum: total });
    }
    Ok(())
}

fn square_sum(a: &[f64]) -> f64 {
    summation::sum(a.iter().map(|v| v * v))
}

/// Evaluate one of the discrete identities literally.
///
/// | id | lhs | rhs |
/// |----|-----|-----|
/// | `o9-1` | `Σ_i |a_i Σ_{j≤i} a_j|` | `(N+1)/2 Σ a²` |
/// | `o9-2` | `Σ_i Σ_{j≤i} |a_i a_j|` | `(N+1)/2 Σ a²` |
/// | `o15` | `Σ_i |a_i (Σ_{j<i} a_j + ½ a_i)|` | `N/4 Σ a²` |
/// | `o18` | `Σ_i |a_i Σ_{j<i} a_j|` | `½ ⌊(N+1)/2⌋ Σ a²` |
/// | `rtwo` | `6 Σ_i Σ_{j<i} (i-j) |a_i||a_j|` | `(N²-1) Σ a²` |
/// | `r4-split` | see [`r4_display`] with `K = ⌊N/2⌋` | |
///
/// `o15` and `o18` require `Σ a_i = 0`.
pub fn discrete_identities(a: &[f64], which: FunctionalId) -> Result<IneqReport> {
    if a.is_empty() {
        return Err(Error::Invalid("coefficient vector is empty".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("coefficient"));
    }
    let n = a.len();
    let nf = n as f64;
    let sq = square_sum(a);

    let (lhs, rhs) = match which {
        FunctionalId::O9_1 | FunctionalId::O9_2 | FunctionalId::O15 | FunctionalId::O18 => {
            if matches!(which, FunctionalId::O15 | FunctionalId::O18) {
                require_zero_sum(a)?;
            }
            let mut lhs = NeumaierSum::new();
            let mut prefix = NeumaierSum::new();
            let mut abs_prefix = NeumaierSum::new();
            for &ai in a {
                let below = prefix.value();
                let term = match which {
                    FunctionalId::O9_1 => (ai * (below + ai)).abs(),
                    FunctionalId::O9_2 => ai.abs() * (abs_prefix.value() + ai.abs()),
                    FunctionalId::O15 => (ai * (below + 0.5 * ai)).abs(),
                    _ => (ai * below).abs(),
                };
                lhs.add(term);
                prefix.add(ai);
                abs_prefix.add(ai.abs());
            }
            let rhs = match which {
                FunctionalId::O9_1 | FunctionalId::O9_2 => 0.5 * (nf + 1.0) * sq,
                FunctionalId::O15 => 0.25 * nf * sq,
                _ => 0.5 * n.div_ceil(2) as f64 * sq,
            };
            (lhs.value(), rhs)
        }
        FunctionalId::Rtwo => {
            // D_i = Σ_{j<i} (i-j) b_j satisfies D_{i+1} = D_i + Σ_{j<=i} b_j.
            let mut lhs = NeumaierSum::new();
            let mut d = NeumaierSum::new();
            let mut prefix = NeumaierSum::new();
            for &ai in a {
                let b = ai.abs();
                lhs.add(6.0 * b * d.value());
                prefix.add(b);
                d.add(prefix.value());
            }
            (lhs.value(), (nf * nf - 1.0) * sq)
        }
        FunctionalId::R4Split => return r4_display(a, n / 2),
        other => {
            return Err(Error::Unsupported(format!("'{other}' is not a discrete identity")));
        }
    };
    Ok(IneqReport::new(which, Terms::new(lhs, None, rhs), n, true))
}

/// The glued chain on uniform `{1..N}` split after the `k`-th point:
/// `K⁻² Σ_{i≤K} |a_i (Σ_{j≤i} a_j - ½a_i)| + (N-K)⁻² Σ_{i>K} |a_i (Σ_{j>i} a_j + ½a_i)|
///  <= (2K)⁻¹ Σ_{i≤K} a_i² + (2(N-K))⁻¹ Σ_{i>K} a_i²`.
pub fn r4_display(a: &[f64], k: usize) -> Result<IneqReport> {
    let n = a.len();
    if k == 0 || k >= n {
        return Err(Error::EmptyConditional {
            p: if n == 0 { 0.0 } else { k as f64 / n as f64 },
        });
    }
    let f = uniform_integers(n)?;
    let glued = corollary_split(&f, &NodeFunction::values(a.to_vec()), k as f64, 1)?;
    Ok(IneqReport::new(FunctionalId::R4Split, glued.terms, n, true))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(n: usize) -> Vec<f64> {
        (0..n).map(|i| if i < n / 2 { 1.0 } else { -1.0 }).collect()
    }

    #[test]
    fn o9_2_example() {
        let r = discrete_identities(&[1.0, 2.0, 3.0], FunctionalId::O9_2).unwrap();
        assert_eq!((r.terms.lhs, r.terms.rhs), (25.0, 28.0));
    }

    #[test]
    fn o9_forms_agree_on_nonnegative_input() {
        let a = [0.5, 2.0, 1.5, 3.0];
        let one = discrete_identities(&a, FunctionalId::O9_1).unwrap();
        let two = discrete_identities(&a, FunctionalId::O9_2).unwrap();
        assert!((one.terms.lhs - two.terms.lhs).abs() < 1e-12);
    }

    #[test]
    fn step_vectors_are_tight() {
        let r = discrete_identities(&[1.0, -1.0], FunctionalId::O15).unwrap();
        assert_eq!((r.terms.lhs, r.terms.rhs), (1.0, 1.0));
        for n in (2..=30).step_by(2) {
            for id in [FunctionalId::O15, FunctionalId::O18] {
                let r = discrete_identities(&step(n), id).unwrap();
                assert!(r.equality, "{id} N={n}: {r:?}");
            }
        }
    }

    #[test]
    fn zero_sum_required() {
        for id in [FunctionalId::O15, FunctionalId::O18] {
            assert!(matches!(discrete_identities(&[1.0, 2.0], id), Err(Error::NotZeroSum { .. })));
        }
        assert!(discrete_identities(&[1.0, 2.0], FunctionalId::O9_1).is_ok());
    }

    #[test]
    fn rtwo_constant_is_equality() {
        for n in 1..=12 {
            let r = discrete_identities(&vec![2.0; n], FunctionalId::Rtwo).unwrap();
            assert!(r.equality, "N={n}");
        }
    }

    #[test]
    fn rtwo_matches_double_sum() {
        let a: [f64; 5] = [1.0, -0.5, 2.0, 0.25, 3.0];
        let mut brute = 0.0;
        for i in 0..a.len() {
            for j in 0..i {
                brute += 6.0 * (i - j) as f64 * a[i].abs() * a[j].abs();
            }
        }
        let r = discrete_identities(&a, FunctionalId::Rtwo).unwrap();
        assert!((r.terms.lhs - brute).abs() < 1e-12);
    }

    #[test]
    fn r4_display_literal() {
        let a = [1.0, 3.0, -2.0, 0.5, -1.0];
        let k = 2;
        let r = r4_display(&a, k).unwrap();
        let (kf, rest) = (k as f64, (a.len() - k) as f64);
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for i in 0..k {
            let s: f64 = a[..=i].iter().sum();
            lhs += (a[i] * (s - 0.5 * a[i])).abs() / (kf * kf);
            rhs += a[i] * a[i] / (2.0 * kf);
        }
        for i in k..a.len() {
            let s: f64 = a[i + 1..].iter().sum();
            lhs += (a[i] * (s + 0.5 * a[i])).abs() / (rest * rest);
            rhs += a[i] * a[i] / (2.0 * rest);
        }
        assert!((r.terms.lhs - lhs).abs() < 1e-14 && (r.terms.rhs - rhs).abs() < 1e-14);
        assert!(r4_display(&a, 0).is_err() && r4_display(&a, 5).is_err());
    }

    #[test]
    fn unsupported_id() {
        assert!(discrete_identities(&[1.0], FunctionalId::Thm2).is_err());
        assert!(discrete_identities(&[], FunctionalId::O9_1).is_err());
    }
}
