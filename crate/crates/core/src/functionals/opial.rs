use crate::dist::{conditional_truncate, quantize, Distribution, QuantizedModel, Side};
use crate::error::{Error, Result};
use crate::node_fn::NodeFunction;
use crate::report::{Direction, FunctionalId, IneqReport, Terms};
use crate::summation::{self, NeumaierSum};

pub(crate) fn check_len(q: &QuantizedModel, values: &[f64], what: &'static str) -> Result<()> {
    if values.len() != q.len() {
        return Err(Error::LengthMismatch {
            what,
            expected: q.len(),
            found: values.len(),
        });
    }
    Ok(())
}

/// `Σ_{j<i} p_j v_j + ½ p_i v_i` (below) or `Σ_{j>i} p_j v_j + ½ p_i v_i` (above).
pub(crate) fn half_tie(mass: &[f64], values: &[f64], dir: Direction) -> Vec<f64> {
    let mut out = vec![0.0; mass.len()];
    let mut acc = NeumaierSum::new();
    let mut step = |i: usize| {
        let w = mass[i] * values[i];
        out[i] = acc.value() + 0.5 * w;
        acc.add(w);
    };
    match dir {
        Direction::Below => (0..mass.len()).for_each(&mut step),
        Direction::Above => (0..mass.len()).rev().for_each(&mut step),
    }
    out
}

/// Strict prefix `Σ_{j<i} p_j v_j`.
pub(crate) fn strict_prefix(mass: &[f64], values: &[f64]) -> Vec<f64> {
    let mut acc = NeumaierSum::new();
    mass.iter()
        .zip(values)
        .map(|(&p, &v)| {
            let before = acc.value();
            acc.add(p * v);
            before
        })
        .collect()
}

/// Half-tie conditional expectation of `ψ(Y)` given `X = x_i`, at every node.
pub fn half_tie_transform(q: &QuantizedModel, psi: &[f64], dir: Direction) -> Result<Vec<f64>> {
    check_len(q, psi, "psi")?;
    Ok(half_tie(q.mass(), psi, dir))
}

/// The first-order Opial chain: `E|T(X) ψ(X)| <= E|ψ(X)ψ(Y)|{tie indicator} <= ½ E ψ²`.
pub fn opial_terms(q: &QuantizedModel, psi: &[f64], dir: Direction) -> Result<IneqReport> {
    check_len(q, psi, "psi")?;
    let p = q.mass();
    let t = half_tie(p, psi, dir);
    let abs: Vec<f64> = psi.iter().map(|v| v.abs()).collect();
    let t_abs = half_tie(p, &abs, dir);

    let lhs = summation::sum((0..p.len()).map(|i| p[i] * (t[i] * psi[i]).abs()));
    let middle = summation::sum((0..p.len()).map(|i| p[i] * abs[i] * t_abs[i]));
    let rhs = 0.5 * summation::sum((0..p.len()).map(|i| p[i] * psi[i] * psi[i]));

    let id = match dir {
        Direction::Below => FunctionalId::Thm1Lower,
        Direction::Above => FunctionalId::Thm1Upper,
    };
    Ok(IneqReport::new(id, Terms::new(lhs, Some(middle), rhs), q.source_m, q.is_exact))
}

/// Two first-order chains glued at `c`: below-form on `X <= c`, above-form on `X > c`,
/// each under the conditional law of its side.
///
/// Continuous parts are cut exactly at `c` and each side is atomized at resolution `m`.
/// Explicit node values for `psi` are only meaningful for atomic `f`; they are aligned to
/// the full support and split at `c`.
pub fn corollary_split(f: &Distribution, psi: &NodeFunction, c: f64, m: usize) -> Result<IneqReport> {
    let (lower, p) = conditional_truncate(f, c, Side::Lower)?;
    let (upper, _) = conditional_truncate(f, c, Side::Upper)?;
    let q_lower = quantize(&lower, m)?;
    let q_upper = quantize(&upper, m)?;

    let (psi_lower, psi_upper) = match psi {
        NodeFunction::Values { .. } => {
            if !f.is_atomic() {
                return Err(Error::Unsupported(
                    "explicit psi values need an atomic distribution for the corollary split".into(),
                ));
            }
            let full = quantize(f, 1)?;
            let values = psi.resolve(&full)?;
            let k = full.support().partition_point(|&x| x <= c);
            (values[..k].to_vec(), values[k..].to_vec())
        }
        _ => (
            psi.resolve_against(q_lower.support(), f)?,
            psi.resolve_against(q_upper.support(), f)?,
        ),
    };

    let low = opial_terms(&q_lower, &psi_lower, Direction::Below)?;
    let high = opial_terms(&q_upper, &psi_upper, Direction::Above)?;
    // The displayed middle line uses the below-form on both sides.
    let high_middle = opial_terms(&q_upper, &psi_upper, Direction::Below)?.terms.middle;

    let terms = Terms::new(
        low.terms.lhs + high.terms.lhs,
        Some(low.terms.middle.unwrap_or(0.0) + high_middle.unwrap_or(0.0)),
        low.terms.rhs + high.terms.rhs,
    )
    .with("p", p)
    .with("lower_lhs", low.terms.lhs)
    .with("upper_lhs", high.terms.lhs);
    Ok(IneqReport::new(FunctionalId::Corollary, terms, m, f.is_atomic()))
}
