//! Fast evaluators: every inequality as explicit terms on a [`QuantizedModel`], via prefix passes.

mod discrete;
mod nested;
mod opial;
mod weighted;
mod wirtinger;

pub use discrete::{discrete_identities, r4_display, ZERO_SUM_TOL};
pub use nested::{
    factorial_f64, nested_integral, nested_integral_capped, theorem2_terms, theorem2_terms_capped, theorem3_terms,
    DEFAULT_ORDER_CAP,
};
pub use opial::{corollary_split, half_tie_transform, opial_terms};
pub use weighted::{troy_comparison, weighted_opial_terms, TroyComparison};
pub use wirtinger::{wirtinger_terms, ZERO_MEAN_TOL};

pub(crate) use opial::{half_tie, strict_prefix};

use crate::dist::{quantize, Distribution};
use crate::error::{Error, Result};
use crate::node_fn::NodeFunction;
use crate::report::{FunctionalId, IneqReport, Terms, Tolerances};

/// Everything besides the distribution and `ψ` that selects and parameterizes a functional.
#[derive(Debug, Clone)]
pub struct EvalRequest {
    pub functional: FunctionalId,
    /// Order for `thm2`.
    pub n: Option<usize>,
    /// Split point for `corollary` and `r4-split`.
    pub c: Option<f64>,
    /// Weight for the weighted family; defaults to `χ ≡ 1`.
    pub chi: Option<NodeFunction>,
    /// Exponent `p` of `χ(x) = x^p` for `troy`.
    pub weight_exp: f64,
    /// Subtract the mean of `ψ` before `wirtinger`.
    pub project_mean: bool,
    /// Atomization resolution for continuous parts.
    pub m: usize,
    pub order_cap: usize,
    /// Relative equality tolerance.
    pub tol: f64,
}

impl EvalRequest {
    pub fn new(functional: FunctionalId) -> Self {
        Self {
            functional,
            n: None,
            c: None,
            chi: None,
            weight_exp: 0.0,
            project_mean: false,
            m: 1,
            order_cap: DEFAULT_ORDER_CAP,
            tol: Tolerances::default().equality,
        }
    }
}

/// Evaluate `req.functional` for `ψ` under `f`.
///
/// Discrete identities read their coefficient vector as `ψ` at the nodes of `f`; `troy` ignores
/// `f` and works on `U(0,1)`, reporting the classical bound as `rhs` and the sharp one as `our_rhs`.
pub fn evaluate(f: &Distribution, psi: &NodeFunction, req: &EvalRequest) -> Result<IneqReport> {
    let id = req.functional;
    let report = match id {
        FunctionalId::Corollary => {
            let c = req.c.ok_or_else(|| Error::Invalid("corollary needs a split point c".into()))?;
            corollary_split(f, psi, c, req.m)?
        }
        FunctionalId::Troy => {
            let t = troy_comparison(req.weight_exp, psi, req.m)?;
            let terms = Terms::new(t.our_lhs, None, t.troy_rhs).with("our_rhs", t.our_rhs);
            IneqReport::new(id, terms, t.m, false)
        }
        _ => {
            let q = quantize(f, req.m)?;
            let values = psi.resolve(&q)?;
            match id {
                FunctionalId::Thm1Lower | FunctionalId::Thm1Upper => {
                    opial_terms(&q, &values, id.direction().expect("directional id"))?
                }
                FunctionalId::Thm2 => theorem2_terms_capped(&q, &values, req.n.unwrap_or(1), req.order_cap)?,
                FunctionalId::Thm3 => theorem3_terms(&q, &values)?,
                FunctionalId::WeightedLower | FunctionalId::WeightedUpper => {
                    let chi = match &req.chi {
                        Some(chi) => chi.resolve(&q)?,
                        None => vec![1.0; q.len()],
                    };
                    weighted_opial_terms(&q, &values, &chi, id.direction().expect("directional id"))?
                }
                FunctionalId::Wirtinger => wirtinger_terms(&q, &values, req.project_mean)?,
                FunctionalId::R4Split => match req.c {
                    Some(c) => r4_display(&values, q.support().partition_point(|&x| x <= c))?,
                    None => discrete_identities(&values, id)?,
                },
                _ => discrete_identities(&values, id)?,
            }
        }
    };
    Ok(report.with_tolerance(req.tol))
}
