//! The integrands `ψ` and weights `χ`, either explicit node values or a named family.

use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, QuantizedModel};
use crate::error::{Error, Result};

/// A function attached to the nodes of a [`QuantizedModel`].
///
/// Wire form is tagged by `kind`:
/// `{"kind": "constant", "level": 1.0}`, `{"kind": "identity"}`, `{"kind": "cos_pi_F"}`,
/// `{"kind": "step", "threshold": c, "low": u, "high": v}`, `{"kind": "values", "values": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NodeFunction {
    Constant {
        level: f64,
    },
    /// `x ↦ x`.
    Identity,
    /// `cos(π F̃(x))` with the half-tie CDF `F̃(x) = F(x-) + ½ p_F(x)`.
    #[serde(rename = "cos_pi_F")]
    CosPiF,
    /// `low` for `x <= threshold`, `high` above.
    Step {
        threshold: f64,
        low: f64,
        high: f64,
    },
    /// One value per node, in support order.
    Values {
        values: Vec<f64>,
    },
}

impl NodeFunction {
    pub fn constant(level: f64) -> Self {
        Self::Constant { level }
    }

    pub fn values(values: impl Into<Vec<f64>>) -> Self {
        Self::Values {
            values: values.into(),
        }
    }

    /// Values at the nodes of `q`, with `cos_pi_F` using the model's own half-tie CDF.
    pub fn resolve(&self, q: &QuantizedModel) -> Result<Vec<f64>> {
        match self {
            Self::CosPiF => Ok(q
                .midpoint_cdf_at_nodes()
                .into_iter()
                .map(|u| (std::f64::consts::PI * u).cos())
                .collect()),
            _ => self.resolve_at(q.support(), |_| unreachable!("only cos_pi_F reads the CDF")),
        }
    }

    /// Values at `nodes`, with `cos_pi_F` reading the half-tie CDF of `reference`.
    ///
    /// Used when evaluating on a conditional piece of `reference` while keeping `F` global.
    pub fn resolve_against(&self, nodes: &[f64], reference: &Distribution) -> Result<Vec<f64>> {
        self.resolve_at(nodes, |x| reference.midpoint_cdf(x))
    }

    fn resolve_at(&self, nodes: &[f64], midpoint_cdf: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let out = match self {
            Self::Constant { level } => vec![*level; nodes.len()],
            Self::Identity => nodes.to_vec(),
            Self::CosPiF => nodes
                .iter()
                .map(|&x| (std::f64::consts::PI * midpoint_cdf(x)).cos())
                .collect(),
            Self::Step {
                threshold,
                low,
                high,
            } => nodes
                .iter()
                .map(|&x| if x <= *threshold { *low } else { *high })
                .collect(),
            Self::Values { values } => {
                if values.len() != nodes.len() {
                    return Err(Error::LengthMismatch {
                        what: "node values (expected one per node)",
                        expected: nodes.len(),
                        found: values.len(),
                    });
                }
                values.clone()
            }
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("function value"));
        }
        Ok(out)
    }
}
