//! Functional identifiers and the [`IneqReport`] container every evaluator returns.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Which half-tie indicator a first-order Opial functional uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `1[Y < X] + ½ 1[Y = X]`.
    Below,
    /// `1[Y > X] + ½ 1[Y = X]`.
    Above,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Self::Below => Self::Above,
            Self::Above => Self::Below,
        }
    }
}

macro_rules! functional_ids {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Stable identifiers for every evaluated inequality.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum FunctionalId {
            $(#[serde(rename = $name)] $variant,)*
        }

        impl FunctionalId {
            pub const ALL: &'static [FunctionalId] = &[$(FunctionalId::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(FunctionalId::$variant => $name,)*
                }
            }
        }

        impl FromStr for FunctionalId {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self, Error> {
                match s {
                    $($name => Ok(FunctionalId::$variant),)*
                    other => Err(Error::Invalid(format!(
                        "unknown functional '{other}' (known: {})",
                        [$($name),*].join(", ")
                    ))),
                }
            }
        }
    };
}

functional_ids! {
    Thm1Lower => "thm1-lower",
    Thm1Upper => "thm1-upper",
    Corollary => "corollary",
    Thm2 => "thm2",
    Thm3 => "thm3",
    WeightedLower => "weighted-lower",
    WeightedUpper => "weighted-upper",
    Wirtinger => "wirtinger",
    O9_1 => "o9-1",
    O9_2 => "o9-2",
    O15 => "o15",
    O18 => "o18",
    Rtwo => "rtwo",
    R4Split => "r4-split",
    Troy => "troy",
}

impl FunctionalId {
    /// Direction of the half-tie transform for the first-order and weighted families.
    pub fn direction(self) -> Option<Direction> {
        match self {
            Self::Thm1Lower | Self::WeightedLower => Some(Direction::Below),
            Self::Thm1Upper | Self::WeightedUpper => Some(Direction::Above),
            _ => None,
        }
    }

    /// Identities that take a bare coefficient vector rather than a distribution.
    pub fn is_discrete_identity(self) -> bool {
        matches!(
            self,
            Self::O9_1 | Self::O9_2 | Self::O15 | Self::O18 | Self::Rtwo | Self::R4Split
        )
    }
}

impl fmt::Display for FunctionalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Tolerance defaults; every report records the one it was judged with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative slack below which a report counts as an equality, and above whose negative a
    /// report counts as a violation.
    pub equality: f64,
    /// Relative agreement required between fast evaluators and the oracle.
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            equality: 1e-10,
            oracle: 1e-12,
        }
    }
}

/// Named terms of an inequality chain `lhs <= middle <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Terms {
    pub lhs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub middle: Option<f64>,
    pub rhs: f64,
    /// Auxiliary quantities (bounds, addends) keyed by name.
    #[serde(flatten)]
    pub extra: BTreeMap<String, f64>,
}

impl Terms {
    pub fn new(lhs: f64, middle: Option<f64>, rhs: f64) -> Self {
        Self {
            lhs,
            middle,
            rhs,
            extra: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_owned(), value);
        self
    }

    /// The bounded term closest to `rhs`.
    pub fn tightest(&self) -> f64 {
        self.middle.unwrap_or(self.lhs)
    }

    /// `(name, value)` for every term, core terms first.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        std::iter::once(("lhs", self.lhs))
            .chain(self.middle.map(|m| ("middle", m)))
            .chain(std::iter::once(("rhs", self.rhs)))
            .chain(self.extra.iter().map(|(k, v)| (k.as_str(), *v)))
    }
}

/// One evaluated inequality instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IneqReport {
    pub functional: FunctionalId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub terms: Terms,
    /// `rhs - tightest`.
    pub slack: f64,
    /// `tightest / rhs`, 0 when `rhs = 0`.
    pub ratio: f64,
    pub equality: bool,
    /// Atomization resolution of the evaluated model.
    pub m: usize,
    /// No discretization error.
    pub exact: bool,
    /// The bound is not a theorem on this input class.
    pub heuristic: bool,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub flags: BTreeMap<String, bool>,
}

impl IneqReport {
    pub fn new(functional: FunctionalId, terms: Terms, m: usize, exact: bool) -> Self {
        let tightest = terms.tightest();
        let slack = terms.rhs - tightest;
        let ratio = if terms.rhs == 0.0 {
            0.0
        } else {
            tightest / terms.rhs
        };
        Self {
            functional,
            n: None,
            terms,
            slack,
            ratio,
            equality: false,
            m,
            exact,
            heuristic: false,
            tol: 0.0,
            flags: BTreeMap::new(),
        }
        .with_tolerance(Tolerances::default().equality)
    }

    /// Re-judge the equality flag at `tol` (relative).
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self.equality = self.slack <= tol * self.scale();
        self
    }

    pub(crate) fn with_order(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub(crate) fn heuristic(mut self, yes: bool) -> Self {
        self.heuristic = yes;
        self
    }

    pub(crate) fn flag(mut self, key: &str, value: bool) -> Self {
        self.flags.insert(key.to_owned(), value);
        self
    }

    /// Normalizer for relative comparisons: `max(1, |rhs|)`.
    pub fn scale(&self) -> f64 {
        self.terms.rhs.abs().max(1.0)
    }

    /// Smallest gap along `lhs <= middle <= rhs`, divided by [`scale`](Self::scale).
    pub fn relative_chain_slack(&self) -> f64 {
        let t = &self.terms;
        let gap = match t.middle {
            Some(mid) => (mid - t.lhs).min(t.rhs - mid),
            None => t.rhs - t.lhs,
        };
        gap / self.scale()
    }

    /// Every link of the chain holds to within `tol` relative.
    pub fn holds(&self, tol: f64) -> bool {
        self.relative_chain_slack() >= -tol
    }
}
