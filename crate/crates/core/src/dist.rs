//! Distributions with atoms and piecewise-uniform densities, and their atomized form.
//!
//! A [`Distribution`] is the measure every functional integrates against. Evaluation never
//! happens on it directly: [`quantize`] reduces it to a [`QuantizedModel`] (sorted support,
//! strictly positive masses) on which the prefix-sum evaluators run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summation::{self, NeumaierSum};
use crate::PROB_TOL;

/// Default cap on `m × pieces + atoms` for [`quantize`].
pub const DEFAULT_NODE_LIMIT: usize = 10_000_000;

// A total that prints as 1 - 1e-12 is accepted; the decimal literal itself lands a few ulps
// beyond the bound.
const MASS_SLOP: f64 = 1e-12 + 16.0 * f64::EPSILON;

/// Uniform density `mass / (hi - lo)` on `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

impl Piece {
    /// Fraction of the piece's mass at or below `x`.
    fn fraction_below(&self, x: f64) -> f64 {
        if x <= self.lo {
            0.0
        } else if x >= self.hi {
            1.0
        } else {
            (x - self.lo) / (self.hi - self.lo)
        }
    }
}

/// Which half of a split distribution to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `X <= c`.
    Lower,
    /// `X > c`.
    Upper,
}

/// Atoms plus piecewise-uniform pieces, total mass one.
///
/// Canonical form: atoms sorted with duplicates merged, pieces sorted by `lo`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionSpec", into = "DistributionSpec")]
pub struct Distribution {
    atoms: Vec<(f64, f64)>,
    pieces: Vec<Piece>,
}

/// Wire form of a distribution spec file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionSpec {
    #[serde(default)]
    atoms: Vec<(f64, f64)>,
    #[serde(default)]
    pieces: Vec<Piece>,
}

impl TryFrom<DistributionSpec> for Distribution {
    type Error = Error;

    fn try_from(spec: DistributionSpec) -> Result<Self> {
        Distribution::from_parts(spec.atoms, spec.pieces)
    }
}

impl From<Distribution> for DistributionSpec {
    fn from(d: Distribution) -> Self {
        DistributionSpec {
            atoms: d.atoms,
            pieces: d.pieces,
        }
    }
}

fn invalid(pointer: String, reason: impl Into<String>) -> Error {
    Error::InvalidDistribution {
        pointer,
        reason: reason.into(),
    }
}

impl Distribution {
    /// Validate and canonicalize. Error pointers refer to the caller's original indices.
    pub fn from_parts(atoms: Vec<(f64, f64)>, pieces: Vec<Piece>) -> Result<Self> {
        if atoms.is_empty() && pieces.is_empty() {
            return Err(invalid(String::new(), "no atoms and no pieces"));
        }
        for (i, &(x, p)) in atoms.iter().enumerate() {
            if !x.is_finite() {
                return Err(invalid(format!("/atoms/{i}/0"), format!("location {x} is not finite")));
            }
            if !p.is_finite() || p < 0.0 {
                return Err(invalid(format!("/atoms/{i}/1"), format!("mass {p} must be finite and nonnegative")));
            }
        }
        for (i, piece) in pieces.iter().enumerate() {
            if !(piece.lo.is_finite() && piece.hi.is_finite()) {
                return Err(invalid(format!("/pieces/{i}"), "endpoints must be finite"));
            }
            if piece.lo >= piece.hi {
                return Err(invalid(
                    format!("/pieces/{i}"),
                    format!("lo={} must be below hi={}", piece.lo, piece.hi),
                ));
            }
            if !piece.mass.is_finite() || piece.mass < 0.0 {
                return Err(invalid(
                    format!("/pieces/{i}/mass"),
                    format!("mass {} must be finite and nonnegative", piece.mass),
                ));
            }
        }

        let total = summation::sum(atoms.iter().map(|a| a.1).chain(pieces.iter().map(|p| p.mass)));
        if (total - 1.0).abs() > MASS_SLOP {
            return Err(Error::MassNotNormalized { total });
        }

        let mut order: Vec<usize> = (0..pieces.len()).collect();
        order.sort_by(|&a, &b| pieces[a].lo.total_cmp(&pieces[b].lo));
        for w in order.windows(2) {
            let (a, b) = (&pieces[w[0]], &pieces[w[1]]);
            if b.lo < a.hi {
                return Err(invalid(
                    format!("/pieces/{}", w[1]),
                    format!(
                        "interval ({}, {}) overlaps /pieces/{} ({}, {})",
                        b.lo, b.hi, w[0], a.lo, a.hi
                    ),
                ));
            }
        }

        for (i, &(x, _)) in atoms.iter().enumerate() {
            if let Some(j) = pieces.iter().position(|p| p.lo < x && x < p.hi) {
                return Err(invalid(
                    format!("/atoms/{i}/0"),
                    format!(
                        "location {x} lies inside /pieces/{j} ({}, {})",
                        pieces[j].lo, pieces[j].hi
                    ),
                ));
            }
        }

        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += p,
                _ => merged.push((x, p)),
            }
        }
        let pieces = order.into_iter().map(|i| pieces[i]).collect();
        Ok(Self {
            atoms: merged,
            pieces,
        })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// True when there is no continuous part, so quantization is exact.
    pub fn is_atomic(&self) -> bool {
        self.pieces.is_empty()
    }

    /// True when no atom carries positive mass.
    pub fn is_absolutely_continuous(&self) -> bool {
        self.atoms.iter().all(|a| a.1 == 0.0)
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.left_cdf(x) + self.point_mass(x)
    }

    /// `P(X < x)`.
    pub fn left_cdf(&self, x: f64) -> f64 {
        let mut acc = NeumaierSum::new();
        for &(a, p) in &self.atoms {
            if a < x {
                acc.add(p);
            }
        }
        for piece in &self.pieces {
            acc.add(piece.mass * piece.fraction_below(x));
        }
        acc.value()
    }

    /// `P(X = x)`.
    pub fn point_mass(&self, x: f64) -> f64 {
        self.atoms
            .binary_search_by(|a| a.0.total_cmp(&x))
            .map(|i| self.atoms[i].1)
            .unwrap_or(0.0)
    }

    /// Half-tie CDF `F(x-) + ½ p_F(x)`.
    pub fn midpoint_cdf(&self, x: f64) -> f64 {
        self.left_cdf(x) + 0.5 * self.point_mass(x)
    }

    /// Push the distribution through `x ↦ αx + β` with `α > 0`.
    pub fn affine_map(&self, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::Invalid(format!("affine map needs finite alpha > 0, got {alpha}")));
        }
        let f = |x: f64| alpha * x + beta;
        Ok(Self {
            atoms: self.atoms.iter().map(|&(x, p)| (f(x), p)).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    lo: f(p.lo),
                    hi: f(p.hi),
                    mass: p.mass,
                })
                .collect(),
        })
    }
}

/// Atomic distribution on `points` with masses `probs`; duplicate points are merged.
pub fn make_discrete(points: &[f64], probs: &[f64]) -> Result<Distribution> {
    if points.len() != probs.len() {
        return Err(Error::LengthMismatch {
            what: "probabilities",
            expected: points.len(),
            found: probs.len(),
        });
    }
    Distribution::from_parts(points.iter().copied().zip(probs.iter().copied()).collect(), Vec::new())
}

/// Uniform distribution on `{1, …, n}`.
pub fn uniform_integers(n: usize) -> Result<Distribution> {
    if n == 0 {
        return Err(Error::ZeroResolution);
    }
    let points: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    make_discrete(&points, &vec![1.0 / n as f64; n])
}

/// Uniform distribution on the interval `(a, b)`.
pub fn make_uniform_interval(a: f64, b: f64) -> Result<Distribution> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidInterval { lo: a, hi: b });
    }
    Ok(Distribution {
        atoms: Vec::new(),
        pieces: vec![Piece {
            lo: a,
            hi: b,
            mass: 1.0,
        }],
    })
}

/// Conditional law of `X` given the chosen side of `c`, and the probability of that side.
///
/// An atom at `c` belongs to the lower side; a piece straddling `c` is cut at `c`.
pub fn conditional_truncate(f: &Distribution, c: f64, side: Side) -> Result<(Distribution, f64)> {
    if !c.is_finite() {
        return Err(Error::NonFinite("split point"));
    }
    let p = f.cdf(c);
    if p <= PROB_TOL || p >= 1.0 - PROB_TOL {
        return Err(Error::EmptyConditional { p });
    }

    let (atoms, pieces): (Vec<(f64, f64)>, Vec<Piece>) = match side {
        Side::Lower => (
            f.atoms.iter().copied().filter(|a| a.0 <= c).collect(),
            f.pieces
                .iter()
                .filter(|pc| pc.lo < c)
                .map(|pc| Piece {
                    lo: pc.lo,
                    hi: pc.hi.min(c),
                    mass: pc.mass * pc.fraction_below(c),
                })
                .collect(),
        ),
        Side::Upper => (
            f.atoms.iter().copied().filter(|a| a.0 > c).collect(),
            f.pieces
                .iter()
                .filter(|pc| pc.hi > c)
                .map(|pc| Piece {
                    lo: pc.lo.max(c),
                    hi: pc.hi,
                    mass: pc.mass * (1.0 - pc.fraction_below(c)),
                })
                .collect(),
        ),
    };

    let kept = summation::sum(atoms.iter().map(|a| a.1).chain(pieces.iter().map(|p| p.mass)));
    let scale = 1.0 / kept;
    Ok((
        Distribution {
            atoms: atoms.into_iter().map(|(x, m)| (x, m * scale)).collect(),
            pieces: pieces
                .into_iter()
                .map(|pc| Piece {
                    mass: pc.mass * scale,
                    ..pc
                })
                .collect(),
        },
        kept,
    ))
}

/// Pure-atom evaluation form: strictly increasing support, strictly positive masses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizedModel {
    support: Vec<f64>,
    mass: Vec<f64>,
    /// No continuous part was discretized: results are exact for the source.
    pub is_exact: bool,
    /// The source had no atoms, only densities.
    pub absolutely_continuous: bool,
    /// Atoms per piece used for the continuous part.
    pub source_m: usize,
}

impl QuantizedModel {
    /// Build directly from atoms, validating the model invariants.
    pub fn from_atoms(support: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        if support.len() != mass.len() {
            return Err(Error::LengthMismatch {
                what: "masses",
                expected: support.len(),
                found: mass.len(),
            });
        }
        if support.is_empty() {
            return Err(Error::Invalid("empty support".into()));
        }
        if support.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("support point"));
        }
        if let Some(i) = support.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Invalid(format!("support not strictly increasing at index {}", i + 1)));
        }
        if let Some(i) = mass.iter().position(|&p| !p.is_finite() || p <= 0.0) {
            return Err(Error::Invalid(format!("mass[{i}] = {} must be positive", mass[i])));
        }
        let total = summation::sum(mass.iter().copied());
        if (total - 1.0).abs() > MASS_SLOP {
            return Err(Error::MassNotNormalized { total });
        }
        Ok(Self {
            support,
            mass,
            is_exact: true,
            absolutely_continuous: false,
            source_m: 1,
        })
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Cumulative mass `Σ_{x_i <= x} p_i`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.support.partition_point(|&s| s <= x);
        summation::sum(self.mass[..k].iter().copied())
    }

    /// `Σ_{x_i < x} p_i`.
    pub fn left_cdf(&self, x: f64) -> f64 {
        let k = self.support.partition_point(|&s| s < x);
        summation::sum(self.mass[..k].iter().copied())
    }

    /// Half-tie CDF at every node: `Σ_{j<i} p_j + ½ p_i`.
    pub fn midpoint_cdf_at_nodes(&self) -> Vec<f64> {
        let mut acc = NeumaierSum::new();
        self.mass
            .iter()
            .map(|&p| {
                let v = acc.value() + 0.5 * p;
                acc.add(p);
                v
            })
            .collect()
    }

    /// The model as an atomic [`Distribution`].
    pub fn to_distribution(&self) -> Distribution {
        Distribution {
            atoms: self.support.iter().copied().zip(self.mass.iter().copied()).collect(),
            pieces: Vec::new(),
        }
    }

    /// Push the support through `x ↦ αx + β`, `α > 0`.
    pub fn affine_map(&self, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::Invalid(format!("affine map needs finite alpha > 0, got {alpha}")));
        }
        let support: Vec<f64> = self.support.iter().map(|&x| alpha * x + beta).collect();
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("affine map collapsed support points".into()));
        }
        Ok(Self {
            support,
            ..self.clone()
        })
    }
}

/// Atomize `f`: atoms pass through, each piece becomes `m` equal-mass atoms at its
/// conditional quantile midpoints `lo + (hi - lo)(k - ½)/m`.
pub fn quantize(f: &Distribution, m: usize) -> Result<QuantizedModel> {
    quantize_with_limit(f, m, DEFAULT_NODE_LIMIT)
}

/// [`quantize`] with an explicit node-count guard.
pub fn quantize_with_limit(f: &Distribution, m: usize, limit: usize) -> Result<QuantizedModel> {
    if m == 0 {
        return Err(Error::ZeroResolution);
    }
    let live_pieces = f.pieces.iter().filter(|p| p.mass > 0.0).count();
    let requested = m
        .checked_mul(live_pieces)
        .and_then(|n| n.checked_add(f.atoms.len()))
        .unwrap_or(usize::MAX);
    if requested > limit {
        return Err(Error::NodeLimit { requested, limit });
    }

    let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(requested);
    nodes.extend(f.atoms.iter().copied().filter(|a| a.1 > 0.0));
    for piece in f.pieces.iter().filter(|p| p.mass > 0.0) {
        let width = piece.hi - piece.lo;
        let w = piece.mass / m as f64;
        nodes.extend((1..=m).map(|k| (piece.lo + width * (k as f64 - 0.5) / m as f64, w)));
    }
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));

    let (support, mass) = nodes.into_iter().unzip();
    Ok(QuantizedModel {
        support,
        mass,
        is_exact: f.is_atomic(),
        absolutely_continuous: f.is_absolutely_continuous(),
        source_m: m,
    })
}
