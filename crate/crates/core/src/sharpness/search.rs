use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{make_uniform_interval, quantize, QuantizedModel};
use crate::error::Result;
use crate::functionals::{
    corollary_split, discrete_identities, opial_terms, r4_display, theorem2_terms, theorem3_terms, troy_comparison,
    weighted_opial_terms, wirtinger_terms,
};
use crate::node_fn::NodeFunction;
use crate::report::{FunctionalId, IneqReport, Terms};

/// Relative chain slack below which a trial counts as a violation.
pub const VIOLATION_TOL: f64 = 1e-9;

const TROY_NODES_PER_LEVEL: usize = 256;

/// A randomized instance and its report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub trial: u64,
    pub support: Vec<f64>,
    pub mass: Vec<f64>,
    pub psi: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_exp: Option<f64>,
    pub report: IneqReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub functional: FunctionalId,
    pub trials: u64,
    pub seed: u64,
    pub m_max: usize,
    /// The searched class is not covered by a theorem.
    pub heuristic: bool,
    /// Smallest relative chain slack seen, and its trial.
    pub worst_slack: f64,
    pub worst_trial: u64,
    /// First trial (by index) with slack below `-VIOLATION_TOL`.
    pub violation: Option<Instance>,
}

/// SplitMix64 step, used to derive independent per-trial seeds.
fn splitmix(seed: u64, trial: u64) -> u64 {
    let mut z = seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn positive_exp(rng: &mut ChaCha8Rng) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e.max(1e-300)
}

fn random_model(rng: &mut ChaCha8Rng, m: usize) -> Result<QuantizedModel> {
    let mut x = normal(rng);
    let support: Vec<f64> = (0..m)
        .map(|_| {
            x += positive_exp(rng).max(1e-6);
            x
        })
        .collect();
    let raw: Vec<f64> = (0..m).map(|_| positive_exp(rng)).collect();
    let total: f64 = raw.iter().sum();
    let mut mass: Vec<f64> = raw.iter().map(|w| w / total).collect();
    // push the rounding residue onto the largest mass so the total is 1 to within an ulp or two
    let residue = 1.0 - mass.iter().sum::<f64>();
    let big = (0..m).max_by(|&a, &b| mass[a].total_cmp(&mass[b])).expect("m >= 1");
    mass[big] += residue;
    QuantizedModel::from_atoms(support, mass)
}

fn centered(p: &[f64], v: &mut [f64]) {
    let mean: f64 = p.iter().zip(v.iter()).map(|(p, v)| p * v).sum();
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Build and evaluate trial `trial` for `id`.
pub fn generate_instance(id: FunctionalId, seed: u64, trial: u64, m_max: usize) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed, trial));
    let needs_split = matches!(id, FunctionalId::Corollary | FunctionalId::R4Split);
    let lo = if needs_split { 2 } else { 1 };
    let m = rng.random_range(lo..=m_max.max(lo));
    let mut q = random_model(&mut rng, m)?;
    let mut psi: Vec<f64> = (0..m).map(|_| normal(&mut rng)).collect();
    let mut chi = None;
    let mut n = None;
    let mut c = None;
    let mut weight_exp = None;

    let report = match id {
        FunctionalId::Thm1Lower | FunctionalId::Thm1Upper => opial_terms(&q, &psi, id.direction().expect("directional"))?,
        FunctionalId::Corollary => {
            let k = rng.random_range(0..m - 1);
            let split = q.support()[k];
            c = Some(split);
            corollary_split(&q.to_distribution(), &NodeFunction::values(psi.clone()), split, 1)?
        }
        FunctionalId::Thm2 => {
            let order = rng.random_range(1..=3);
            n = Some(order);
            theorem2_terms(&q, &psi, order)?
        }
        FunctionalId::Thm3 => theorem3_terms(&q, &psi)?,
        FunctionalId::WeightedLower | FunctionalId::WeightedUpper => {
            let w: Vec<f64> = (0..m).map(|_| normal(&mut rng).abs()).collect();
            let r = weighted_opial_terms(&q, &psi, &w, id.direction().expect("directional"))?;
            chi = Some(w);
            r
        }
        FunctionalId::Wirtinger => {
            centered(q.mass(), &mut psi);
            wirtinger_terms(&q, &psi, true)?
        }
        FunctionalId::O15 | FunctionalId::O18 => {
            let mean = psi.iter().sum::<f64>() / m as f64;
            psi.iter_mut().for_each(|v| *v -= mean);
            discrete_identities(&psi, id)?
        }
        FunctionalId::R4Split => {
            let k = rng.random_range(1..m);
            c = Some(k as f64);
            r4_display(&psi, k)?
        }
        FunctionalId::Troy => {
            // A step function with `m` levels, sampled finely enough to stand in for the
            // continuous integrals.
            let p_exp = -0.9 + 5.9 * rng.random::<f64>();
            weight_exp = Some(p_exp);
            psi = psi.iter().flat_map(|&v| std::iter::repeat(v).take(TROY_NODES_PER_LEVEL)).collect();
            let fine = psi.len();
            q = quantize(&make_uniform_interval(0.0, 1.0)?, fine)?;
            let t = troy_comparison(p_exp, &NodeFunction::values(psi.clone()), fine)?;
            IneqReport::new(id, Terms::new(t.our_lhs, None, t.troy_rhs).with("our_rhs", t.our_rhs), fine, false)
        }
        _ => discrete_identities(&psi, id)?,
    };
    Ok(Instance {
        trial,
        support: q.support().to_vec(),
        mass: q.mass().to_vec(),
        psi,
        chi,
        n,
        c,
        weight_exp,
        report,
    })
}

/// Randomized search for an instance with relative chain slack below `-VIOLATION_TOL`.
///
/// Trials run in parallel; each draws from its own seed derived from `seed`, so the outcome
/// does not depend on scheduling.
pub fn search_counterexample(id: FunctionalId, trials: u64, seed: u64, m_max: usize) -> Result<SearchOutcome> {
    let m_max = m_max.max(1);
    let slacks: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| generate_instance(id, seed, t, m_max).map(|i| i.report.relative_chain_slack()))
        .collect::<Result<_>>()?;

    let (worst_trial, worst_slack) = slacks
        .iter()
        .enumerate()
        .fold((0u64, f64::INFINITY), |(bt, bs), (t, &s)| if s < bs { (t as u64, s) } else { (bt, bs) });
    let violation = slacks
        .iter()
        .position(|&s| s < -VIOLATION_TOL)
        .map(|t| generate_instance(id, seed, t as u64, m_max))
        .transpose()?;
    Ok(SearchOutcome {
        functional: id,
        trials,
        seed,
        m_max,
        heuristic: id == FunctionalId::Wirtinger,
        worst_slack,
        worst_trial,
        violation,
    })
}
