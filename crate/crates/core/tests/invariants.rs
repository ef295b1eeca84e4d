mod common;

use common::{case, close, Case};
use opial_core::dist::{make_discrete, quantize};
use opial_core::functionals::{
    discrete_identities, half_tie_transform, opial_terms, theorem2_terms, theorem3_terms, weighted_opial_terms,
    wirtinger_terms,
};
use opial_core::sharpness::maximize_ratio_opial;
use opial_core::{Direction, FunctionalId, IneqReport};
use proptest::prelude::*;

fn reports(c: &Case) -> Vec<IneqReport> {
    let Case { q, psi, chi } = c;
    vec![
        opial_terms(q, psi, Direction::Below).unwrap(),
        opial_terms(q, psi, Direction::Above).unwrap(),
        theorem2_terms(q, psi, 2).unwrap(),
        theorem3_terms(q, psi).unwrap(),
        weighted_opial_terms(q, psi, chi, Direction::Below).unwrap(),
        wirtinger_terms(q, psi, true).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn first_order_chain(c in case(50)) {
        for dir in [Direction::Below, Direction::Above] {
            let r = opial_terms(&c.q, &c.psi, dir).unwrap();
            prop_assert!(r.holds(1e-10), "{:?}", r);
        }
    }

    #[test]
    fn middle_is_direction_free_and_closed_form(c in case(30)) {
        let below = opial_terms(&c.q, &c.psi, Direction::Below).unwrap().terms.middle.unwrap();
        let above = opial_terms(&c.q, &c.psi, Direction::Above).unwrap().terms.middle.unwrap();
        let mean_abs: f64 = c.q.mass().iter().zip(&c.psi).map(|(p, v)| p * v.abs()).sum();
        prop_assert!(close(below, above, 1e-12));
        prop_assert!(close(below, 0.5 * mean_abs * mean_abs, 1e-12));
    }

    #[test]
    fn tie_identity(c in case(30)) {
        let below = half_tie_transform(&c.q, &c.psi, Direction::Below).unwrap();
        let above = half_tie_transform(&c.q, &c.psi, Direction::Above).unwrap();
        let mean: f64 = c.q.mass().iter().zip(&c.psi).map(|(p, v)| p * v).sum();
        let scale: f64 = c.q.mass().iter().zip(&c.psi).map(|(p, v)| p * v.abs()).sum::<f64>().max(1e-300);
        for i in 0..c.q.len() {
            prop_assert!((below[i] + above[i] - mean).abs() <= 1e-13 * scale);
            let strict = below[i] + above[i] - c.q.mass()[i] * c.psi[i];
            let tie = c.q.mass()[i] * c.psi[i];
            prop_assert!((strict + tie - mean).abs() <= 1e-13 * scale);
        }
        let ones = vec![1.0; c.q.len()];
        let sum = opial_terms(&c.q, &ones, Direction::Below).unwrap().terms.lhs
            + opial_terms(&c.q, &ones, Direction::Above).unwrap().terms.lhs;
        prop_assert!((sum - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn homogeneity(c in case(20), scale in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0]) {
        let scaled = Case { psi: c.psi.iter().map(|v| v * scale).collect(), ..c.clone() };
        for (a, b) in reports(&c).iter().zip(reports(&scaled)) {
            prop_assert!(close(a.ratio, b.ratio, 1e-12), "{}: {} vs {}", a.functional, a.ratio, b.ratio);
        }
    }

    #[test]
    fn affine_support_maps(c in case(20), alpha in 0.01f64..50.0, beta in -100.0f64..100.0) {
        let mapped = Case { q: c.q.affine_map(alpha, beta).unwrap(), ..c.clone() };
        for (a, b) in reports(&c).iter().zip(reports(&mapped)) {
            for ((name, x), (_, y)) in a.terms.iter().zip(b.terms.iter()) {
                prop_assert!(close(x, y, 1e-12), "{} {}: {} vs {}", a.functional, name, x, y);
            }
        }
        let via_dist = c.q.to_distribution().affine_map(alpha, beta).unwrap();
        let requantized = quantize(&via_dist, 1).unwrap();
        prop_assert_eq!(requantized.mass(), c.q.mass());
    }

    #[test]
    fn constant_psi_is_equality(c in case(40), level in prop_oneof![-4.0f64..-0.1, 0.1f64..4.0]) {
        let psi = vec![level; c.q.len()];
        for r in [
            opial_terms(&c.q, &psi, Direction::Below).unwrap(),
            opial_terms(&c.q, &psi, Direction::Above).unwrap(),
            theorem3_terms(&c.q, &psi).unwrap(),
            weighted_opial_terms(&c.q, &psi, &c.chi, Direction::Above).unwrap(),
        ] {
            prop_assert!(r.slack.abs() <= 1e-12 * r.scale(), "{:?}", r);
        }
    }

    #[test]
    fn atomic_cdf_consistency(c in case(40), probe in -20.0f64..300.0) {
        let f = c.q.to_distribution();
        prop_assert_eq!(f.cdf(probe), c.q.cdf(probe));
        prop_assert_eq!(f.left_cdf(probe), c.q.left_cdf(probe));
        for &x in c.q.support() {
            prop_assert!((f.cdf(x) - c.q.cdf(x)).abs() <= 1e-15);
            prop_assert!((f.cdf(x) - f.left_cdf(x) - f.point_mass(x)).abs() <= 1e-15);
        }
    }

    #[test]
    fn o15_for_odd_lengths(half in 0usize..=10, raw in prop::collection::vec(-3.0f64..3.0, 21)) {
        let n = 2 * half + 1;
        let mean = raw[..n].iter().sum::<f64>() / n as f64;
        let a: Vec<f64> = raw[..n].iter().map(|v| v - mean).collect();
        let r = discrete_identities(&a, FunctionalId::O15).unwrap();
        prop_assert!(r.holds(1e-10), "{:?}", r);
    }

    #[test]
    fn ascent_trace_is_monotone(c in case(12)) {
        let r = maximize_ratio_opial(&c.q, Direction::Below);
        prop_assert!(r.trace.windows(2).all(|w| w[1].1 >= w[0].1));
        prop_assert!(r.ratio_star <= 1.0 + 1e-9);
    }
}

#[test]
fn cdf_matches_cumulative_mass_on_a_hundred_distributions() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let m = rng.random_range(1..=25);
        let points: Vec<f64> = (0..m).map(|_| rng.random_range(-50.0..50.0)).collect();
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let f = make_discrete(&points, &probs).unwrap();
        let q = quantize(&f, 1).unwrap();
        let mut acc = 0.0;
        for (&x, &p) in q.support().iter().zip(q.mass()) {
            acc += p;
            assert!((f.cdf(x) - acc).abs() <= 1e-15);
        }
    }
}

#[test]
fn two_point_perturbation_breaks_equality() {
    let q = quantize(&make_discrete(&[0.0, 1.0], &[0.3, 0.7]).unwrap(), 1).unwrap();
    for r in [
        opial_terms(&q, &[1.0, 1.001], Direction::Below).unwrap(),
        theorem3_terms(&q, &[1.0, 1.001]).unwrap(),
        weighted_opial_terms(&q, &[1.0, 1.001], &[1.0, 1.0], Direction::Above).unwrap(),
    ] {
        assert!(r.slack > 0.0, "{r:?}");
    }
}
