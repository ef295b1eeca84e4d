#![allow(dead_code)]

use opial_core::dist::{make_discrete, quantize};
use opial_core::QuantizedModel;
use proptest::prelude::*;

/// An atomic model together with one value per node.
#[derive(Debug, Clone)]
pub struct Case {
    pub q: QuantizedModel,
    pub psi: Vec<f64>,
    pub chi: Vec<f64>,
}

pub fn model(gaps: &[f64], weights: &[f64], start: f64) -> QuantizedModel {
    let total: f64 = weights.iter().sum();
    let mut x = start;
    let points: Vec<f64> = gaps
        .iter()
        .map(|g| {
            x += g;
            x
        })
        .collect();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    quantize(&make_discrete(&points, &probs).unwrap(), 1).unwrap()
}

pub fn case(max_m: usize) -> impl Strategy<Value = Case> {
    (1..=max_m).prop_flat_map(|m| {
        (
            prop::collection::vec(0.01f64..5.0, m),
            prop::collection::vec(0.01f64..1.0, m),
            -10.0f64..10.0,
            prop::collection::vec(-3.0f64..3.0, m),
            prop::collection::vec(0.0f64..4.0, m),
        )
            .prop_map(|(gaps, weights, start, psi, chi)| Case {
                q: model(&gaps, &weights, start),
                psi,
                chi,
            })
    })
}

/// `|a - b| <= tol · max(|a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs());
    scale == 0.0 || (a - b).abs() <= tol * scale
}
