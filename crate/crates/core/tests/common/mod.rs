#![allow(dead_code)]

use std::f64::consts::TAU;

use proptest::prelude::*;
use pulsenet_core::{validate, CellSpec, FreeDynamics, NetworkSpec, ValidatedNetwork, WeightMatrix};

pub fn dynamics() -> impl Strategy<Value = FreeDynamics> {
    prop_oneof![
        (0.2..2.0f64).prop_map(|a| FreeDynamics::ConstantRate { a }),
        (0.7..2.0f64, 0.0..0.4f64).prop_map(|(a, b)| FreeDynamics::AffineInS { a, b }),
        (0.5..2.0f64, 0.0..0.9f64, 0.5..5.0f64, 0.0..TAU).prop_map(|(c, frac, omega, phi_reset)| {
            FreeDynamics::OscillatoryAux {
                c,
                amplitude: frac * c,
                omega,
                phi_reset,
            }
        }),
    ]
}

/// A cell with `theta` in `[0.5, 1.5)` and a uniformly placed `s0`.
pub fn cell() -> impl Strategy<Value = CellSpec> {
    (0.5..1.5f64, dynamics(), 0.0..1.0f64, 0.0..TAU)
        .prop_map(|(theta, d, frac, aux0)| CellSpec {
            theta,
            dynamics: d,
            s0: frac * theta,
            aux0,
        })
}

pub fn spec_with(m: std::ops::RangeInclusive<usize>, weight: std::ops::Range<f64>) -> impl Strategy<Value = NetworkSpec> {
    m.prop_flat_map(move |m| {
        (
            prop::collection::vec(cell(), m),
            prop::collection::vec(weight.clone(), m * m),
        )
    })
    .prop_map(|(cells, w)| {
        let m = cells.len();
        let rows = (0..m)
            .map(|i| (0..m).map(|j| if i == j { 0.0 } else { w[i * m + j] }).collect())
            .collect();
        NetworkSpec::new(cells, WeightMatrix::from_rows(rows).unwrap())
    })
}

/// Any small valid network of mixed families.
pub fn network() -> impl Strategy<Value = ValidatedNetwork> {
    spec_with(2..=7, 0.0..0.6).prop_map(|s| validate(s).unwrap())
}

/// Networks strongly cooperative enough for the large-cooperativity
/// hypothesis in most draws; callers still filter on the verdict.
pub fn cooperative_network() -> impl Strategy<Value = ValidatedNetwork> {
    spec_with(9..=14, 0.7..1.0).prop_map(|mut s| {
        for c in &mut s.cells {
            c.theta = c.theta.min(1.0);
            c.s0 = c.s0.min(0.99 * c.theta);
        }
        validate(s).unwrap()
    })
}
