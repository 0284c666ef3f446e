//! Criterion benchmarks for the simulation engine; see `benches/`.

use pulsenet_core::fixtures;
use pulsenet_core::ValidatedNetwork;

/// A dense uniform network of `m` constant-rate cells, offset so that the
/// first events are partial clusters.
pub fn staggered_uniform(m: usize) -> ValidatedNetwork {
    let s0: Vec<f64> = (0..m).map(|i| 0.9 * i as f64 / m as f64).collect();
    let spec = fixtures::uniform_constant(m, 1.0, 1.0, 1.5 / (m as f64).sqrt()).with_initial(&s0);
    pulsenet_core::validate(spec).expect("benchmark network is valid")
}
