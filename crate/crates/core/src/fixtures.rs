//! Reference networks with hand-derivable trajectories.
//!
//! NET-A: 9 identical cells, theta = 1, constant rate 1, every weight 0.8.
//! NET-B: 16 cells, theta = 1, every weight 0.35; cells 0 and 1 have rate 1,
//! cells 2..16 rate 0.2. Both start from the reset state `S = 0`.

use crate::model::{validate, CellSpec, FreeDynamics, NetworkSpec, ValidatedNetwork, WeightMatrix};

/// `m` identical constant-rate cells with uniform weights, all at `S = 0`.
pub fn uniform_constant(m: usize, theta: f64, rate: f64, delta: f64) -> NetworkSpec {
    let cells = (0..m)
        .map(|_| CellSpec::new(theta, FreeDynamics::ConstantRate { a: rate }))
        .collect();
    NetworkSpec::new(cells, WeightMatrix::uniform(m, delta))
}

pub fn net_a_spec() -> NetworkSpec {
    uniform_constant(9, 1.0, 1.0, 0.8)
}

pub fn net_a() -> ValidatedNetwork {
    validate(net_a_spec()).expect("NET-A is valid")
}

pub fn net_b_spec() -> NetworkSpec {
    let mut spec = uniform_constant(16, 1.0, 0.2, 0.35);
    for c in &mut spec.cells[..2] {
        c.dynamics = FreeDynamics::ConstantRate { a: 1.0 };
    }
    spec
}

pub fn net_b() -> ValidatedNetwork {
    validate(net_b_spec()).expect("NET-B is valid")
}

/// 12 cells: a 9-cell core with NET-A's parameters acting with 0.8 on every
/// cell, plus 3 heterogeneous peripheral cells whose outgoing actions are
/// non-negative (one row entirely zero, one partially zero).
pub fn core_spec() -> NetworkSpec {
    let m = 12;
    let mut cells: Vec<CellSpec> = (0..9)
        .map(|_| CellSpec::new(1.0, FreeDynamics::ConstantRate { a: 1.0 }))
        .collect();
    cells.push(CellSpec::new(1.0, FreeDynamics::ConstantRate { a: 0.5 }));
    cells.push(CellSpec::new(0.8, FreeDynamics::AffineInS { a: 1.2, b: 0.5 }));
    cells.push(CellSpec::new(0.6, FreeDynamics::ConstantRate { a: 0.9 }));
    let mut w = WeightMatrix::zeros(m);
    for i in 0..9 {
        for j in (0..m).filter(|&j| j != i) {
            w.set(i, j, 0.8);
        }
    }
    // cell 9: silent row; cell 10: weak everywhere; cell 11: even targets only
    for j in (0..m).filter(|&j| j != 10) {
        w.set(10, j, 0.1);
    }
    for j in (0..m).filter(|&j| j != 11 && j % 2 == 0) {
        w.set(11, j, 0.25);
    }
    let mut spec = NetworkSpec::new(cells, w);
    spec.core = Some((0..9).collect());
    spec
}

pub fn core_net() -> ValidatedNetwork {
    validate(core_spec()).expect("core fixture is valid")
}
