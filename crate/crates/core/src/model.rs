//! Static network description: cells, free dynamics, interaction weights,
//! validation, hypothesis evaluators and the closed-form bounds.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, ValidationError, Violation};

/// Free dynamics of one cell: the growth rate `g` of its satisfaction
/// variable and, for the oscillatory family, the auxiliary phase flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FreeDynamics {
    /// `dS/dt = a`.
    ConstantRate { a: f64 },
    /// `dS/dt = a - b*S`, with `a - b*theta > 0`.
    AffineInS { a: f64, b: f64 },
    /// `dS/dt = c + amplitude*sin(phi)`, `dphi/dt = omega`; the phase jumps
    /// to `phi_reset` at the cell's own spike.
    OscillatoryAux {
        c: f64,
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phi_reset: f64,
    },
}

impl FreeDynamics {
    /// Growth rate at satisfaction `s` and auxiliary phase `aux`.
    pub fn growth(&self, s: f64, aux: f64) -> f64 {
        match *self {
            FreeDynamics::ConstantRate { a } => a,
            FreeDynamics::AffineInS { a, b } => a - b * s,
            FreeDynamics::OscillatoryAux { c, amplitude, .. } => c + amplitude * aux.sin(),
        }
    }

    /// Phase the cell returns to when it spikes.
    pub fn reset_aux(&self) -> f64 {
        match *self {
            FreeDynamics::OscillatoryAux { phi_reset, .. } => phi_reset,
            _ => 0.0,
        }
    }

    pub fn has_aux(&self) -> bool {
        matches!(self, FreeDynamics::OscillatoryAux { .. })
    }

    pub fn same_family(&self, other: &FreeDynamics) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            FreeDynamics::ConstantRate { .. } => "constant_rate",
            FreeDynamics::AffineInS { .. } => "affine_in_s",
            FreeDynamics::OscillatoryAux { .. } => "oscillatory_aux",
        }
    }
}

/// Tight bounds `(g_min, g_max)` of the growth rate over `0 <= S <= theta`
/// and every phase.
pub fn g_bounds(dynamics: &FreeDynamics, theta: f64) -> (f64, f64) {
    match *dynamics {
        FreeDynamics::ConstantRate { a } => (a, a),
        FreeDynamics::AffineInS { a, b } => (a - b * theta, a),
        FreeDynamics::OscillatoryAux { c, amplitude, .. } => (c - amplitude, c + amplitude),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub theta: f64,
    pub dynamics: FreeDynamics,
    #[serde(default)]
    pub s0: f64,
    #[serde(default)]
    pub aux0: f64,
}

impl CellSpec {
    pub fn new(theta: f64, dynamics: FreeDynamics) -> Self {
        CellSpec {
            theta,
            dynamics,
            s0: 0.0,
            aux0: 0.0,
        }
    }

    pub fn with_s0(mut self, s0: f64) -> Self {
        self.s0 = s0;
        self
    }
}

/// Dense interaction magnitudes; `get(i, j)` is the jump cell `i` applies to
/// cell `j` when `i` spikes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct WeightMatrix {
    m: usize,
    delta: Vec<f64>,
}

impl WeightMatrix {
    /// Every off-diagonal entry equal to `value`.
    pub fn uniform(m: usize, value: f64) -> Self {
        let mut delta = vec![value; m * m];
        for i in 0..m {
            delta[i * m + i] = 0.0;
        }
        WeightMatrix { m, delta }
    }

    pub fn zeros(m: usize) -> Self {
        WeightMatrix {
            m,
            delta: vec![0.0; m * m],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let m = rows.len();
        let mut delta = Vec::with_capacity(m * m);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != m {
                return Err(ModelError::NotSquare {
                    row,
                    len: r.len(),
                    expected: m,
                });
            }
            delta.extend(r);
        }
        Ok(WeightMatrix { m, delta })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, sender: usize, receiver: usize) -> f64 {
        self.delta[sender * self.m + receiver]
    }

    pub fn set(&mut self, sender: usize, receiver: usize, value: f64) {
        self.delta[sender * self.m + receiver] = value;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.delta.chunks(self.m.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// `(sender, receiver, weight)` for every ordered pair with `sender != receiver`.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let m = self.m;
        (0..m).flat_map(move |i| {
            (0..m)
                .filter(move |&j| j != i)
                .map(move |j| (i, j, self.get(i, j)))
        })
    }
}

impl TryFrom<Vec<Vec<f64>>> for WeightMatrix {
    type Error = ModelError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        WeightMatrix::from_rows(rows)
    }
}

impl From<WeightMatrix> for Vec<Vec<f64>> {
    fn from(w: WeightMatrix) -> Self {
        w.rows()
    }
}

/// Negative external perturbation of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterferenceKind {
    /// Subtracts `delta` from the growth rate on `[start, end)`; `end = None`
    /// means forever.
    Differential {
        delta: f64,
        start: f64,
        #[serde(default)]
        end: Option<f64>,
    },
    /// Instantaneous drop of `magnitude` at time `at`, clamped at zero.
    Impulsive { magnitude: f64, at: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interference {
    pub target: usize,
    #[serde(flatten)]
    pub kind: InterferenceKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub cells: Vec<CellSpec>,
    pub weights: WeightMatrix,
    #[serde(default)]
    pub core: Option<Vec<usize>>,
    #[serde(default)]
    pub interferences: Vec<Interference>,
}

impl NetworkSpec {
    pub fn new(cells: Vec<CellSpec>, weights: WeightMatrix) -> Self {
        NetworkSpec {
            cells,
            weights,
            core: None,
            interferences: Vec::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.cells.len()
    }

    pub fn max_theta(&self) -> f64 {
        self.cells.iter().map(|c| c.theta).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Replaces the initial satisfactions; panics if the length differs.
    pub fn with_initial(mut self, s0: &[f64]) -> Self {
        assert_eq!(s0.len(), self.cells.len(), "one initial value per cell");
        for (c, &s) in self.cells.iter_mut().zip(s0) {
            c.s0 = s;
        }
        self
    }
}

/// A [`NetworkSpec`] whose invariants have all been checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedNetwork {
    spec: NetworkSpec,
    bounds: Vec<(f64, f64)>,
    core: Option<BTreeSet<usize>>,
}

impl ValidatedNetwork {
    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn into_spec(self) -> NetworkSpec {
        self.spec
    }

    pub fn m(&self) -> usize {
        self.spec.cells.len()
    }

    pub fn cell(&self, i: usize) -> &CellSpec {
        &self.spec.cells[i]
    }

    pub fn cells(&self) -> &[CellSpec] {
        &self.spec.cells
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.spec.weights
    }

    #[inline]
    pub fn weight(&self, sender: usize, receiver: usize) -> f64 {
        self.spec.weights.get(sender, receiver)
    }

    pub fn theta(&self, i: usize) -> f64 {
        self.spec.cells[i].theta
    }

    pub fn g_bounds(&self, i: usize) -> (f64, f64) {
        self.bounds[i]
    }

    pub fn core(&self) -> Option<&BTreeSet<usize>> {
        self.core.as_ref()
    }

    pub fn interferences(&self) -> &[Interference] {
        &self.spec.interferences
    }

    pub fn max_theta(&self) -> f64 {
        self.spec.max_theta()
    }

    pub fn min_theta(&self) -> f64 {
        self.spec.cells.iter().map(|c| c.theta).fold(f64::INFINITY, f64::min)
    }

    /// Same network with every interference removed.
    pub fn without_interferences(&self) -> ValidatedNetwork {
        let mut out = self.clone();
        out.spec.interferences.clear();
        out
    }
}

fn check_dynamics(cell: usize, c: &CellSpec, out: &mut Vec<Violation>) {
    let finite = |x: f64| x.is_finite();
    match c.dynamics {
        FreeDynamics::ConstantRate { a } => {
            if !(finite(a) && a > 0.0) {
                out.push(Violation::InvalidDynamics {
                    cell,
                    reason: "constant rate a must be positive",
                });
            }
        }
        FreeDynamics::AffineInS { a, b } => {
            if !(finite(a) && a > 0.0) {
                out.push(Violation::InvalidDynamics {
                    cell,
                    reason: "affine rate a must be positive",
                });
            } else if !(finite(b) && b >= 0.0) {
                out.push(Violation::InvalidDynamics {
                    cell,
                    reason: "affine decay b must be non-negative",
                });
            } else if c.theta > 0.0 && a - b * c.theta <= 0.0 {
                out.push(Violation::NonPositiveGrowth {
                    cell,
                    min_rate: a - b * c.theta,
                });
            }
        }
        FreeDynamics::OscillatoryAux {
            c: base,
            amplitude,
            omega,
            phi_reset,
        } => {
            if !(finite(amplitude) && amplitude >= 0.0) {
                out.push(Violation::InvalidDynamics {
                    cell,
                    reason: "oscillation amplitude must be non-negative",
                });
            } else if !(finite(base) && base > amplitude) {
                out.push(Violation::InvalidDynamics {
                    cell,
                    reason: "base rate c must exceed the amplitude",
                });
            }
            if !(finite(omega) && omega > 0.0) {
                out.push(Violation::InvalidDynamics {
                    cell,
                    reason: "angular frequency must be positive",
                });
            }
            if !(finite(phi_reset) && (0.0..TAU).contains(&phi_reset)) {
                out.push(Violation::InvalidDynamics {
                    cell,
                    reason: "reset phase must lie in [0, 2pi)",
                });
            }
            if !c.aux0.is_finite() {
                out.push(Violation::InvalidDynamics {
                    cell,
                    reason: "initial phase must be finite",
                });
            }
        }
    }
}

/// Checks every invariant of `spec` and collects all violations.
pub fn validate(spec: NetworkSpec) -> Result<ValidatedNetwork, ValidationError> {
    let mut v = Vec::new();
    let m = spec.cells.len();
    if m < 2 {
        v.push(Violation::TooFewCells { m });
    }
    for (i, c) in spec.cells.iter().enumerate() {
        if !(c.theta.is_finite() && c.theta > 0.0) {
            v.push(Violation::NonPositiveTheta {
                cell: i,
                theta: c.theta,
            });
        } else if !(c.s0.is_finite() && c.s0 >= 0.0 && c.s0 < c.theta) {
            v.push(Violation::InitialSatisfactionOutOfRange {
                cell: i,
                s0: c.s0,
                theta: c.theta,
            });
        }
        check_dynamics(i, c, &mut v);
    }

    let shape_ok = spec.weights.m() == m;
    if !shape_ok {
        v.push(Violation::WeightShape {
            expected: m,
            found: spec.weights.m(),
        });
    } else {
        for i in 0..m {
            let d = spec.weights.get(i, i);
            if d != 0.0 {
                v.push(Violation::NonZeroDiagonal { cell: i, value: d });
            }
        }
        for (i, j, w) in spec.weights.off_diagonal() {
            if !(w.is_finite() && w >= 0.0) {
                v.push(Violation::NegativeWeight {
                    from: i,
                    to: j,
                    value: w,
                });
            }
        }
    }

    let mut core_set = None;
    if let Some(core) = &spec.core {
        let set: BTreeSet<usize> = core.iter().copied().collect();
        if set.is_empty() {
            v.push(Violation::CoreViolation {
                reason: "core is empty".into(),
            });
        } else if set.len() != core.len() {
            v.push(Violation::CoreViolation {
                reason: "core lists a cell more than once".into(),
            });
        } else if let Some(&bad) = set.iter().find(|&&i| i >= m) {
            v.push(Violation::CoreViolation {
                reason: format!("core index {bad} out of range"),
            });
        } else if shape_ok {
            for &i in &set {
                for j in (0..m).filter(|&j| j != i) {
                    let w = spec.weights.get(i, j);
                    if w <= 0.0 {
                        v.push(Violation::CoreViolation {
                            reason: format!("core cell {i} has non-positive action {w} on cell {j}"),
                        });
                    }
                }
            }
        }
        core_set = Some(set);
    }

    for (idx, it) in spec.interferences.iter().enumerate() {
        let bad = |reason: &str| Violation::InvalidInterference {
            index: idx,
            reason: reason.to_string(),
        };
        if it.target >= m {
            v.push(bad("target out of range"));
        }
        match it.kind {
            InterferenceKind::Differential { delta, start, end } => {
                if !(delta.is_finite() && delta > 0.0) {
                    v.push(bad("differential delta must be positive"));
                }
                if !(start.is_finite() && start >= 0.0) {
                    v.push(bad("window start must be finite and non-negative"));
                }
                if let Some(end) = end {
                    if !(end.is_finite() && end > start) {
                        v.push(bad("window end must be finite and after its start"));
                    }
                }
            }
            InterferenceKind::Impulsive { magnitude, at } => {
                if !(magnitude.is_finite() && magnitude > 0.0) {
                    v.push(bad("impulse magnitude must be positive"));
                }
                if !(at.is_finite() && at >= 0.0) {
                    v.push(bad("impulse instant must be finite and non-negative"));
                }
            }
        }
    }

    if !v.is_empty() {
        return Err(ValidationError { violations: v });
    }
    let bounds = spec
        .cells
        .iter()
        .map(|c| g_bounds(&c.dynamics, c.theta))
        .collect();
    Ok(ValidatedNetwork {
        spec,
        bounds,
        core: core_set,
    })
}

/// Which ordered pairs `(sender, receiver)` the minimum interaction ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSet {
    /// All `i != j`.
    Full,
    /// Senders in the core, receivers anywhere.
    Core,
}

pub fn min_weight(net: &ValidatedNetwork, pairs: PairSet) -> Result<f64, ModelError> {
    let w = net.weights();
    match pairs {
        PairSet::Full => Ok(w.off_diagonal().map(|(_, _, d)| d).fold(f64::INFINITY, f64::min)),
        PairSet::Core => {
            let core = net.core().ok_or(ModelError::MissingCore)?;
            Ok(w
                .off_diagonal()
                .filter(|(i, _, _)| core.contains(i))
                .map(|(_, _, d)| d)
                .fold(f64::INFINITY, f64::min))
        }
    }
}

/// Verdict of the "large number of cells" inequality
/// `sqrt(m) > max(sqrt(3), max_theta / min_delta + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CooperativityVerdict {
    pub satisfied: bool,
    /// `sqrt(m) - max(sqrt(3), ratio + 1)`.
    pub margin: f64,
    /// Minimal natural `K >= 1` with `K * min_delta >= max_theta`.
    pub k: u32,
    /// Cell count entering the inequality (the core size in the core form).
    pub m: usize,
    pub max_theta: f64,
    pub min_delta: f64,
}

impl CooperativityVerdict {
    pub fn ratio(&self) -> f64 {
        self.max_theta / self.min_delta
    }
}

fn cooperativity(m: usize, max_theta: f64, min_delta: f64) -> CooperativityVerdict {
    let ratio = max_theta / min_delta;
    let rhs = 3f64.sqrt().max(ratio + 1.0);
    let margin = (m as f64).sqrt() - rhs;
    let k = ratio.ceil().max(1.0) as u32;
    CooperativityVerdict {
        satisfied: margin > 0.0,
        margin,
        k,
        m,
        max_theta,
        min_delta,
    }
}

pub fn hypothesis_large_cooperativity(
    net: &ValidatedNetwork,
) -> Result<CooperativityVerdict, ModelError> {
    let min_delta = min_weight(net, PairSet::Full)?;
    if min_delta <= 0.0 {
        return Err(ModelError::ZeroMinWeight);
    }
    Ok(cooperativity(net.m(), net.max_theta(), min_delta))
}

/// Core form: the minimum ranges over senders in the core and `m` is the
/// core size; the maximum threshold ranges over the whole network.
pub fn hypothesis_core(net: &ValidatedNetwork) -> Result<CooperativityVerdict, ModelError> {
    let core = net.core().ok_or(ModelError::MissingCore)?;
    let min_delta = min_weight(net, PairSet::Core)?;
    if min_delta <= 0.0 {
        return Err(ModelError::ZeroMinWeight);
    }
    Ok(cooperativity(core.len(), net.max_theta(), min_delta))
}

/// Verdict of the similar-cells inequality
/// `(min theta * min g_min) / (max theta * max g_max) > 1 - min_delta / max theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityVerdict {
    pub satisfied: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

pub fn hypothesis_similar_cells(net: &ValidatedNetwork) -> SimilarityVerdict {
    hypothesis_similar_cells_with(net, PairSet::Full).expect("full pair set always defined")
}

pub fn hypothesis_similar_cells_with(
    net: &ValidatedNetwork,
    pairs: PairSet,
) -> Result<SimilarityVerdict, ModelError> {
    let min_delta = min_weight(net, pairs)?;
    let max_theta = net.max_theta();
    let g_min = (0..net.m()).map(|i| net.g_bounds(i).0).fold(f64::INFINITY, f64::min);
    let g_max = (0..net.m()).map(|i| net.g_bounds(i).1).fold(f64::NEG_INFINITY, f64::max);
    let lhs = (net.min_theta() * g_min) / (max_theta * g_max);
    let rhs = 1.0 - min_delta / max_theta;
    Ok(SimilarityVerdict {
        satisfied: lhs > rhs,
        lhs,
        rhs,
        margin: lhs - rhs,
    })
}

/// All hypothesis verdicts applicable to a network, plus the bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// `None` when some weight is zero, so the full-graph form is inapplicable.
    pub large_cooperativity: Option<CooperativityVerdict>,
    pub similar_cells: SimilarityVerdict,
    pub core: Option<CooperativityVerdict>,
    pub transitory_time_bound: f64,
    pub period_bound: Option<f64>,
    pub core_period_bound: Option<f64>,
}

impl HypothesisReport {
    pub fn k(&self) -> Option<u32> {
        self.large_cooperativity.or(self.core).map(|v| v.k)
    }
}

pub fn check_hypotheses(net: &ValidatedNetwork) -> HypothesisReport {
    HypothesisReport {
        large_cooperativity: hypothesis_large_cooperativity(net).ok(),
        similar_cells: hypothesis_similar_cells(net),
        core: hypothesis_core(net).ok(),
        transitory_time_bound: bound_transitory_time(net),
        period_bound: bound_period(net, PairSet::Full).ok(),
        core_period_bound: bound_period(net, PairSet::Core).ok(),
    }
}

/// `max_i theta_i / g_min,i`.
pub fn bound_transitory_time(net: &ValidatedNetwork) -> f64 {
    (0..net.m())
        .map(|i| net.theta(i) / net.g_bounds(i).0)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `1 + max theta / min delta` over the given pair set.
pub fn bound_period(net: &ValidatedNetwork, pairs: PairSet) -> Result<f64, ModelError> {
    let min_delta = min_weight(net, pairs)?;
    if min_delta <= 0.0 {
        return Err(ModelError::ZeroMinWeight);
    }
    Ok(1.0 + net.max_theta() / min_delta)
}

/// Largest parameter-distance radius for which the cooperativity inequality
/// provably survives: solves `(max_theta + r) / (min_delta - r) + 1 = sqrt(m)`.
/// Non-positive when the inequality does not hold.
pub fn critical_radius(verdict: &CooperativityVerdict) -> f64 {
    let sm = (verdict.m as f64).sqrt();
    if sm <= 3f64.sqrt() {
        return 0.0;
    }
    ((sm - 1.0) * verdict.min_delta - verdict.max_theta) / sm
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn family_distance(x: &FreeDynamics, y: &FreeDynamics, theta_scale: f64) -> f64 {
    match (*x, *y) {
        (FreeDynamics::ConstantRate { a }, FreeDynamics::ConstantRate { a: a2 }) => (a - a2).abs(),
        (FreeDynamics::AffineInS { a, b }, FreeDynamics::AffineInS { a: a2, b: b2 }) => {
            (a - a2).abs() + (1.0 + theta_scale) * (b - b2).abs()
        }
        (
            FreeDynamics::OscillatoryAux {
                c,
                amplitude,
                omega,
                phi_reset,
            },
            FreeDynamics::OscillatoryAux {
                c: c2,
                amplitude: amp2,
                omega: omega2,
                phi_reset: phi2,
            },
        ) => ((c - c2).abs() + 2.0 * (amplitude - amp2).abs())
            .max((omega - omega2).abs())
            .max(circular_gap(phi_reset, phi2)),
        _ => unreachable!("family mismatch is rejected before this point"),
    }
}

/// Sup-distance between the parameter vectors of two equally shaped networks.
///
/// The C1 distance between growth functions is replaced by a closed-form
/// upper bound per family; for the affine family the state range entering
/// that bound is `[0, max theta]` over both networks. Initial conditions,
/// cores and interferences are not parameters and are ignored.
pub fn parameter_distance(a: &NetworkSpec, b: &NetworkSpec) -> Result<f64, ModelError> {
    let scale = a.max_theta().max(b.max_theta());
    parameter_distance_with_scale(a, b, scale)
}

/// As [`parameter_distance`] but with a fixed state range `[0, theta_scale]`
/// for the affine C1 bound. With the scale held fixed this is a metric on
/// networks of one shape.
pub fn parameter_distance_with_scale(
    a: &NetworkSpec,
    b: &NetworkSpec,
    theta_scale: f64,
) -> Result<f64, ModelError> {
    if a.m() != b.m() || a.weights.m() != b.weights.m() {
        return Err(ModelError::ShapeMismatch(format!(
            "{} cells vs {} cells",
            a.m(),
            b.m()
        )));
    }
    let mut d: f64 = 0.0;
    for (i, (x, y)) in a.cells.iter().zip(&b.cells).enumerate() {
        if !x.dynamics.same_family(&y.dynamics) {
            return Err(ModelError::ShapeMismatch(format!(
                "cell {i}: {} vs {}",
                x.dynamics.family_name(),
                y.dynamics.family_name()
            )));
        }
        d = d
            .max((x.theta - y.theta).abs())
            .max(family_distance(&x.dynamics, &y.dynamics, theta_scale));
    }
    for ((_, _, w1), (_, _, w2)) in a.weights.off_diagonal().zip(b.weights.off_diagonal()) {
        d = d.max((w1 - w2).abs());
    }
    Ok(d)
}
