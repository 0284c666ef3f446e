//! Brute-force reference simulator: fixed time steps with a threshold check
//! at every step, independent of the engine's hit-time root finding.
//!
//! Within a step the exact families are advanced in closed form and the
//! oscillatory family by one RK4 step. Cells crossing their threshold in the
//! same step spike together at the linearly interpolated earliest crossing;
//! the avalanche itself reuses [`crate::engine::cascade`].

use serde::{Deserialize, Serialize};

use crate::engine::{cascade, ClusterEvent, InitialState, Trace};
use crate::error::EngineError;
use crate::model::{FreeDynamics, InterferenceKind, ValidatedNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub dt: f64,
    pub horizon: f64,
}

fn advance(dynamics: &FreeDynamics, s: f64, aux: f64, delta: f64, h: f64) -> f64 {
    let next = match *dynamics {
        FreeDynamics::ConstantRate { a } => s + (a - delta) * h,
        FreeDynamics::AffineInS { a, b: 0.0 } => s + (a - delta) * h,
        FreeDynamics::AffineInS { a, b } => {
            let eq = (a - delta) / b;
            eq + (s - eq) * (-b * h).exp()
        }
        FreeDynamics::OscillatoryAux {
            c,
            amplitude,
            omega,
            ..
        } => {
            let rate = |phi: f64| c + amplitude * phi.sin() - delta;
            let k1 = rate(aux);
            let k2 = rate(aux + 0.5 * h * omega);
            let k3 = k2;
            let k4 = rate(aux + h * omega);
            s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        }
    };
    next.max(0.0)
}

fn phase_speed(dynamics: &FreeDynamics) -> f64 {
    match *dynamics {
        FreeDynamics::OscillatoryAux { omega, .. } => omega,
        _ => 0.0,
    }
}

pub fn fixed_step_simulate(
    net: &ValidatedNetwork,
    init: &InitialState,
    cfg: OracleConfig,
) -> Result<Trace, EngineError> {
    if !(cfg.horizon.is_finite() && cfg.horizon > 0.0) {
        return Err(EngineError::InvalidHorizon(cfg.horizon));
    }
    if !(cfg.dt.is_finite() && cfg.dt > 0.0) {
        return Err(EngineError::InvalidInitialState(format!("oracle step {} must be positive", cfg.dt)));
    }
    init.check(net)?;

    let m = net.m();
    let mut marks: Vec<f64> = Vec::new();
    for it in net.interferences() {
        match it.kind {
            InterferenceKind::Differential { start, end, .. } => {
                marks.push(start);
                marks.extend(end);
            }
            InterferenceKind::Impulsive { at, .. } => marks.push(at),
        }
    }
    marks.sort_by(f64::total_cmp);
    marks.dedup();

    let drift_cut = |i: usize, t: f64| -> f64 {
        net.interferences()
            .iter()
            .filter(|it| it.target == i)
            .filter_map(|it| match it.kind {
                InterferenceKind::Differential { delta, start, end }
                    if start <= t && end.is_none_or(|e| t < e) =>
                {
                    Some(delta)
                }
                _ => None,
            })
            .sum()
    };
    let kick = |s: &mut [f64], t: f64| {
        for it in net.interferences() {
            if let InterferenceKind::Impulsive { magnitude, at } = it.kind {
                if at == t {
                    s[it.target] = (s[it.target] - magnitude).max(0.0);
                }
            }
        }
    };

    let mut s = init.s.clone();
    let mut aux = init.aux.clone();
    let mut t = 0.0;
    kick(&mut s, 0.0);
    let mut events = Vec::new();
    let mut next_mark = marks.partition_point(|&b| b <= 0.0);

    while t < cfg.horizon {
        let mark = marks.get(next_mark).copied().filter(|&b| b <= cfg.horizon);
        let stop = mark.unwrap_or(cfg.horizon);
        let h = cfg.dt.min(stop - t);
        let at_stop = h == stop - t;
        let deltas: Vec<f64> = (0..m).map(|i| drift_cut(i, t)).collect();
        let trial: Vec<f64> = (0..m)
            .map(|i| advance(&net.cell(i).dynamics, s[i], aux[i], deltas[i], h))
            .collect();
        let crossers: Vec<usize> = (0..m).filter(|&i| trial[i] >= net.theta(i)).collect();

        if crossers.is_empty() {
            s = trial;
            for (i, phase) in aux.iter_mut().enumerate() {
                *phase += phase_speed(&net.cell(i).dynamics) * h;
            }
            t = if at_stop { stop } else { t + h };
            if at_stop && mark.is_some() {
                kick(&mut s, t);
                next_mark += 1;
            }
            continue;
        }

        let tau = crossers
            .iter()
            .map(|&i| h * (net.theta(i) - s[i]) / (trial[i] - s[i]))
            .fold(f64::INFINITY, f64::min)
            .clamp(0.0, h);
        let mut s_pre = vec![0.0; m];
        for i in 0..m {
            let dynamics = &net.cell(i).dynamics;
            s_pre[i] = if crossers.contains(&i) {
                net.theta(i)
            } else {
                advance(dynamics, s[i], aux[i], deltas[i], tau)
            };
            aux[i] += phase_speed(dynamics) * tau;
        }
        let res = cascade(net, &s_pre, &crossers);
        s = res.s_post;
        for &i in &res.cluster {
            aux[i] = net.cell(i).dynamics.reset_aux();
        }
        let reached_stop = tau == h && at_stop;
        t = if reached_stop { stop } else { t + tau };
        events.push(ClusterEvent {
            n: events.len(),
            t,
            cluster: res.cluster,
        });
        if reached_stop && mark.is_some() {
            kick(&mut s, t);
            next_mark += 1;
        }
    }
    Ok(Trace::from_events(m, events, cfg.horizon, init.s.clone()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub matched: usize,
    pub max_time_deviation: f64,
    /// Indices (in matching order) whose clusters differ.
    pub cluster_mismatches: Vec<usize>,
    /// Events without a partner, excluding those within `time_tol` of the horizon.
    pub unmatched: usize,
    /// Trailing unmatched events within `time_tol` of the horizon.
    pub edge_unmatched: usize,
    pub within_tolerance: bool,
}

/// Pairs events in order and reports the worst time deviation and any
/// cluster disagreement.
pub fn compare_traces(a: &Trace, b: &Trace, time_tol: f64, require_equal_clusters: bool) -> ComparisonReport {
    let matched = a.events.len().min(b.events.len());
    let mut max_dev: f64 = 0.0;
    let mut mismatches = Vec::new();
    for (k, (x, y)) in a.events.iter().zip(&b.events).enumerate() {
        max_dev = max_dev.max((x.t - y.t).abs());
        if x.cluster != y.cluster {
            mismatches.push(k);
        }
    }
    let horizon = a.horizon.min(b.horizon);
    let longer = if a.events.len() > b.events.len() { a } else { b };
    let tail = &longer.events[matched..];
    let edge_unmatched = tail.iter().filter(|e| (e.t - horizon).abs() <= time_tol).count();
    let unmatched = tail.len() - edge_unmatched;
    let within_tolerance =
        max_dev <= time_tol && unmatched == 0 && (!require_equal_clusters || mismatches.is_empty());
    ComparisonReport {
        matched,
        max_time_deviation: max_dev,
        cluster_mismatches: mismatches,
        unmatched,
        edge_unmatched,
        within_tolerance,
    }
}
