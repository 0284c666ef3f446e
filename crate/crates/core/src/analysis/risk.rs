use serde::{Deserialize, Serialize};

use crate::engine::Trace;
use crate::error::AnalysisError;
use crate::model::ValidatedNetwork;

/// Agreement required between the direct and the factored net-risk formulas.
pub const RISK_IDENTITY_TOLERANCE: f64 = 1e-12;

/// The `h`-th inter-spike interval `(start, end]` of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Isi {
    pub h: usize,
    pub start: f64,
    pub end: f64,
}

/// Closed intervals between consecutive spikes, starting from `t(0) = 0`.
pub fn cell_isis(trace: &Trace, cell: usize) -> Vec<Isi> {
    let mut prev = 0.0;
    trace.per_cell_spikes[cell]
        .iter()
        .enumerate()
        .map(|(h, &t)| {
            let isi = Isi { h, start: prev, end: t };
            prev = t;
            isi
        })
        .collect()
}

fn action_over(trace: &Trace, net: &ValidatedNetwork, cell: usize, isi: &Isi) -> f64 {
    let ev = &trace.events;
    let from = ev.partition_point(|e| e.t <= isi.start);
    ev[from..]
        .iter()
        .take_while(|e| e.t <= isi.end)
        .flat_map(|e| e.cluster.iter())
        .filter(|&&j| j != cell)
        .map(|&j| net.weight(j, cell))
        .sum()
}

/// Sum of `Delta(j, cell)` over every event in the interval (right end
/// included) and every other member `j` of its cluster, cluster mates at the
/// closing spike included.
pub fn net_action(trace: &Trace, net: &ValidatedNetwork, cell: usize, h: usize) -> Result<f64, AnalysisError> {
    let isi = cell_isis(trace, cell)
        .get(h)
        .copied()
        .ok_or(AnalysisError::NoSuchInterval { cell, h })?;
    Ok(action_over(trace, net, cell, &isi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsiRisk {
    pub isi: Isi,
    pub net_action: f64,
    /// `net_action / theta`.
    pub protection: f64,
    /// `max(0, min(1, (theta - net_action) / max theta))`.
    pub net_risk: f64,
    /// `max(0, min(1, (1 - protection) * intrinsic))`.
    pub net_risk_factored: f64,
    /// The interval starts at or after the transitory time.
    pub steady: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRisk {
    pub cell: usize,
    /// `theta / max theta`.
    pub intrinsic_risk: f64,
    pub intervals: Vec<IsiRisk>,
}

impl CellRisk {
    pub fn steady(&self) -> impl Iterator<Item = &IsiRisk> {
        self.intervals.iter().filter(|r| r.steady)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub cells: Vec<CellRisk>,
}

impl RiskReport {
    pub fn steady(&self) -> impl Iterator<Item = (&CellRisk, &IsiRisk)> {
        self.cells.iter().flat_map(|c| c.steady().map(move |r| (c, r)))
    }
}

/// Risk and protection for every closed interval of every cell. Intervals
/// starting at or after `transitory_time` are marked steady; with `None`
/// all are transient.
pub fn risk_and_protection(
    trace: &Trace,
    net: &ValidatedNetwork,
    transitory_time: Option<f64>,
) -> Result<RiskReport, AnalysisError> {
    let max_theta = net.max_theta();
    let mut cells = Vec::with_capacity(net.m());
    for i in 0..net.m() {
        let theta = net.theta(i);
        let intrinsic = theta / max_theta;
        let mut intervals = Vec::new();
        for isi in cell_isis(trace, i) {
            let action = action_over(trace, net, i, &isi);
            let protection = action / theta;
            let direct = ((theta - action) / max_theta).clamp(0.0, 1.0);
            let factored = ((1.0 - protection) * intrinsic).clamp(0.0, 1.0);
            if (direct - factored).abs() > RISK_IDENTITY_TOLERANCE {
                return Err(AnalysisError::RiskIdentityViolated {
                    cell: i,
                    h: isi.h,
                    direct,
                    factored,
                });
            }
            intervals.push(IsiRisk {
                isi,
                net_action: action,
                protection,
                net_risk: direct,
                net_risk_factored: factored,
                steady: transitory_time.is_some_and(|t| isi.start >= t),
            });
        }
        cells.push(CellRisk {
            cell: i,
            intrinsic_risk: intrinsic,
            intervals,
        });
    }
    Ok(RiskReport { cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, ClusterEvent, SimConfig};
    use crate::fixtures;
    use crate::model::validate;

    #[test]
    fn net_a_isis() {
        let spec = fixtures::net_a_spec().with_initial(&[0.9, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05]);
        let net = validate(spec).unwrap();
        let trace = simulate(&net, 3.0, SimConfig::default()).unwrap();
        let isis = cell_isis(&trace, 0);
        let expect = [(0.0, 0.1), (0.1, 0.15), (0.15, 1.15), (1.15, 2.15)];
        assert_eq!(isis.len(), expect.len());
        for (isi, (a, b)) in isis.iter().zip(expect) {
            assert!((isi.start - a).abs() < 1e-12 && (isi.end - b).abs() < 1e-12);
        }
        let steady = net_action(&trace, &net, 3, 2).unwrap();
        assert!((steady - 6.4).abs() < 1e-12);
    }

    #[test]
    fn net_b_slow_cell_action() {
        let net = fixtures::net_b();
        let trace = simulate(&net, 6.0, SimConfig::default()).unwrap();
        let isis = cell_isis(&trace, 15);
        assert!((isis[0].end - 1.5).abs() < 1e-12);
        assert!((isis[1].end - 3.0).abs() < 1e-12);
        let action = net_action(&trace, &net, 15, 1).unwrap();
        assert!((action - 5.95).abs() < 1e-12);

        let report = risk_and_protection(&trace, &net, Some(1.5)).unwrap();
        let r = &report.cells[15];
        assert_eq!(r.intrinsic_risk, 1.0);
        let steady = r.intervals[1];
        assert!(steady.steady && !r.intervals[0].steady);
        assert!((steady.protection - 5.95).abs() < 1e-12);
        assert_eq!(steady.net_risk, 0.0);
    }

    #[test]
    fn never_spiking_cell_has_no_intervals() {
        let events = vec![ClusterEvent {
            n: 0,
            t: 1.0,
            cluster: vec![0],
        }];
        let trace = Trace::from_events(2, events, 2.0, vec![0.0, 0.0]);
        assert!(cell_isis(&trace, 1).is_empty());
        assert!(matches!(
            net_action(&trace, &fixtures::net_a(), 1, 0),
            Err(AnalysisError::NoSuchInterval { cell: 1, h: 0 })
        ));
    }

    #[test]
    fn isolated_interval_receives_nothing() {
        let events = vec![
            ClusterEvent { n: 0, t: 1.0, cluster: vec![0] },
            ClusterEvent { n: 1, t: 2.0, cluster: vec![0] },
        ];
        let trace = Trace::from_events(9, events, 3.0, vec![0.0; 9]);
        let net = fixtures::net_a();
        assert_eq!(net_action(&trace, &net, 0, 1).unwrap(), 0.0);
        let report = risk_and_protection(&trace, &net, Some(0.0)).unwrap();
        let r = report.cells[0].intervals[1];
        assert_eq!(r.protection, 0.0);
        assert_eq!(r.net_risk, report.cells[0].intrinsic_risk);
    }

    #[test]
    fn half_threshold_cell() {
        // theta 0.5 next to theta 1; one quarter of cooperation received
        let mut spec = fixtures::uniform_constant(2, 1.0, 1.0, 0.25);
        spec.cells[0].theta = 0.5;
        let net = validate(spec).unwrap();
        let events = vec![
            ClusterEvent { n: 0, t: 0.2, cluster: vec![1] },
            ClusterEvent { n: 1, t: 0.5, cluster: vec![0] },
        ];
        let trace = Trace::from_events(2, events, 1.0, vec![0.0, 0.0]);
        let report = risk_and_protection(&trace, &net, Some(0.0)).unwrap();
        let r = &report.cells[0];
        assert_eq!(r.intrinsic_risk, 0.5);
        assert_eq!(r.intervals[0].protection, 0.5);
        assert_eq!(r.intervals[0].net_risk, 0.25);
    }
}
