use serde::{Deserialize, Serialize};

use crate::engine::Trace;
use crate::error::AnalysisError;

/// Absolute tolerance when comparing inter-event gaps across periods; gaps
/// are differences of absolute event times and carry their rounding.
pub const GAP_TOLERANCE: f64 = 1e-9;

/// Post-transient periodic structure of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncReport {
    /// Instant of the first full-population event.
    pub transitory_time: f64,
    /// Index of that event in the trace.
    pub first_full_event: usize,
    /// Events per period: the count in `(t_0, t_p]` up to the next full event.
    pub period_p: usize,
    /// `I_0 .. I_{p-1}`, with `I_0` the full population.
    pub periodic_clusters: Vec<Vec<usize>>,
    /// `t_1 - t_0, .., t_p - t_{p-1}`.
    pub periodic_isis: Vec<f64>,
    /// Complete periods recorded after `t_0`.
    pub verified_repeats: usize,
}

impl SyncReport {
    pub fn period_duration(&self) -> f64 {
        self.periodic_isis.iter().sum()
    }
}

/// Finds the first two full-population events and checks that every later
/// event repeats the cluster and gap of the event `p` positions earlier.
pub fn detect_full_sync(trace: &Trace, m: usize) -> Result<SyncReport, AnalysisError> {
    let ev = &trace.events;
    let mut full = ev
        .iter()
        .enumerate()
        .filter(|(_, e)| e.cluster.len() == m)
        .map(|(n, _)| n);
    let (n0, n1) = match (full.next(), full.next()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(AnalysisError::NoFullSync),
    };
    let p = n1 - n0;

    for n in n0..ev.len() {
        if n + p < ev.len() && ev[n + p].cluster != ev[n].cluster {
            return Err(AnalysisError::PeriodicityViolated {
                n: n + p,
                detail: format!("cluster {:?} differs from {:?}", ev[n + p].cluster, ev[n].cluster),
            });
        }
        if n + p + 1 < ev.len() {
            let later = ev[n + p + 1].t - ev[n + p].t;
            let earlier = ev[n + 1].t - ev[n].t;
            if (later - earlier).abs() > GAP_TOLERANCE {
                return Err(AnalysisError::PeriodicityViolated {
                    n: n + p + 1,
                    detail: format!("gap {later} differs from {earlier}"),
                });
            }
        }
    }

    Ok(SyncReport {
        transitory_time: ev[n0].t,
        first_full_event: n0,
        period_p: p,
        periodic_clusters: ev[n0..n1].iter().map(|e| e.cluster.clone()).collect(),
        periodic_isis: (n0..n1).map(|n| ev[n + 1].t - ev[n].t).collect(),
        verified_repeats: (ev.len() - 1 - n0) / p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, ClusterEvent, SimConfig};
    use crate::fixtures;
    use crate::model::validate;

    #[test]
    fn net_a_period_one() {
        let spec = fixtures::net_a_spec().with_initial(&[0.9, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05]);
        let net = validate(spec).unwrap();
        let trace = simulate(&net, 10.0, SimConfig::default()).unwrap();
        let sync = detect_full_sync(&trace, 9).unwrap();
        assert!((sync.transitory_time - 0.15).abs() < 1e-12);
        assert_eq!(sync.period_p, 1);
        assert_eq!(sync.periodic_isis.len(), 1);
        assert!((sync.periodic_isis[0] - 1.0).abs() < 1e-12);
        assert_eq!(sync.verified_repeats, 9);
    }

    #[test]
    fn net_b_period_two() {
        let trace = simulate(&fixtures::net_b(), 10.0, SimConfig::default()).unwrap();
        let sync = detect_full_sync(&trace, 16).unwrap();
        assert!((sync.transitory_time - 1.5).abs() < 1e-12);
        assert_eq!(sync.period_p, 2);
        assert_eq!(sync.periodic_clusters[0], (0..16).collect::<Vec<_>>());
        assert_eq!(sync.periodic_clusters[1], vec![0, 1]);
        assert!((sync.periodic_isis[0] - 1.0).abs() < 1e-12);
        assert!((sync.periodic_isis[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_full_sync_with_dead_cell() {
        let events = (1..6)
            .map(|k| ClusterEvent {
                n: k - 1,
                t: k as f64,
                cluster: vec![0],
            })
            .collect();
        let trace = Trace::from_events(2, events, 6.0, vec![0.0, 0.0]);
        assert_eq!(detect_full_sync(&trace, 2), Err(AnalysisError::NoFullSync));
    }

    #[test]
    fn broken_periodicity_detected() {
        let clusters = [vec![0, 1], vec![0], vec![0, 1], vec![1], vec![0, 1]];
        let events = clusters
            .iter()
            .enumerate()
            .map(|(n, c)| ClusterEvent {
                n,
                t: n as f64,
                cluster: c.clone(),
            })
            .collect();
        let trace = Trace::from_events(2, events, 6.0, vec![0.0, 0.0]);
        assert!(matches!(
            detect_full_sync(&trace, 2),
            Err(AnalysisError::PeriodicityViolated { n: 3, .. })
        ));
    }
}
