use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::sync::SyncReport;
use crate::engine::Trace;
use crate::error::AnalysisError;

/// A word of consecutive cluster sets.
pub type Pattern = Vec<Vec<usize>>;

/// Recurrent length-`k` code patterns: the cyclic windows
/// `(I_r, .., I_{r+k-1})`, `0 <= r < p`, of the periodic cluster sequence.
pub fn enumerate_patterns(sync: &SyncReport, k: usize) -> BTreeSet<Pattern> {
    assert!(k >= 1, "pattern length must be at least 1");
    let seq = &sync.periodic_clusters;
    let p = seq.len();
    (0..p)
        .map(|r| (0..k).map(|q| seq[(r + q) % p].clone()).collect())
        .collect()
}

/// Distinct length-`k` windows in the raw trace after the event at index
/// `from`. Only a cross-check for [`enumerate_patterns`].
pub fn empirical_pattern_count(trace: &Trace, from: usize, k: usize) -> usize {
    let tail = &trace.events[from.min(trace.events.len())..];
    tail.windows(k)
        .map(|w| w.iter().map(|e| e.cluster.clone()).collect::<Pattern>())
        .collect::<BTreeSet<_>>()
        .len()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoReport {
    /// `k -> #P_k` for `k = 1..=p`.
    pub pattern_counts: BTreeMap<usize, usize>,
    /// `log2(max_k #P_k)`.
    pub h_bits: f64,
    /// `log2` of the period bound, when one was supplied.
    pub bound_bits: Option<f64>,
}

/// Total amount of information of the periodic regime.
///
/// Verifies `#P_k <= p` for every enumerated `k` and `#P_p = p`; with a
/// period bound, also `H <= log2(bound)`.
pub fn information(sync: &SyncReport, period_bound: Option<f64>) -> Result<InfoReport, AnalysisError> {
    let p = sync.period_p;
    let mut pattern_counts = BTreeMap::new();
    for k in 1..=p {
        let count = enumerate_patterns(sync, k).len();
        if count > p {
            return Err(AnalysisError::PatternLawViolated(format!(
                "#P_{k} = {count} exceeds p = {p}"
            )));
        }
        pattern_counts.insert(k, count);
    }
    let max = pattern_counts.values().copied().max().unwrap_or(1);
    if pattern_counts.get(&p) != Some(&p) {
        return Err(AnalysisError::PatternLawViolated(format!(
            "#P_p = {:?}, expected {p}",
            pattern_counts.get(&p)
        )));
    }
    let h_bits = (max as f64).log2();
    let bound_bits = period_bound.map(f64::log2);
    if let Some(b) = bound_bits {
        if h_bits > b {
            return Err(AnalysisError::PatternLawViolated(format!(
                "H = {h_bits} bits exceeds the bound {b}"
            )));
        }
    }
    Ok(InfoReport {
        pattern_counts,
        h_bits,
        bound_bits,
    })
}
