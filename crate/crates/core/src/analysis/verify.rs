//! End-to-end check of every theorem conclusion over many random initial
//! conditions, plus a robustness probe over perturbed parameters.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::info::information;
use super::risk::{risk_and_protection, RiskReport};
use super::sync::{detect_full_sync, SyncReport};
use crate::engine::{simulate_from, InitialState, SimConfig};
use crate::error::AnalysisError;
use crate::oracle::{compare_traces, fixed_step_simulate, OracleConfig};
use crate::model::{
    bound_period, bound_transitory_time, check_hypotheses, critical_radius, hypothesis_core,
    hypothesis_large_cooperativity, hypothesis_similar_cells_with, parameter_distance, validate,
    CooperativityVerdict, FreeDynamics, HypothesisReport, NetworkSpec, PairSet, SimilarityVerdict,
    ValidatedNetwork,
};

/// Streams at or above this offset drive the robustness probe, so they never
/// collide with the per-initial-condition streams.
const PERTURBATION_STREAM: u64 = 1 << 32;
const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub n_inits: usize,
    /// `None` uses [`required_horizon`].
    pub horizon: Option<f64>,
    pub seed: u64,
    /// Complete periods that must be observed after synchronization.
    pub min_periods: usize,
    pub n_perturbations: usize,
    pub sim: SimConfig,
    /// Step of the fixed-step reference run; `None` skips the comparison.
    pub oracle_dt: Option<f64>,
    pub oracle_inits: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_inits: 50,
            horizon: None,
            seed: 0,
            min_periods: 5,
            n_perturbations: 10,
            sim: SimConfig::default(),
            oracle_dt: None,
            oracle_inits: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Conclusions checked against one form of the hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteReport {
    pub pairs: PairSet,
    pub verdict: CooperativityVerdict,
    pub period_bound: f64,
    pub similar_cells: SimilarityVerdict,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub n_inits: usize,
    pub horizon: f64,
    pub hypotheses: HypothesisReport,
    pub transitory_time_bound: f64,
    /// Period shared by every initial condition, if they agree.
    pub period_p: Option<usize>,
    pub max_transitory_time: Option<f64>,
    pub h_bits: Option<f64>,
    pub min_steady_protection: Option<f64>,
    pub interferences_ignored: usize,
    pub routes: Vec<RouteReport>,
    pub robustness: Check,
    pub oracle: Option<Check>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.routes
            .iter()
            .flat_map(|r| r.checks.iter())
            .chain(std::iter::once(&self.robustness))
            .chain(self.oracle.as_ref())
    }
}

/// Horizon long enough for the transient plus `min_periods + 1` periods of at
/// most `floor(period_bound)` events, each gap being at most the transitory bound.
pub fn required_horizon(net: &ValidatedNetwork, period_bound: f64, min_periods: usize) -> f64 {
    let t_bound = bound_transitory_time(net);
    t_bound * (1.0 + (min_periods as f64 + 1.0) * period_bound.floor()) + 1.0
}

/// `S_i(0)` uniform in `[0, theta_i)`, phases uniform in `[0, 2pi)`.
pub fn random_initial<R: Rng>(net: &ValidatedNetwork, rng: &mut R) -> InitialState {
    let s = net.cells().iter().map(|c| rng.random_range(0.0..c.theta)).collect();
    let aux = net
        .cells()
        .iter()
        .map(|c| if c.dynamics.has_aux() { rng.random_range(0.0..TAU) } else { 0.0 })
        .collect();
    InitialState { s, aux }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Random network within parameter distance `radius` of `spec`. Weights stay
/// non-negative; initial conditions are reset to zero.
pub fn perturb<R: Rng>(spec: &NetworkSpec, radius: f64, rng: &mut R) -> Option<ValidatedNetwork> {
    let scale = 1.0 + spec.max_theta() + radius;
    for _ in 0..100 {
        let mut out = spec.clone();
        let mut sym = |r: f64| if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 };
        for c in &mut out.cells {
            c.theta += sym(radius);
            c.s0 = 0.0;
            c.dynamics = match c.dynamics {
                FreeDynamics::ConstantRate { a } => FreeDynamics::ConstantRate { a: a + sym(radius) },
                FreeDynamics::AffineInS { a, b } => FreeDynamics::AffineInS {
                    a: a + sym(radius / 2.0),
                    b: (b + sym(radius / 2.0) / scale).max(0.0),
                },
                FreeDynamics::OscillatoryAux {
                    c,
                    amplitude,
                    omega,
                    phi_reset,
                } => FreeDynamics::OscillatoryAux {
                    c: c + sym(radius / 2.0),
                    amplitude: (amplitude + sym(radius / 4.0)).max(0.0),
                    omega,
                    phi_reset,
                },
            };
        }
        let m = out.m();
        for i in 0..m {
            for j in (0..m).filter(|&j| j != i) {
                let w = out.weights.get(i, j);
                out.weights.set(i, j, (w + sym(radius)).max(0.0));
            }
        }
        if let Ok(net) = validate(out) {
            return Some(net);
        }
    }
    None
}

struct Outcome {
    sync: Result<SyncReport, AnalysisError>,
    h_bits: Option<f64>,
    risk: Option<RiskReport>,
}

fn run_one(net: &ValidatedNetwork, init: &InitialState, horizon: f64, sim: SimConfig) -> Outcome {
    let sync = simulate_from(net, init, horizon, sim)
        .map_err(AnalysisError::from)
        .and_then(|trace| {
            let s = detect_full_sync(&trace, net.m())?;
            Ok((trace, s))
        });
    match sync {
        Ok((trace, sync)) => {
            let h_bits = information(&sync, None).ok().map(|i| i.h_bits);
            let risk = risk_and_protection(&trace, net, Some(sync.transitory_time)).ok();
            Outcome {
                sync: Ok(sync),
                h_bits,
                risk,
            }
        }
        Err(e) => Outcome {
            sync: Err(e),
            h_bits: None,
            risk: None,
        },
    }
}

fn route_verdict(net: &ValidatedNetwork, pairs: PairSet) -> Option<CooperativityVerdict> {
    let v = match pairs {
        PairSet::Full => hypothesis_large_cooperativity(net),
        PairSet::Core => hypothesis_core(net),
    };
    v.ok().filter(|v| v.satisfied)
}

/// Synchronization, period and information conclusions.
fn core_checks(outcomes: &[Outcome], t_bound: f64, p_bound: f64, min_periods: usize) -> Vec<Check> {
    let p_cap = p_bound.floor() as usize;
    let mut out = Vec::new();

    let mut failures = Vec::new();
    for (k, o) in outcomes.iter().enumerate() {
        match &o.sync {
            Ok(s) if s.transitory_time <= t_bound + BOUND_SLACK => {}
            Ok(s) => failures.push(format!("init {k}: T = {} > {t_bound}", s.transitory_time)),
            Err(e) => failures.push(format!("init {k}: {e}")),
        }
    }
    out.push(Check::new(
        "sync_within_transitory_bound",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} inits synchronized with T <= {t_bound}", outcomes.len())
        } else {
            failures.join("; ")
        },
    ));

    let syncs: Vec<&SyncReport> = outcomes.iter().filter_map(|o| o.sync.as_ref().ok()).collect();
    let mut failures = Vec::new();
    if let Some(first) = syncs.first() {
        for (k, s) in syncs.iter().enumerate() {
            if s.period_p > p_cap {
                failures.push(format!("init {k}: p = {} > {p_cap}", s.period_p));
            }
            if s.periodic_clusters != first.periodic_clusters {
                failures.push(format!("init {k}: periodic clusters differ from init 0"));
            }
            if s.verified_repeats < min_periods {
                failures.push(format!(
                    "init {k}: only {} periods recorded",
                    s.verified_repeats
                ));
            }
        }
    }
    let ok = failures.is_empty() && syncs.len() == outcomes.len();
    out.push(Check::new(
        "period_bound_and_uniqueness",
        ok,
        if ok {
            format!(
                "p = {} <= {p_cap} for every init, >= {min_periods} periods each",
                syncs.first().map_or(0, |s| s.period_p)
            )
        } else if failures.is_empty() {
            "some inits did not synchronize".to_string()
        } else {
            failures.join("; ")
        },
    ));

    let bound_bits = p_bound.log2();
    let mut failures = Vec::new();
    for (k, o) in outcomes.iter().enumerate() {
        match (&o.sync, o.h_bits) {
            (Ok(s), Some(h)) if h == (s.period_p as f64).log2() && h <= bound_bits => {}
            (Ok(s), h) => failures.push(format!("init {k}: H = {h:?} with p = {}", s.period_p)),
            (Err(_), _) => failures.push(format!("init {k}: no synchronization")),
        }
    }
    out.push(Check::new(
        "information_log2_p",
        failures.is_empty(),
        if failures.is_empty() {
            format!("H = log2 p <= {bound_bits} bits")
        } else {
            failures.join("; ")
        },
    ));
    out
}

fn protection_check(outcomes: &[Outcome], m: usize) -> Check {
    let mut failures = Vec::new();
    for (k, o) in outcomes.iter().enumerate() {
        let Some(risk) = &o.risk else {
            failures.push(format!("init {k}: no risk report"));
            continue;
        };
        for c in &risk.cells {
            if c.steady().next().is_none() {
                failures.push(format!("init {k}: cell {} has no steady interval", c.cell));
            }
            for r in c.steady() {
                if !(r.protection > 0.0 && r.net_risk < c.intrinsic_risk) {
                    failures.push(format!(
                        "init {k}: cell {} interval {}: P = {}, R' = {}, R = {}",
                        c.cell, r.isi.h, r.protection, r.net_risk, c.intrinsic_risk
                    ));
                }
            }
        }
    }
    Check::new(
        "protection_positive",
        failures.is_empty(),
        if failures.is_empty() {
            format!("P > 0 and R' < R on every steady interval of all {m} cells")
        } else {
            failures.join("; ")
        },
    )
}

fn similar_check(outcomes: &[Outcome], similar: &SimilarityVerdict) -> Check {
    if !similar.satisfied {
        return Check::new(
            "similar_cells_conclusions",
            true,
            format!("not applicable: margin {}", similar.margin),
        );
    }
    let mut failures = Vec::new();
    for (k, o) in outcomes.iter().enumerate() {
        match &o.sync {
            Ok(s) if s.period_p == 1 => {}
            Ok(s) => failures.push(format!("init {k}: p = {}", s.period_p)),
            Err(_) => failures.push(format!("init {k}: no synchronization")),
        }
        if o.h_bits != Some(0.0) {
            failures.push(format!("init {k}: H = {:?}", o.h_bits));
        }
        if let Some(risk) = &o.risk {
            for (c, r) in risk.steady() {
                if r.protection.min(1.0) != 1.0 || r.net_risk != 0.0 {
                    failures.push(format!(
                        "init {k}: cell {} interval {}: P = {}, R' = {}",
                        c.cell, r.isi.h, r.protection, r.net_risk
                    ));
                }
            }
        }
    }
    Check::new(
        "similar_cells_conclusions",
        failures.is_empty(),
        if failures.is_empty() {
            "p = 1, min(1, P) = 1, R' = 0, H = 0".to_string()
        } else {
            failures.join("; ")
        },
    )
}

/// Perturbs every parameter within half the critical radius and re-checks
/// synchronization, period bound and information on each perturbed network.
fn robustness_probe(
    net: &ValidatedNetwork,
    pairs: PairSet,
    verdict: &CooperativityVerdict,
    cfg: &VerifyConfig,
) -> Check {
    let radius = critical_radius(verdict) / 2.0;
    let results: Vec<Result<(), String>> = (0..cfg.n_perturbations)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(cfg.seed, PERTURBATION_STREAM + k as u64);
            let pert = perturb(net.spec(), radius, &mut rng)
                .ok_or_else(|| format!("perturbation {k}: no valid sample"))?;
            let d = parameter_distance(net.spec(), pert.spec()).map_err(|e| e.to_string())?;
            if d > radius + BOUND_SLACK {
                return Err(format!("perturbation {k}: distance {d} > {radius}"));
            }
            let v = route_verdict(&pert, pairs)
                .ok_or_else(|| format!("perturbation {k}: hypothesis lost"))?;
            let p_bound = 1.0 + v.ratio();
            let horizon = required_horizon(&pert, p_bound, cfg.min_periods);
            let init = random_initial(&pert, &mut rng);
            let outcome = [run_one(&pert, &init, horizon, cfg.sim)];
            let checks = core_checks(&outcome, bound_transitory_time(&pert), p_bound, cfg.min_periods);
            match checks.iter().find(|c| !c.passed) {
                Some(c) => Err(format!("perturbation {k}: {}: {}", c.name, c.detail)),
                None => Ok(()),
            }
        })
        .collect();
    let failures: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    Check::new(
        "robustness",
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{} perturbations within distance {radius}: synchronization persists",
                cfg.n_perturbations
            )
        } else {
            failures.join("; ")
        },
    )
}

/// Engine against the fixed-step reference on each initial condition:
/// identical clusters, event times within ten steps.
fn oracle_check(
    net: &ValidatedNetwork,
    inits: &[InitialState],
    horizon: f64,
    dt: f64,
    sim: SimConfig,
) -> Check {
    let tol = 10.0 * dt;
    let results: Vec<Result<f64, String>> = inits
        .par_iter()
        .enumerate()
        .map(|(k, init)| {
            let engine = simulate_from(net, init, horizon, sim).map_err(|e| format!("init {k}: {e}"))?;
            let oracle = fixed_step_simulate(net, init, OracleConfig { dt, horizon })
                .map_err(|e| format!("init {k}: {e}"))?;
            let r = compare_traces(&engine, &oracle, tol, true);
            if r.within_tolerance {
                Ok(r.max_time_deviation)
            } else {
                Err(format!(
                    "init {k}: deviation {}, {} cluster mismatches, {} unmatched",
                    r.max_time_deviation,
                    r.cluster_mismatches.len(),
                    r.unmatched
                ))
            }
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(d) => worst = worst.max(d),
            Err(e) => failures.push(e),
        }
    }
    Check::new(
        "oracle_equivalence",
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{} inits up to t = {horizon}: clusters identical, max deviation {worst:e} <= {tol:e}",
                inits.len()
            )
        } else {
            failures.join("; ")
        },
    )
}

/// Runs the full verification. Interferences are stripped; the theorems
/// concern the unperturbed network.
pub fn verify_theorems(net: &ValidatedNetwork, cfg: &VerifyConfig) -> Result<VerificationReport, AnalysisError> {
    let interferences_ignored = net.interferences().len();
    let net = net.without_interferences();
    let hypotheses = check_hypotheses(&net);

    let mut routes: Vec<(PairSet, CooperativityVerdict)> = Vec::new();
    for pairs in [PairSet::Full, PairSet::Core] {
        if let Some(v) = route_verdict(&net, pairs) {
            routes.push((pairs, v));
        }
    }
    if routes.is_empty() {
        let why = match (&hypotheses.large_cooperativity, &hypotheses.core) {
            (None, None) => "minimum weight is zero and no core satisfies the core form".to_string(),
            (Some(v), _) | (None, Some(v)) => format!("margin {} <= 0", v.margin),
        };
        return Err(AnalysisError::HypothesisNotSatisfied(why));
    }

    let loosest = routes
        .iter()
        .map(|(pairs, _)| bound_period(&net, *pairs))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let required = required_horizon(&net, loosest, cfg.min_periods);
    let horizon = match cfg.horizon {
        Some(h) if h < required => {
            return Err(AnalysisError::HorizonTooShort { given: h, required });
        }
        Some(h) => h,
        None => required,
    };

    let inits: Vec<InitialState> = (0..cfg.n_inits)
        .map(|k| random_initial(&net, &mut stream_rng(cfg.seed, k as u64)))
        .collect();
    let outcomes: Vec<Outcome> = inits
        .par_iter()
        .map(|init| run_one(&net, init, horizon, cfg.sim))
        .collect();

    let t_bound = bound_transitory_time(&net);
    let oracle = cfg.oracle_dt.map(|dt| {
        let n = cfg.oracle_inits.min(inits.len());
        oracle_check(&net, &inits[..n], horizon.min(4.0 * t_bound + 1.0), dt, cfg.sim)
    });
    let mut route_reports = Vec::new();
    for (pairs, verdict) in &routes {
        let p_bound = bound_period(&net, *pairs)?;
        let similar = hypothesis_similar_cells_with(&net, *pairs)?;
        let mut checks = core_checks(&outcomes, t_bound, p_bound, cfg.min_periods);
        checks.push(protection_check(&outcomes, net.m()));
        checks.push(similar_check(&outcomes, &similar));
        route_reports.push(RouteReport {
            pairs: *pairs,
            verdict: *verdict,
            period_bound: p_bound,
            similar_cells: similar,
            checks,
        });
    }
    let (pairs, verdict) = routes[0];
    let robustness = robustness_probe(&net, pairs, &verdict, cfg);

    let syncs: Vec<&SyncReport> = outcomes.iter().filter_map(|o| o.sync.as_ref().ok()).collect();
    let all_synced = syncs.len() == outcomes.len() && !syncs.is_empty();
    let period_p = syncs
        .first()
        .map(|s| s.period_p)
        .filter(|&p| all_synced && syncs.iter().all(|s| s.period_p == p));
    let max_transitory_time = all_synced.then(|| {
        syncs
            .iter()
            .map(|s| s.transitory_time)
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let h_bits = period_p.map(|p| (p as f64).log2());
    let min_steady_protection = outcomes
        .iter()
        .filter_map(|o| o.risk.as_ref())
        .flat_map(|r| r.steady().map(|(_, i)| i.protection))
        .reduce(f64::min);

    let mut report = VerificationReport {
        seed: cfg.seed,
        n_inits: cfg.n_inits,
        horizon,
        hypotheses,
        transitory_time_bound: t_bound,
        period_p,
        max_transitory_time,
        h_bits,
        min_steady_protection,
        interferences_ignored,
        routes: route_reports,
        robustness,
        oracle,
        passed: false,
    };
    let passed = report.checks().all(|c| c.passed);
    report.passed = passed;
    Ok(report)
}
