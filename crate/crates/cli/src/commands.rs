use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use pulsenet_core::analysis::{
    detect_full_sync, information, random_initial, risk_and_protection, verify_theorems, InfoReport,
    RiskReport, SyncReport, VerificationReport, VerifyConfig,
};
use pulsenet_core::engine::detect_death;
use pulsenet_core::model::{
    bound_period, check_hypotheses, hypothesis_core, hypothesis_large_cooperativity, HypothesisReport,
    PairSet,
};
use pulsenet_core::oracle::{compare_traces, fixed_step_simulate, ComparisonReport, OracleConfig};
use pulsenet_core::{
    simulate_from, validate, AnalysisError, CellSpec, FreeDynamics, InitialState, NetworkSpec, WeightMatrix,
};

use crate::config::ConfigFile;
use crate::error::{CliError, Result};
use crate::trace_io;

#[derive(Debug, Parser)]
#[command(name = "pulsenet", version, about = "Simulate and verify pulse-coupled cooperative networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a random network configuration
    Gen(GenArgs),
    /// Evaluate the hypotheses and bounds of a configuration
    Check(CheckArgs),
    /// Simulate and write the trace as CSV
    Simulate(SimulateArgs),
    /// Synchronization, information and risk of a recorded trace
    Analyze(AnalyzeArgs),
    /// Check every theorem conclusion over random initial conditions
    Verify(VerifyArgs),
    /// Run verify over a grid of uniform weights and thresholds
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Constant,
    Affine,
    Oscillatory,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = Family::Constant)]
    pub family: Family,
    #[arg(long, default_value_t = 1.0)]
    pub theta_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub theta_max: f64,
    #[arg(long, default_value_t = 0.5)]
    pub delta_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta_max: f64,
    /// Range of the base growth parameter (`a` or `c`).
    #[arg(long, default_value_t = 1.0)]
    pub rate_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rate_max: f64,
    /// Upper limit of the affine decay `b`.
    #[arg(long, default_value_t = 0.2)]
    pub b_max: f64,
    /// Oscillation amplitude as a fraction of `c`.
    #[arg(long, default_value_t = 0.5)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Core mode: the first `core` cells act on everyone, the rest may be silent.
    #[arg(long)]
    pub core: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub ensure_hypothesis: bool,
    #[arg(long, default_value_t = 1000)]
    pub max_tries: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Requirement {
    /// Large cooperativity in full or core form
    Any,
    LargeCooperativity,
    Core,
    SimilarCells,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value_t = Requirement::Any)]
    pub require: Requirement,
    /// Also write the report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Event CSV; the per-cell file is written next to it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Draw the initial state from this seed instead of the configured `s0`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also run the fixed-step reference and compare.
    #[arg(long)]
    pub oracle_dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub trace: PathBuf,
    /// Horizon of the recorded run; defaults to the configured one, then the last event.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = 3.0)]
    pub quiescence_factor: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub n_inits: usize,
    /// Defaults to `sim.rng_seed` of the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub n_perturbations: usize,
    /// Defaults to `oracle.dt` of the configuration; without either the comparison is skipped.
    #[arg(long)]
    pub oracle_dt: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub oracle_inits: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Uniform off-diagonal weights to try.
    #[arg(long, value_delimiter = ',')]
    pub delta: Vec<f64>,
    /// Uniform thresholds to try.
    #[arg(long, value_delimiter = ',')]
    pub theta: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub n_inits: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 4)]
    pub n_perturbations: usize,
    /// Summary CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Gen(a) => gen(&a, stdout),
        Command::Check(a) => check(&a, stdout),
        Command::Simulate(a) => simulate(&a, stdout),
        Command::Analyze(a) => analyze(&a, stdout),
        Command::Verify(a) => verify(&a, stdout),
        Command::Sweep(a) => sweep(&a, stdout),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => write_file(p, text),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn check_range(name: &str, lo: f64, hi: f64) -> Result<()> {
    if lo > 0.0 && lo <= hi && hi.is_finite() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("{name} range [{lo}, {hi}] must be positive and ordered")))
    }
}

fn draw(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn sample_network(a: &GenArgs, rng: &mut ChaCha8Rng) -> NetworkSpec {
    let cells: Vec<CellSpec> = (0..a.m)
        .map(|_| {
            let theta = draw(rng, a.theta_min, a.theta_max);
            let rate = draw(rng, a.rate_min, a.rate_max);
            let dynamics = match a.family {
                Family::Constant => FreeDynamics::ConstantRate { a: rate },
                Family::Affine => {
                    let cap = a.b_max.min(0.9 * rate / theta);
                    FreeDynamics::AffineInS {
                        a: rate,
                        b: draw(rng, 0.0, cap),
                    }
                }
                Family::Oscillatory => FreeDynamics::OscillatoryAux {
                    c: rate,
                    amplitude: a.amplitude * rate,
                    omega: a.omega,
                    phi_reset: 0.0,
                },
            };
            CellSpec::new(theta, dynamics)
        })
        .collect();
    let mut w = WeightMatrix::zeros(a.m);
    let core = a.core.unwrap_or(a.m);
    for j in 0..a.m {
        for i in (0..a.m).filter(|&i| i != j) {
            let silent = j >= core && rng.random_bool(0.5);
            let v = if silent { 0.0 } else { draw(rng, a.delta_min, a.delta_max) };
            w.set(j, i, v);
        }
    }
    let mut spec = NetworkSpec::new(cells, w);
    spec.core = a.core.map(|c| (0..c).collect());
    spec
}

fn gen(a: &GenArgs, stdout: &mut dyn Write) -> Result<()> {
    if a.m < 2 {
        return Err(CliError::Invalid("at least 2 cells are required".into()));
    }
    check_range("theta", a.theta_min, a.theta_max)?;
    check_range("delta", a.delta_min, a.delta_max)?;
    check_range("rate", a.rate_min, a.rate_max)?;
    if !(0.0..1.0).contains(&a.amplitude) || a.b_max < 0.0 || a.omega <= 0.0 {
        return Err(CliError::Invalid("need 0 <= amplitude < 1, b_max >= 0, omega > 0".into()));
    }
    if let Some(c) = a.core.filter(|&c| c == 0 || c > a.m) {
        return Err(CliError::Invalid(format!("core size {c} must be in 1..={}", a.m)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let tries = if a.ensure_hypothesis { a.max_tries.max(1) } else { 1 };
    let mut last_margin = f64::NEG_INFINITY;
    for attempt in 1..=tries {
        let spec = sample_network(a, &mut rng);
        let net = validate(spec.clone()).map_err(|e| CliError::Invalid(e.to_string()))?;
        let verdict = match a.core {
            Some(_) => hypothesis_core(&net),
            None => hypothesis_large_cooperativity(&net),
        };
        let margin = verdict.as_ref().map_or(f64::NEG_INFINITY, |v| v.margin);
        last_margin = last_margin.max(margin);
        if a.ensure_hypothesis && !verdict.is_ok_and(|v| v.satisfied) {
            continue;
        }
        let mut cfg = ConfigFile::new(spec);
        cfg.sim.rng_seed = a.seed;
        eprintln!("sample {attempt}: hypothesis margin {margin}");
        return emit(&cfg.to_json(), a.out.as_deref(), stdout);
    }
    Err(CliError::Invalid(format!(
        "no sample out of {tries} satisfies the {} hypothesis (best margin {last_margin})",
        if a.core.is_some() { "core" } else { "large cooperativity" }
    )))
}

fn verdict_line(name: &str, v: Option<&pulsenet_core::model::CooperativityVerdict>) -> String {
    match v {
        Some(v) => format!(
            "{name}: {} margin={} K={} m={} max_theta={} min_delta={}",
            v.satisfied, v.margin, v.k, v.m, v.max_theta, v.min_delta
        ),
        None => format!("{name}: not applicable"),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| x.to_string())
}

fn check(a: &CheckArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = ConfigFile::load(&a.config)?;
    let net = cfg.validated()?;
    let r: HypothesisReport = check_hypotheses(&net);
    let s = r.similar_cells;
    let text = [
        verdict_line("large_cooperativity", r.large_cooperativity.as_ref()),
        verdict_line("core", r.core.as_ref()),
        format!("similar_cells: {} lhs={} rhs={} margin={}", s.satisfied, s.lhs, s.rhs, s.margin),
        format!("transitory_time_bound: {}", r.transitory_time_bound),
        format!("period_bound: {}", opt(r.period_bound)),
        format!("core_period_bound: {}", opt(r.core_period_bound)),
    ]
    .join("\n")
        + "\n";
    stdout.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))?;
    if let Some(p) = &a.out {
        write_file(p, &to_json(&r))?;
    }
    let holds = |v: Option<pulsenet_core::model::CooperativityVerdict>| v.is_some_and(|v| v.satisfied);
    let ok = match a.require {
        Requirement::Any => holds(r.large_cooperativity) || holds(r.core),
        Requirement::LargeCooperativity => holds(r.large_cooperativity),
        Requirement::Core => holds(r.core),
        Requirement::SimilarCells => s.satisfied,
    };
    if ok {
        Ok(())
    } else {
        Err(CliError::Failed(format!("required hypothesis {:?} does not hold", a.require)))
    }
}

#[derive(Serialize)]
struct SimulateSummary {
    seed: Option<u64>,
    horizon: f64,
    events: usize,
    full_events: usize,
    presumed_dead: Vec<usize>,
    oracle: Option<ComparisonReport>,
}

fn horizon_of(given: Option<f64>, cfg: &ConfigFile) -> Result<f64> {
    let h = given
        .or(cfg.sim.horizon)
        .ok_or_else(|| CliError::Invalid("no horizon: pass --horizon or set sim.horizon".into()))?;
    if h.is_finite() && h > 0.0 {
        Ok(h)
    } else {
        Err(CliError::Invalid(format!("horizon {h} must be positive")))
    }
}

fn simulate(a: &SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = ConfigFile::load(&a.config)?;
    let net = cfg.validated()?;
    let horizon = horizon_of(a.horizon, &cfg)?;
    let init = match a.seed {
        Some(seed) => random_initial(&net, &mut ChaCha8Rng::seed_from_u64(seed)),
        None => InitialState::from_network(&net),
    };
    let trace = simulate_from(&net, &init, horizon, cfg.sim.sim_config())
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    trace_io::save(&trace, &a.out)?;

    let oracle = match a.oracle_dt.or(cfg.oracle.map(|o| o.dt)) {
        Some(dt) => {
            let reference = fixed_step_simulate(&net, &init, OracleConfig { dt, horizon })
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            Some(compare_traces(&trace, &reference, 10.0 * dt, true))
        }
        None => None,
    };
    let summary = SimulateSummary {
        seed: a.seed,
        horizon,
        events: trace.events.len(),
        full_events: (0..trace.events.len()).filter(|&n| trace.is_full(n)).count(),
        presumed_dead: detect_death(&trace, &net, 3.0),
        oracle,
    };
    emit(&to_json(&summary), None, stdout)?;
    match &summary.oracle {
        Some(r) if !r.within_tolerance => Err(CliError::Failed(format!(
            "engine and oracle disagree: deviation {}, {} cluster mismatches, {} unmatched",
            r.max_time_deviation,
            r.cluster_mismatches.len(),
            r.unmatched
        ))),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct AnalysisOutput {
    horizon: f64,
    events: usize,
    sync: Option<SyncReport>,
    sync_error: Option<String>,
    info: Option<InfoReport>,
    risk: RiskReport,
    /// Empirical: quiescent for `quiescence_factor * theta / g_min` before the horizon.
    presumed_dead: Vec<usize>,
}

fn analyze(a: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = ConfigFile::load(&a.config)?;
    let net = cfg.validated()?;
    let trace = trace_io::load(&a.trace, net.m(), a.horizon.or(cfg.sim.horizon))?;
    let sync = detect_full_sync(&trace, net.m());
    let bound = bound_period(&net, PairSet::Full)
        .or_else(|_| bound_period(&net, PairSet::Core))
        .ok();
    let info = sync.as_ref().ok().and_then(|s| information(s, bound).ok());
    let transitory = sync.as_ref().ok().map(|s| s.transitory_time);
    let risk = risk_and_protection(&trace, &net, transitory).map_err(|e| CliError::Failed(e.to_string()))?;
    let out = AnalysisOutput {
        horizon: trace.horizon,
        events: trace.events.len(),
        sync_error: sync.as_ref().err().map(ToString::to_string),
        sync: sync.ok(),
        info,
        risk,
        presumed_dead: detect_death(&trace, &net, a.quiescence_factor),
    };
    emit(&to_json(&out), a.out.as_deref(), stdout)
}

fn verify_config(cfg: &ConfigFile, a: &VerifyArgs) -> VerifyConfig {
    VerifyConfig {
        n_inits: a.n_inits,
        horizon: a.horizon,
        seed: a.seed.unwrap_or(cfg.sim.rng_seed),
        n_perturbations: a.n_perturbations,
        sim: cfg.sim.sim_config(),
        oracle_dt: a.oracle_dt.or(cfg.oracle.map(|o| o.dt)),
        oracle_inits: a.oracle_inits,
        ..VerifyConfig::default()
    }
}

fn verify(a: &VerifyArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = ConfigFile::load(&a.config)?;
    let net = cfg.validated()?;
    if a.oracle_dt.is_some_and(|dt| !(dt.is_finite() && dt > 0.0)) {
        return Err(CliError::Invalid("oracle dt must be positive".into()));
    }
    let report: VerificationReport = match verify_theorems(&net, &verify_config(&cfg, a)) {
        Ok(r) => r,
        Err(e @ AnalysisError::HypothesisNotSatisfied(_)) => return Err(CliError::Failed(e.to_string())),
        Err(e) => return Err(CliError::Invalid(e.to_string())),
    };
    emit(&to_json(&report), a.out.as_deref(), stdout)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::Failed(format!("failed checks: {}", failed.join(", "))))
    }
}

#[derive(Debug, Serialize)]
struct SweepRow {
    point: usize,
    delta: Option<f64>,
    theta: Option<f64>,
    seed: u64,
    large_cooperativity_margin: Option<f64>,
    core_margin: Option<f64>,
    similar_cells_margin: Option<f64>,
    p: Option<usize>,
    max_transitory_time: Option<f64>,
    h_bits: Option<f64>,
    min_protection: Option<f64>,
    passed: bool,
    note: String,
}

fn grid_point(template: &NetworkSpec, delta: Option<f64>, theta: Option<f64>) -> NetworkSpec {
    let mut spec = template.clone();
    if let Some(d) = delta {
        let m = spec.m();
        for j in 0..m {
            for i in (0..m).filter(|&i| i != j) {
                spec.weights.set(j, i, d);
            }
        }
    }
    if let Some(t) = theta {
        for c in &mut spec.cells {
            c.theta = t;
            if c.s0 >= t {
                c.s0 = 0.0;
            }
        }
    }
    spec
}

fn sweep_point(
    point: usize,
    spec: NetworkSpec,
    delta: Option<f64>,
    theta: Option<f64>,
    cfg: &VerifyConfig,
) -> SweepRow {
    let mut row = SweepRow {
        point,
        delta,
        theta,
        seed: cfg.seed,
        large_cooperativity_margin: None,
        core_margin: None,
        similar_cells_margin: None,
        p: None,
        max_transitory_time: None,
        h_bits: None,
        min_protection: None,
        passed: false,
        note: String::new(),
    };
    let net = match validate(spec) {
        Ok(n) => n,
        Err(e) => {
            row.note = format!("invalid: {e}");
            return row;
        }
    };
    let h = check_hypotheses(&net);
    row.large_cooperativity_margin = h.large_cooperativity.map(|v| v.margin);
    row.core_margin = h.core.map(|v| v.margin);
    row.similar_cells_margin = Some(h.similar_cells.margin);
    match verify_theorems(&net, cfg) {
        Ok(r) => {
            row.p = r.period_p;
            row.max_transitory_time = r.max_transitory_time;
            row.h_bits = r.h_bits;
            row.min_protection = r.min_steady_protection;
            row.passed = r.passed;
            let failed: Vec<&str> = r.checks().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            row.note = if failed.is_empty() { "ok".into() } else { failed.join(" ") };
        }
        Err(AnalysisError::HypothesisNotSatisfied(why)) => row.note = format!("hypothesis fails: {why}"),
        Err(e) => row.note = e.to_string(),
    }
    row
}

fn sweep(a: &SweepArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = ConfigFile::load(&a.config)?;
    cfg.validated()?;
    if a.delta.iter().chain(&a.theta).any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(CliError::Invalid("grid values must be finite and non-negative".into()));
    }
    let deltas: Vec<Option<f64>> = if a.delta.is_empty() { vec![None] } else { a.delta.iter().copied().map(Some).collect() };
    let thetas: Vec<Option<f64>> = if a.theta.is_empty() { vec![None] } else { a.theta.iter().copied().map(Some).collect() };
    let grid: Vec<(Option<f64>, Option<f64>)> = deltas
        .iter()
        .flat_map(|&d| thetas.iter().map(move |&t| (d, t)))
        .collect();
    let vcfg = VerifyConfig {
        n_inits: a.n_inits,
        seed: a.seed.unwrap_or(cfg.sim.rng_seed),
        n_perturbations: a.n_perturbations,
        sim: cfg.sim.sim_config(),
        ..VerifyConfig::default()
    };
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .enumerate()
        .map(|(k, &(d, t))| sweep_point(k, grid_point(&cfg.network, d, t), d, t, &vcfg))
        .collect();

    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in &rows {
            w.serialize(r).map_err(|e| CliError::io("<csv>", std::io::Error::other(e)))?;
        }
        w.flush().map_err(|e| CliError::io("<csv>", e))?;
    }
    emit(&String::from_utf8(buf).expect("csv is utf-8"), a.out.as_deref(), stdout)
}
