//! Event-driven simulation of a validated network.
//!
//! Between events every cell flows freely: `dS/dt = g(x) - delta`, where
//! `delta` is the sum of the active differential interferences on that cell.
//! The clock jumps to the earliest threshold hit (or interference boundary,
//! or horizon). Simultaneous hits seed an avalanche resolved as the least
//! fixed point of the cooperative jump rule; members reset to `S = 0`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::model::{FreeDynamics, InterferenceKind, ValidatedNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Hit times within this window of the earliest are one instant.
    pub eps_sync: f64,
    /// Residual tolerance on `S - theta` for the oscillatory root search.
    pub eps_root: f64,
    pub max_events: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            eps_sync: 1e-9,
            eps_root: 1e-10,
            max_events: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellState {
    pub s: f64,
    pub aux: f64,
}

/// Clock plus per-cell state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub cells: Vec<CellState>,
}

impl SimState {
    /// Every cell at `S = 0` with its reset phase.
    pub fn reset(net: &ValidatedNetwork, t: f64) -> Self {
        SimState {
            t,
            cells: net
                .cells()
                .iter()
                .map(|c| CellState {
                    s: 0.0,
                    aux: c.dynamics.reset_aux(),
                })
                .collect(),
        }
    }

    pub fn same_cells(&self, other: &SimState) -> bool {
        self.cells == other.cells
    }
}

/// Initial satisfactions and phases, one entry per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub s: Vec<f64>,
    pub aux: Vec<f64>,
}

impl InitialState {
    pub fn from_network(net: &ValidatedNetwork) -> Self {
        InitialState {
            s: net.cells().iter().map(|c| c.s0).collect(),
            aux: net.cells().iter().map(|c| c.aux0).collect(),
        }
    }

    pub fn check(&self, net: &ValidatedNetwork) -> Result<(), EngineError> {
        if self.s.len() != net.m() || self.aux.len() != net.m() {
            return Err(EngineError::InvalidInitialState(format!(
                "expected {} cells, got {} satisfactions and {} phases",
                net.m(),
                self.s.len(),
                self.aux.len()
            )));
        }
        for (i, (&s, c)) in self.s.iter().zip(net.cells()).enumerate() {
            if !(s >= 0.0 && s < c.theta) {
                return Err(EngineError::InvalidInitialState(format!(
                    "cell {i}: S = {s} outside [0, {})",
                    c.theta
                )));
            }
        }
        if let Some(i) = self.aux.iter().position(|a| !a.is_finite()) {
            return Err(EngineError::InvalidInitialState(format!(
                "cell {i}: phase not finite"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterEvent {
    pub n: usize,
    pub t: f64,
    /// Spiking cells, ascending.
    pub cluster: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub events: Vec<ClusterEvent>,
    /// Spike instants of each cell, ascending. The implicit `t(0) = 0` is
    /// not stored.
    pub per_cell_spikes: Vec<Vec<f64>>,
    pub horizon: f64,
    pub initial: Vec<f64>,
}

impl Trace {
    /// Rebuilds a trace from its event list.
    pub fn from_events(m: usize, events: Vec<ClusterEvent>, horizon: f64, initial: Vec<f64>) -> Self {
        let mut per_cell_spikes = vec![Vec::new(); m];
        for e in &events {
            for &i in &e.cluster {
                per_cell_spikes[i].push(e.t);
            }
        }
        Trace {
            events,
            per_cell_spikes,
            horizon,
            initial,
        }
    }

    pub fn m(&self) -> usize {
        self.per_cell_spikes.len()
    }

    pub fn is_full(&self, n: usize) -> bool {
        self.events[n].cluster.len() == self.m()
    }
}

/// Integration step for the oscillatory family.
pub fn oscillatory_step_limit(omega: f64) -> f64 {
    0.01f64.min(0.01 / omega)
}

/// RK4 increment of `dS/dt = c + amp*sin(phi0 + omega*t) - delta` over `[t0, t0 + h]`.
#[inline]
fn osc_increment(c: f64, amp: f64, omega: f64, phi0: f64, delta: f64, t0: f64, h: f64) -> f64 {
    let f = |t: f64| c + amp * (phi0 + omega * t).sin() - delta;
    h / 6.0 * (f(t0) + 4.0 * f(t0 + 0.5 * h) + f(t0 + h))
}

/// Advances one cell by `dt` under drift reduction `delta`; the second
/// value reports whether the `S >= 0` clamp engaged.
pub fn flow(
    dynamics: &FreeDynamics,
    state: CellState,
    dt: f64,
    delta: f64,
) -> (CellState, bool) {
    if dt <= 0.0 {
        return (state, false);
    }
    match *dynamics {
        FreeDynamics::ConstantRate { a } => clamp(CellState {
            s: state.s + (a - delta) * dt,
            aux: state.aux,
        }),
        FreeDynamics::AffineInS { a, b } => {
            let r = a - delta;
            let s = if b == 0.0 {
                state.s + r * dt
            } else {
                let eq = r / b;
                state.s + (eq - state.s) * -(-b * dt).exp_m1()
            };
            clamp(CellState { s, aux: state.aux })
        }
        FreeDynamics::OscillatoryAux {
            c,
            amplitude,
            omega,
            ..
        } => {
            let n = (dt / oscillatory_step_limit(omega)).ceil().max(1.0) as usize;
            let h = dt / n as f64;
            let mut s = state.s;
            let mut clamped = false;
            for k in 0..n {
                s += osc_increment(c, amplitude, omega, state.aux, delta, k as f64 * h, h);
                if s < 0.0 {
                    s = 0.0;
                    clamped = true;
                }
            }
            let aux = (state.aux + omega * dt).rem_euclid(TAU);
            (CellState { s, aux }, clamped)
        }
    }
}

fn clamp(st: CellState) -> (CellState, bool) {
    if st.s < 0.0 {
        (CellState { s: 0.0, aux: st.aux }, true)
    } else {
        (st, false)
    }
}

/// Smallest `tau` in `(0, limit]` at which the cell reaches `theta` under a
/// constant drift reduction `delta`; `None` if it does not within `limit`.
pub fn hit_time(
    dynamics: &FreeDynamics,
    theta: f64,
    state: CellState,
    delta: f64,
    limit: f64,
    eps_root: f64,
) -> Option<f64> {
    if state.s >= theta {
        return Some(0.0);
    }
    let within = |tau: f64| (tau <= limit).then_some(tau);
    match *dynamics {
        FreeDynamics::ConstantRate { a } => {
            let r = a - delta;
            if r <= 0.0 {
                return None;
            }
            within((theta - state.s) / r)
        }
        FreeDynamics::AffineInS { a, b } => {
            let r = a - delta;
            if b == 0.0 {
                return if r <= 0.0 { None } else { within((theta - state.s) / r) };
            }
            // the equilibrium r/b must lie strictly above theta
            let gap = r - b * theta;
            if gap <= 0.0 {
                return None;
            }
            within((b * (theta - state.s) / gap).ln_1p() / b)
        }
        FreeDynamics::OscillatoryAux {
            c,
            amplitude,
            omega,
            ..
        } => {
            if c + amplitude - delta <= 0.0 {
                return None;
            }
            let h_max = oscillatory_step_limit(omega);
            let mut t0 = 0.0;
            let mut s = state.s;
            while t0 < limit {
                let h = h_max.min(limit - t0);
                let next = s + osc_increment(c, amplitude, omega, state.aux, delta, t0, h);
                if next >= theta {
                    // bisection inside the bracketing step
                    let (mut lo, mut hi) = (0.0, h);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        let sm = s + osc_increment(c, amplitude, omega, state.aux, delta, t0, mid);
                        let res = sm - theta;
                        if res.abs() < eps_root {
                            return Some(t0 + mid);
                        }
                        if res < 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                        if hi - lo <= f64::EPSILON * (t0 + hi) {
                            break;
                        }
                    }
                    return Some(t0 + hi);
                }
                s = next.max(0.0);
                t0 += h;
            }
            None
        }
    }
}

/// `S <- max(0, S - magnitude)`. Never produces a spike.
pub fn apply_impulse(state: CellState, magnitude: f64) -> CellState {
    CellState {
        s: (state.s - magnitude).max(0.0),
        aux: state.aux,
    }
}

/// Outcome of resolving one avalanche.
#[derive(Debug, Clone, PartialEq)]
pub struct Cascade {
    /// Members of the cluster, ascending.
    pub cluster: Vec<usize>,
    /// `S` after the event: 0 for members, `S(t-) + sum of received jumps`
    /// for the others.
    pub s_post: Vec<f64>,
    pub rounds: usize,
}

/// Least fixed point of the avalanche started by `seeds` on the
/// pre-event satisfactions `s_pre`.
///
/// Each round adds the jumps of every current member to every non-member
/// and recruits those reaching their threshold. Members receive nothing.
/// Jumps are summed in ascending sender order, so the result depends only on
/// the seed *set*.
pub fn cascade(net: &ValidatedNetwork, s_pre: &[f64], seeds: &[usize]) -> Cascade {
    let m = net.m();
    let mut member = vec![false; m];
    for &i in seeds {
        member[i] = true;
    }
    let mut s_post = s_pre.to_vec();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut recruited = false;
        for i in 0..m {
            if member[i] {
                continue;
            }
            let received: f64 = (0..m).filter(|&j| member[j]).map(|j| net.weight(j, i)).sum();
            s_post[i] = s_pre[i] + received;
        }
        for i in 0..m {
            if !member[i] && s_post[i] >= net.theta(i) {
                member[i] = true;
                recruited = true;
            }
        }
        if !recruited {
            break;
        }
    }
    let cluster: Vec<usize> = (0..m).filter(|&i| member[i]).collect();
    for &i in &cluster {
        s_post[i] = 0.0;
    }
    Cascade {
        cluster,
        s_post,
        rounds,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Window {
    target: usize,
    delta: f64,
    start: f64,
    end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Impulse {
    target: usize,
    magnitude: f64,
    at: f64,
}

/// Interference schedule: differential windows, impulses, and the sorted
/// set of instants at which the drift or the state changes.
#[derive(Debug, Clone, Default)]
struct Schedule {
    windows: Vec<Window>,
    impulses: Vec<Impulse>,
    boundaries: Vec<f64>,
}

impl Schedule {
    fn new(net: &ValidatedNetwork) -> Self {
        let mut s = Schedule::default();
        for it in net.interferences() {
            match it.kind {
                InterferenceKind::Differential { delta, start, end } => {
                    let end = end.unwrap_or(f64::INFINITY);
                    s.windows.push(Window {
                        target: it.target,
                        delta,
                        start,
                        end,
                    });
                    s.boundaries.push(start);
                    if end.is_finite() {
                        s.boundaries.push(end);
                    }
                }
                InterferenceKind::Impulsive { magnitude, at } => {
                    s.impulses.push(Impulse {
                        target: it.target,
                        magnitude,
                        at,
                    });
                    s.boundaries.push(at);
                }
            }
        }
        // stable: impulses at one instant keep their declaration order
        s.impulses.sort_by(|a, b| a.at.total_cmp(&b.at));
        s.boundaries.sort_by(f64::total_cmp);
        s.boundaries.dedup();
        s
    }

    fn active_delta(&self, cell: usize, t: f64) -> f64 {
        self.windows
            .iter()
            .filter(|w| w.target == cell && w.start <= t && t < w.end)
            .map(|w| w.delta)
            .sum()
    }

    fn next_boundary_after(&self, t: f64) -> Option<f64> {
        let idx = self.boundaries.partition_point(|&b| b <= t);
        self.boundaries.get(idx).copied()
    }

    fn impulses_at(&self, t: f64) -> impl Iterator<Item = &Impulse> {
        self.impulses.iter().filter(move |i| i.at == t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Cluster(ClusterEvent),
    /// The clock stopped at an interference boundary without any spike.
    Interference { t: f64 },
    /// The clock reached the horizon.
    Horizon { t: f64 },
}

/// Stepwise driver over one network and one initial state.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    net: &'a ValidatedNetwork,
    cfg: SimConfig,
    schedule: Schedule,
    state: SimState,
    horizon: f64,
    next_n: usize,
    clamps: u64,
}

impl<'a> Simulator<'a> {
    pub fn new(
        net: &'a ValidatedNetwork,
        init: &InitialState,
        horizon: f64,
        cfg: SimConfig,
    ) -> Result<Self, EngineError> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(EngineError::InvalidHorizon(horizon));
        }
        init.check(net)?;
        let state = SimState {
            t: 0.0,
            cells: init
                .s
                .iter()
                .zip(&init.aux)
                .map(|(&s, &aux)| CellState { s, aux })
                .collect(),
        };
        let mut sim = Simulator {
            net,
            cfg,
            schedule: Schedule::new(net),
            state,
            horizon,
            next_n: 0,
            clamps: 0,
        };
        sim.apply_impulses_at(0.0);
        Ok(sim)
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    /// Number of flows in which the `S >= 0` clamp engaged.
    pub fn clamp_count(&self) -> u64 {
        self.clamps
    }

    fn apply_impulses_at(&mut self, t: f64) {
        for imp in self.schedule.impulses_at(t) {
            let c = &mut self.state.cells[imp.target];
            *c = apply_impulse(*c, imp.magnitude);
        }
    }

    fn flow_all(&mut self, dt: f64) {
        let t = self.state.t;
        for (i, cell) in self.state.cells.iter_mut().enumerate() {
            let delta = self.schedule.active_delta(i, t);
            let (next, clamped) = flow(&self.net.cell(i).dynamics, *cell, dt, delta);
            *cell = next;
            self.clamps += clamped as u64;
        }
    }

    /// Advances to the next event, interference boundary or horizon.
    pub fn step(&mut self) -> StepOutcome {
        let t = self.state.t;
        if t >= self.horizon {
            return StepOutcome::Horizon { t };
        }
        let boundary = self.schedule.next_boundary_after(t).filter(|&b| b <= self.horizon);
        let stop = boundary.unwrap_or(self.horizon);
        let limit = stop - t;

        let hits: Vec<Option<f64>> = (0..self.net.m())
            .map(|i| {
                let c = self.net.cell(i);
                let delta = self.schedule.active_delta(i, t);
                hit_time(&c.dynamics, c.theta, self.state.cells[i], delta, limit, self.cfg.eps_root)
            })
            .collect();
        let first = hits.iter().flatten().copied().fold(f64::INFINITY, f64::min);

        if first.is_finite() {
            self.flow_all(first);
            let mut now = t + first;
            if now >= stop || first == limit {
                now = stop;
            }
            self.state.t = now;
            let mut seeds = Vec::new();
            for (i, h) in hits.iter().enumerate() {
                let theta = self.net.theta(i);
                let hit = matches!(h, Some(h) if *h <= first + self.cfg.eps_sync);
                if hit || self.state.cells[i].s >= theta {
                    self.state.cells[i].s = theta;
                    seeds.push(i);
                }
            }
            let s_pre: Vec<f64> = self.state.cells.iter().map(|c| c.s).collect();
            let res = cascade(self.net, &s_pre, &seeds);
            for (i, cell) in self.state.cells.iter_mut().enumerate() {
                cell.s = res.s_post[i];
            }
            for &i in &res.cluster {
                self.state.cells[i].aux = self.net.cell(i).dynamics.reset_aux();
            }
            if boundary == Some(now) {
                self.apply_impulses_at(now);
            }
            let ev = ClusterEvent {
                n: self.next_n,
                t: now,
                cluster: res.cluster,
            };
            self.next_n += 1;
            return StepOutcome::Cluster(ev);
        }

        self.flow_all(limit);
        self.state.t = stop;
        match boundary {
            Some(b) => {
                self.apply_impulses_at(b);
                StepOutcome::Interference { t: b }
            }
            None => StepOutcome::Horizon { t: stop },
        }
    }

    /// Steps until the horizon and collects the trace.
    pub fn run(mut self) -> Result<Trace, EngineError> {
        let initial: Vec<f64> = self.state.cells.iter().map(|c| c.s).collect();
        let mut events = Vec::new();
        loop {
            match self.step() {
                StepOutcome::Cluster(ev) => {
                    if events.len() >= self.cfg.max_events {
                        return Err(EngineError::EventFlood {
                            limit: self.cfg.max_events,
                            t: ev.t,
                        });
                    }
                    events.push(ev);
                }
                StepOutcome::Interference { .. } => {}
                StepOutcome::Horizon { .. } => break,
            }
        }
        Ok(Trace::from_events(self.net.m(), events, self.horizon, initial))
    }
}

/// Simulates from the network's own initial conditions.
pub fn simulate(net: &ValidatedNetwork, horizon: f64, cfg: SimConfig) -> Result<Trace, EngineError> {
    simulate_from(net, &InitialState::from_network(net), horizon, cfg)
}

pub fn simulate_from(
    net: &ValidatedNetwork,
    init: &InitialState,
    horizon: f64,
    cfg: SimConfig,
) -> Result<Trace, EngineError> {
    Simulator::new(net, init, horizon, cfg)?.run()
}

/// Cells whose last spike (or time 0) precedes `horizon - factor * theta / g_min`.
///
/// A finite trace cannot prove death, so this is an empirical flag. Cells
/// whose quiescence window does not fit inside the horizon are never flagged.
pub fn detect_death(trace: &Trace, net: &ValidatedNetwork, quiescence_factor: f64) -> Vec<usize> {
    (0..net.m())
        .filter(|&i| {
            let window = quiescence_factor * net.theta(i) / net.g_bounds(i).0;
            let cutoff = trace.horizon - window;
            let last = trace.per_cell_spikes[i].last().copied().unwrap_or(0.0);
            cutoff > 0.0 && last < cutoff
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{validate, CellSpec, Interference, NetworkSpec, WeightMatrix};

    const CONST1: FreeDynamics = FreeDynamics::ConstantRate { a: 1.0 };

    fn st(s: f64) -> CellState {
        CellState { s, aux: 0.0 }
    }

    #[test]
    fn flow_examples() {
        let (c, _) = flow(&CONST1, st(0.4), 0.2, 0.0);
        assert!((c.s - 0.6).abs() < 1e-15);

        let affine = FreeDynamics::AffineInS { a: 2.0, b: 1.0 };
        let (c, _) = flow(&affine, st(0.0), 2f64.ln(), 0.0);
        assert!((c.s - 1.0).abs() < 1e-15);

        let (c, clamped) = flow(&CONST1, st(0.1), 0.5, 2.0);
        assert_eq!(c.s, 0.0);
        assert!(clamped);
    }

    #[test]
    fn affine_flow_clamps_when_equilibrium_negative() {
        let affine = FreeDynamics::AffineInS { a: 1.0, b: 1.0 };
        // equilibrium (1 - 3) / 1 = -2; S = 0.5 reaches 0 after ln(2.5/2)
        let (c, clamped) = flow(&affine, st(0.5), 1.0, 3.0);
        assert_eq!(c.s, 0.0);
        assert!(clamped);
        let (c, clamped) = flow(&affine, st(0.5), 0.1, 3.0);
        assert!(c.s > 0.0 && !clamped);
    }

    #[test]
    fn hit_time_examples() {
        let tau = hit_time(&CONST1, 1.0, st(0.4), 0.0, 10.0, 1e-10).unwrap();
        assert!((tau - 0.6).abs() < 1e-15);

        let affine = FreeDynamics::AffineInS { a: 2.0, b: 1.0 };
        let tau = hit_time(&affine, 1.0, st(0.0), 0.0, 10.0, 1e-10).unwrap();
        assert!((tau - 2f64.ln()).abs() < 1e-15);

        assert_eq!(hit_time(&CONST1, 1.0, st(0.4), 0.0, 0.5, 1e-10), None);
        assert_eq!(hit_time(&CONST1, 1.0, st(0.4), 1.0, 10.0, 1e-10), None);
        // equilibrium (2 - 1.5) / 1 = 0.5 stays below theta
        assert_eq!(hit_time(&affine, 1.0, st(0.0), 1.5, 100.0, 1e-10), None);
    }

    #[test]
    fn oscillatory_hit_time_brackets() {
        let osc = FreeDynamics::OscillatoryAux {
            c: 1.0,
            amplitude: 0.25,
            omega: TAU,
            phi_reset: 0.0,
        };
        let tau = hit_time(&osc, 1.0, st(0.0), 0.0, 10.0, 1e-10).unwrap();
        assert!((0.8..=1.0 / 0.75).contains(&tau), "{tau}");
        let (c, _) = flow(&osc, st(0.0), tau, 0.0);
        assert!((c.s - 1.0).abs() < 1e-9, "{}", c.s);
    }

    #[test]
    fn impulse_examples() {
        assert!((apply_impulse(st(0.5), 0.2).s - 0.3).abs() < 1e-15);
        assert_eq!(apply_impulse(st(0.1), 0.5).s, 0.0);
        assert_eq!(apply_impulse(st(0.0), 1.0).s, 0.0);
    }

    #[test]
    fn cascade_full_recruitment_on_net_a() {
        let net = fixtures::net_a();
        let mut s_pre = vec![1.0; 9];
        s_pre[0] = 0.05;
        let seeds: Vec<usize> = (1..9).collect();
        let res = cascade(&net, &s_pre, &seeds);
        assert_eq!(res.cluster, (0..9).collect::<Vec<_>>());
        assert!(res.s_post.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn cascade_without_recruits() {
        let net = fixtures::net_a();
        let s_pre = vec![1.0, 0.1, 0.0, 0.15, 0.05, 0.0, 0.1, 0.19, 0.0];
        let res = cascade(&net, &s_pre, &[0]);
        assert_eq!(res.cluster, vec![0]);
        for (post, pre) in res.s_post.iter().zip(&s_pre).skip(1) {
            assert_eq!(*post, pre + 0.8);
        }
        assert_eq!(res.rounds, 1);
    }

    #[test]
    fn cascade_fast_pair_on_net_b() {
        let net = fixtures::net_b();
        let mut s_pre = vec![0.2; 16];
        s_pre[0] = 1.0;
        s_pre[1] = 1.0;
        let res = cascade(&net, &s_pre, &[0, 1]);
        assert_eq!(res.cluster, vec![0, 1]);
        for i in 2..16 {
            assert!((res.s_post[i] - 0.9).abs() < 1e-15);
        }
    }

    #[test]
    fn net_a_hand_trajectory() {
        let spec = fixtures::net_a_spec().with_initial(&[0.9, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05]);
        let net = validate(spec).unwrap();
        let init = InitialState::from_network(&net);
        let mut sim = Simulator::new(&net, &init, 5.0, SimConfig::default()).unwrap();
        match sim.step() {
            StepOutcome::Cluster(ev) => {
                assert!((ev.t - 0.1).abs() < 1e-15);
                assert_eq!(ev.cluster, vec![0]);
            }
            other => panic!("{other:?}"),
        }
        match sim.step() {
            StepOutcome::Cluster(ev) => {
                assert!((ev.t - 0.15).abs() < 1e-12);
                assert_eq!(ev.cluster.len(), 9);
            }
            other => panic!("{other:?}"),
        }
        assert!(sim.state().same_cells(&SimState::reset(&net, 0.0)));

        let trace = simulate(&net, 5.0, SimConfig::default()).unwrap();
        let expect = [0.1, 0.15, 1.15, 2.15, 3.15, 4.15];
        assert_eq!(trace.events.len(), expect.len());
        for (e, t) in trace.events.iter().zip(expect) {
            assert!((e.t - t).abs() < 1e-12, "{} vs {t}", e.t);
        }
        assert!(trace.events[1..].iter().all(|e| e.cluster.len() == 9));
    }

    #[test]
    fn net_b_alternating_clusters() {
        let net = fixtures::net_b();
        let trace = simulate(&net, 4.5, SimConfig::default()).unwrap();
        let times: Vec<f64> = trace.events.iter().map(|e| e.t).collect();
        let expect = [1.0, 1.5, 2.5, 3.0, 4.0];
        assert_eq!(times.len(), expect.len(), "{times:?}");
        for (t, e) in times.iter().zip(expect) {
            assert!((t - e).abs() < 1e-12);
        }
        assert_eq!(trace.events[0].cluster, vec![0, 1]);
        assert_eq!(trace.events[1].cluster.len(), 16);
        assert_eq!(trace.events[2].cluster, vec![0, 1]);
    }

    #[test]
    fn empty_event_set_reaches_horizon() {
        let mut spec = fixtures::uniform_constant(2, 1.0, 1.0, 0.5);
        spec.interferences = (0..2)
            .map(|target| Interference {
                target,
                kind: InterferenceKind::Differential {
                    delta: 1.0,
                    start: 0.0,
                    end: None,
                },
            })
            .collect();
        let net = validate(spec).unwrap();
        let init = InitialState::from_network(&net);
        let mut sim = Simulator::new(&net, &init, 10.0, SimConfig::default()).unwrap();
        assert_eq!(sim.step(), StepOutcome::Horizon { t: 10.0 });
    }

    fn drained_pair(with_interference: bool) -> ValidatedNetwork {
        let mut spec = fixtures::uniform_constant(2, 1.0, 1.0, 0.5);
        spec.cells[1].s0 = 0.3;
        if with_interference {
            spec.interferences.push(Interference {
                target: 1,
                kind: InterferenceKind::Differential {
                    delta: 2.0,
                    start: 0.0,
                    end: None,
                },
            });
        }
        validate(spec).unwrap()
    }

    #[test]
    fn sustained_drain_kills_cell() {
        let net = drained_pair(true);
        let trace = simulate(&net, 10.0, SimConfig::default()).unwrap();
        assert!(trace.per_cell_spikes[1].is_empty());
        assert_eq!(trace.per_cell_spikes[0].len(), 10);
        assert_eq!(detect_death(&trace, &net, 3.0), vec![1]);

        let healthy = drained_pair(false);
        let trace = simulate(&healthy, 10.0, SimConfig::default()).unwrap();
        assert!(!trace.per_cell_spikes[1].is_empty());
        assert!(detect_death(&trace, &healthy, 3.0).is_empty());
    }

    #[test]
    fn death_needs_enough_horizon() {
        let net = drained_pair(true);
        let trace = simulate(&net, 0.5, SimConfig::default()).unwrap();
        assert!(trace.events.is_empty());
        assert!(detect_death(&trace, &net, 1.0).is_empty());
    }

    #[test]
    fn net_a_never_flagged_dead() {
        let net = fixtures::net_a();
        let trace = simulate(&net, 10.0, SimConfig::default()).unwrap();
        for f in [1.0, 2.0, 4.0] {
            assert!(detect_death(&trace, &net, f).is_empty());
        }
    }

    #[test]
    fn impulse_at_spike_instant_applies_after_cascade() {
        let mut spec = fixtures::uniform_constant(2, 1.0, 1.0, 0.3);
        spec.cells[1].s0 = 0.5;
        spec.interferences.push(Interference {
            target: 0,
            kind: InterferenceKind::Impulsive {
                magnitude: 0.2,
                at: 0.5,
            },
        });
        let net = validate(spec).unwrap();
        let init = InitialState::from_network(&net);
        let mut sim = Simulator::new(&net, &init, 3.0, SimConfig::default()).unwrap();
        match sim.step() {
            StepOutcome::Cluster(ev) => {
                assert_eq!(ev.t, 0.5);
                assert_eq!(ev.cluster, vec![1]);
            }
            other => panic!("{other:?}"),
        }
        // 0.5 + 0.3 jump, then the impulse
        assert!((sim.state().cells[0].s - 0.6).abs() < 1e-15);
    }

    #[test]
    fn impulse_clamps_without_spike() {
        let mut spec = fixtures::uniform_constant(2, 1.0, 1.0, 0.3);
        spec.cells[1].s0 = 0.1;
        spec.interferences.push(Interference {
            target: 0,
            kind: InterferenceKind::Impulsive {
                magnitude: 0.3,
                at: 0.3,
            },
        });
        let net = validate(spec).unwrap();
        let init = InitialState::from_network(&net);
        let mut sim = Simulator::new(&net, &init, 3.0, SimConfig::default()).unwrap();
        assert_eq!(sim.step(), StepOutcome::Interference { t: 0.3 });
        assert_eq!(sim.state().cells[0].s, 0.0);
    }

    #[test]
    fn invalid_inputs() {
        let net = fixtures::net_a();
        let init = InitialState::from_network(&net);
        assert!(matches!(
            Simulator::new(&net, &init, 0.0, SimConfig::default()),
            Err(EngineError::InvalidHorizon(_))
        ));
        let bad = InitialState {
            s: vec![1.0; 9],
            aux: vec![0.0; 9],
        };
        assert!(matches!(
            Simulator::new(&net, &bad, 1.0, SimConfig::default()),
            Err(EngineError::InvalidInitialState(_))
        ));
    }

    #[test]
    fn event_flood_guard() {
        let net = fixtures::net_a();
        let cfg = SimConfig {
            max_events: 3,
            ..SimConfig::default()
        };
        assert!(matches!(
            simulate(&net, 10.0, cfg),
            Err(EngineError::EventFlood { limit: 3, .. })
        ));
    }

    #[test]
    fn two_cell_unit_clock() {
        let cells = vec![CellSpec::new(1.0, CONST1); 2];
        let net = validate(NetworkSpec::new(cells, WeightMatrix::zeros(2))).unwrap();
        let trace = simulate(&net, 3.5, SimConfig::default()).unwrap();
        assert_eq!(trace.events.len(), 3);
        for (k, e) in trace.events.iter().enumerate() {
            assert!((e.t - (k + 1) as f64).abs() < 1e-12);
            assert_eq!(e.cluster, vec![0, 1]);
        }
    }
}
