use std::fmt;

use thiserror::Error;

/// A single broken invariant found while validating a [`crate::NetworkSpec`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("network needs at least 2 cells, found {m}")]
    TooFewCells { m: usize },
    #[error("weight matrix is {found}x{found} but the network has {expected} cells")]
    WeightShape { expected: usize, found: usize },
    #[error("cell {cell}: threshold must be positive, got {theta}")]
    NonPositiveTheta { cell: usize, theta: f64 },
    #[error("cell {cell}: initial satisfaction {s0} outside [0, {theta})")]
    InitialSatisfactionOutOfRange { cell: usize, s0: f64, theta: f64 },
    #[error("cell {cell}: invalid free dynamics ({reason})")]
    InvalidDynamics { cell: usize, reason: &'static str },
    #[error("cell {cell}: growth rate a - b*theta = {min_rate} is not positive")]
    NonPositiveGrowth { cell: usize, min_rate: f64 },
    #[error("weight ({cell},{cell}) must be zero, got {value}")]
    NonZeroDiagonal { cell: usize, value: f64 },
    #[error("weight ({from},{to}) = {value} is negative or not finite")]
    NegativeWeight { from: usize, to: usize, value: f64 },
    #[error("core: {reason}")]
    CoreViolation { reason: String },
    #[error("interference {index}: {reason}")]
    InvalidInterference { index: usize, reason: String },
}

/// Every invariant violation found in one pass over a network description.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} invalid network invariant(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationError {}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("minimum interaction weight is zero; the full-graph hypothesis does not apply")]
    ZeroMinWeight,
    #[error("network has no designated core")]
    MissingCore,
    #[error("networks differ in shape: {0}")]
    ShapeMismatch(String),
    #[error("weight matrix rows are not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("initial state invalid: {0}")]
    InvalidInitialState(String),
    #[error("more than {limit} events before t = {t}")]
    EventFlood { limit: usize, t: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("fewer than two full-population events in the trace")]
    NoFullSync,
    #[error("periodicity broken at event {n}: {detail}")]
    PeriodicityViolated { n: usize, detail: String },
    #[error("pattern count law violated: {0}")]
    PatternLawViolated(String),
    #[error("risk formula identity violated for cell {cell}, interval {h}: {direct} vs {factored}")]
    RiskIdentityViolated {
        cell: usize,
        h: usize,
        direct: f64,
        factored: f64,
    },
    #[error("cell {cell} has no inter-spike interval {h}")]
    NoSuchInterval { cell: usize, h: usize },
    #[error("hypothesis not satisfied: {0}")]
    HypothesisNotSatisfied(String),
    #[error("horizon {given} is shorter than the required {required}")]
    HorizonTooShort { given: f64, required: f64 },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
