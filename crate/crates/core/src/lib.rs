//! Simulation and verification toolkit for deterministic pulse-coupled
//! cooperative networks.
//!
//! * [`model`]: network description, validation, hypotheses and bounds.
//! * [`engine`]: event-driven simulator with avalanche resolution.
//! * [`analysis`]: synchronization, information, risk and theorem checks.
//! * [`oracle`]: fixed-step reference simulator for cross-checking.

pub mod analysis;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod oracle;

pub use engine::{
    simulate, simulate_from, ClusterEvent, InitialState, SimConfig, SimState, Simulator, Trace,
};
pub use error::{AnalysisError, EngineError, ModelError, ValidationError, Violation};
pub use model::{
    validate, CellSpec, FreeDynamics, Interference, InterferenceKind, NetworkSpec, PairSet,
    ValidatedNetwork, WeightMatrix,
};
