//! Quantities derived from traces: periodic synchronization, code-pattern
//! information, risk and protection, and the end-to-end theorem checks.

mod info;
mod risk;
mod sync;
mod verify;

pub use info::{empirical_pattern_count, enumerate_patterns, information, InfoReport, Pattern};
pub use risk::{
    cell_isis, net_action, risk_and_protection, CellRisk, Isi, IsiRisk, RiskReport,
    RISK_IDENTITY_TOLERANCE,
};
pub use sync::{detect_full_sync, SyncReport, GAP_TOLERANCE};
pub use verify::{
    perturb, random_initial, required_horizon, verify_theorems, Check, RouteReport,
    VerificationReport, VerifyConfig,
};
