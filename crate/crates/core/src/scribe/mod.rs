//! Report generation: scribe backends, the barrier critic and the repair
//! loop that connects them.

mod adversarial;
mod critic;
mod http;
mod optimize;
pub mod prompt;
mod report;
mod template;

pub use adversarial::{AdversarialScribe, AdversaryConfig, Fault};
pub use critic::{
    concept_name, mention_negated, parse_report, Critic, CriticVerdict, Energy, EnergyMode, EntailmentCheck, PolarityEntailment,
    Violation, ViolationClass,
};
pub use http::{extract_json_object, HttpScribe, HttpScribeConfig, Transcript};
pub use optimize::{optimize_report, DeferReason, LoopConfig, OptimizationOutcome, OptimizationTrace, DEFAULT_MAX_ITERATIONS};
pub use report::{
    admissible_triples, evidence_support, expected_band, extract_claims, Claim, ClaimPartition, ClaimTriple, ConfidenceBand,
    Report, TypedValue, REPORT_SCHEMA,
};
pub use template::TemplateScribe;

use serde_json::Value;
use thiserror::Error;

use crate::diff::GroundedState;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ScribeError {
    #[error("scribe backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("unparseable scribe response: {0}")]
    UnparseableResponse(String),
}

/// A proposal backend. Output is raw JSON; structure is the critic's job.
pub trait Scribe {
    fn propose(&mut self, state: &GroundedState, feedback: Option<&CriticVerdict>) -> Result<Value, ScribeError>;
}
